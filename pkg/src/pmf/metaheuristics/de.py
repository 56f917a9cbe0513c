"""DE/rand/1/bin with synchronous generations and greedy replacement."""

import numpy as np


def defaults(dim, n):
    return {"F": 0.5, "CR": 0.9}


def derive(X, f, space, params):
    return {}


def donor_indices(rng, n):
    """Three distinct partners per member, none equal to the member itself."""
    idx = np.argsort(rng.random((n, n - 1)), axis=1, kind="stable")[:, :3]
    return idx + (idx >= np.arange(n)[:, None])


def trial_vectors(X, rng, F, CR, space):
    n, d = X.shape
    r = donor_indices(rng, n)
    V = X[r[:, 0]] + F * (X[r[:, 1]] - X[r[:, 2]])
    cross = rng.random((n, d)) < CR
    jrand = rng.integers(0, d, size=n)
    cross[np.arange(n), jrand] = True
    return space.clip(np.where(cross, V, X))


def step(X, f, aux, params, space, ev, rng):
    n = X.shape[0]
    if n < 4:
        raise ValueError("DE/rand/1 needs at least 4 members")
    while ev.left > 0:
        U = trial_vectors(X, rng, params["F"], params["CR"], space)
        k = min(n, ev.left)
        fu = ev(U[:k])
        better = fu <= f[:k]
        X[:k][better] = U[:k][better]
        f[:k][better] = fu[better]
    return X, f
