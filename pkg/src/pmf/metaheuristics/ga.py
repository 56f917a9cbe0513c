"""Real-coded generational GA.

Binary tournaments, blend crossover (BLX-alpha), per-gene Gaussian
mutation and a single elite carried into each generation.
"""

import numpy as np


def defaults(dim, n):
    return {
        "tournament_size": 2,
        "crossover_rate": 0.9,
        "blend_alpha": 0.5,
        "mutation_sigma": 0.1,  # fraction of the box width
        "mutation_rate": 1.0 / dim,
        "elites": 1,
    }


def derive(X, f, space, params):
    return {}


def tournament(f, rng, n_winners, size):
    T = rng.integers(0, f.size, size=(n_winners, size))
    return T[np.arange(n_winners), np.argmin(f[T], axis=1)]


def offspring(X, f, rng, params, space, n_off):
    """Children of one generation, before evaluation."""
    d = X.shape[1]
    n_pairs = (n_off + 1) // 2
    parents = tournament(f, rng, 2 * n_pairs, params["tournament_size"])
    P1, P2 = X[parents[0::2]], X[parents[1::2]]
    do_cross = rng.random(n_pairs) < params["crossover_rate"]
    spread = params["blend_alpha"] * np.abs(P1 - P2)
    lo, hi = np.minimum(P1, P2) - spread, np.maximum(P1, P2) + spread
    C1 = rng.uniform(lo, hi)
    C2 = rng.uniform(lo, hi)
    C1 = np.where(do_cross[:, None], C1, P1)
    C2 = np.where(do_cross[:, None], C2, P2)
    children = np.empty((2 * n_pairs, d))
    children[0::2], children[1::2] = C1, C2
    children = children[:n_off]
    mutate = rng.random((n_off, d)) < params["mutation_rate"]
    noise = rng.normal(0.0, 1.0, size=(n_off, d)) * (params["mutation_sigma"] * space.width)
    return space.clip(children + mutate * noise)


def step(X, f, aux, params, space, ev, rng):
    n = X.shape[0]
    n_elite = min(params["elites"], n)
    n_off = n - n_elite
    if n_off < 1:
        raise ValueError("GA needs more members than elites")
    while ev.left > 0:
        order = np.argsort(f, kind="stable")
        C = offspring(X, f, rng, params, space, n_off)
        k = min(n_off, ev.left)
        fc = ev(C[:k])
        # truncated last generation: top up with the best surviving parents
        keep = order[: n - k]
        X = np.concatenate([X[keep[:n_elite]], C[:k], X[keep[n_elite:]]])
        f = np.concatenate([f[keep[:n_elite]], fc, f[keep[n_elite:]]])
    return X, f
