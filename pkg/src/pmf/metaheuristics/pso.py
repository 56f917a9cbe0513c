"""Global-best PSO with constriction-equivalent coefficients."""

import numpy as np


def defaults(dim, n):
    return {"inertia": 0.729, "cognitive": 1.49445, "social": 1.49445, "vmax_fraction": 0.2}


def derive(X, f, space, params):
    g = int(np.argmin(f))
    return {
        "velocity": np.zeros_like(X),
        "pbest": X.copy(),
        "pbest_f": f.copy(),
        "gbest": X[g].copy(),
        "gbest_f": float(f[g]),
    }


def step(X, f, aux, params, space, ev, rng):
    n, d = X.shape
    w, c1, c2 = params["inertia"], params["cognitive"], params["social"]
    vmax = params["vmax_fraction"] * space.width
    V, P, Pf = aux["velocity"], aux["pbest"], aux["pbest_f"]
    while ev.left > 0:
        r1 = rng.random((n, d))
        r2 = rng.random((n, d))
        Vn = w * V + c1 * r1 * (P - X) + c2 * r2 * (aux["gbest"] - X)
        Vn = np.clip(Vn, -vmax, vmax)
        Xn = space.clip(X + Vn)
        k = min(n, ev.left)
        V[:k], X[:k] = Vn[:k], Xn[:k]
        f[:k] = ev(X[:k])
        improved = f[:k] < Pf[:k]
        P[:k][improved] = X[:k][improved]
        Pf[:k][improved] = f[:k][improved]
        g = int(np.argmin(Pf))
        if Pf[g] < aux["gbest_f"]:
            aux["gbest"], aux["gbest_f"] = P[g].copy(), float(Pf[g])
    return X, f


def on_elite(aux, i, x, fx):
    if fx < aux["pbest_f"][i]:
        aux["pbest"][i], aux["pbest_f"][i] = x, fx
