"""Simulated annealing run as independent chains, one per member.

Chains share one geometric temperature schedule that cools once per epoch.
"""

import numpy as np


def defaults(dim, n):
    return {"neighbor_sigma": 0.1, "cooling": 0.95, "t_floor": 1e-9}


def derive(X, f, space, params):
    return {"temperature": max(float(np.std(f)), params["t_floor"]), "cursor": 0}


def step(X, f, aux, params, space, ev, rng):
    n, d = X.shape
    sigma = params["neighbor_sigma"] * space.width
    T = aux["temperature"]
    while ev.left > 0:
        k = min(n, ev.left)
        chains = (aux["cursor"] + np.arange(k)) % n
        cand = space.clip(X[chains] + rng.normal(0.0, 1.0, size=(k, d)) * sigma)
        fc = ev(cand)
        delta = fc - f[chains]
        u = rng.random(k)
        accept = (delta <= 0) | (u < np.exp(np.minimum(0.0, -delta / T)))
        X[chains[accept]] = cand[accept]
        f[chains[accept]] = fc[accept]
        aux["cursor"] = int((aux["cursor"] + k) % n)
    aux["temperature"] = max(T * params["cooling"], params["t_floor"])
    return X, f
