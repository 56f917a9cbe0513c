"""Continuous ACO with a ranked solution archive and Gaussian kernels."""

import math

import numpy as np


def defaults(dim, n):
    return {"archive_size": 10, "q": 0.1, "xi": 0.85}


def rank_weights(k, q):
    ranks = np.arange(k, dtype=float)  # rank - 1
    return np.exp(-(ranks**2) / (2.0 * q * q * k * k)) / (q * k * math.sqrt(2.0 * math.pi))


def derive(X, f, space, params):
    k = min(params["archive_size"], X.shape[0])
    order = np.argsort(f, kind="stable")[:k]
    return {
        "archive": X[order].copy(),
        "archive_f": f[order].copy(),
        "weights": rank_weights(k, params["q"]),
    }


def step(X, f, aux, params, space, ev, rng):
    n = X.shape[0]
    A, Af, w = aux["archive"], aux["archive_f"], aux["weights"]
    k = A.shape[0]
    p = w / w.sum()
    while ev.left > 0:
        m = min(n, ev.left)
        guides = rng.choice(k, size=m, p=p)
        mu = A[guides]
        if k > 1:
            sigma = params["xi"] * np.abs(A[None, :, :] - mu[:, None, :]).sum(axis=1) / (k - 1)
        else:
            sigma = np.zeros_like(mu)
        ants = space.clip(mu + sigma * rng.standard_normal(mu.shape))
        fa = ev(ants)
        X[:m], f[:m] = ants, fa
        pool_x = np.concatenate([A, ants])
        pool_f = np.concatenate([Af, fa])
        keep = np.argsort(pool_f, kind="stable")[:k]
        A, Af = pool_x[keep], pool_f[keep]
    aux["archive"], aux["archive_f"] = A, Af
    return X, f
