"""(mu/mu_w, lambda)-CMA-ES with rank-one and rank-mu updates.

lambda is the shared population size; the exposed population is the most
recently sampled generation.
"""

import math

import numpy as np

EIG_FLOOR = 1e-14


def defaults(dim, n):
    lam = n
    mu = lam // 2
    w = math.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    w = w / w.sum()
    mueff = 1.0 / float(np.sum(w**2))
    cc = (4 + mueff / dim) / (dim + 4 + 2 * mueff / dim)
    cs = (mueff + 2) / (dim + mueff + 5)
    c1 = 2 / ((dim + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((dim + 2) ** 2 + mueff))
    damps = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (dim + 1)) - 1) + cs
    return {
        "lambda": lam,
        "mu": mu,
        "weights": w.tolist(),
        "mueff": mueff,
        "cc": cc,
        "cs": cs,
        "c1": c1,
        "cmu": cmu,
        "damps": damps,
        "chiN": math.sqrt(dim) * (1 - 1 / (4 * dim) + 1 / (21 * dim**2)),
        "sigma_fraction": 0.3,
        "sigma_floor": 1e-3,
    }


def initial_sigma(X, space, params):
    spread = float(np.mean(np.std(X, axis=0)))
    floor = params["sigma_floor"] * float(np.mean(space.width))
    return max(params["sigma_fraction"] * spread, floor)


def derive(X, f, space, params):
    d = X.shape[1]
    half = max(1, X.shape[0] // 2)
    best = np.argsort(f, kind="stable")[:half]
    return {
        "mean": X[best].mean(axis=0),
        "sigma": initial_sigma(X, space, params),
        "C": np.eye(d),
        "B": np.eye(d),
        "D": np.ones(d),
        "pc": np.zeros(d),
        "ps": np.zeros(d),
        "generation": 0,
    }


def repair(C):
    """Symmetrize and floor the eigenvalues; returns (C, B, D)."""
    C = 0.5 * (C + C.T)
    vals, B = np.linalg.eigh(C)
    vals = np.maximum(vals, EIG_FLOOR)
    C = (B * vals) @ B.T
    C = 0.5 * (C + C.T)
    return C, B, np.sqrt(vals)


def step(X, f, aux, params, space, ev, rng):
    d = X.shape[1]
    lam, mu = params["lambda"], params["mu"]
    w = np.asarray(params["weights"])
    mueff, cc, cs = params["mueff"], params["cc"], params["cs"]
    c1, cmu, damps, chiN = params["c1"], params["cmu"], params["damps"], params["chiN"]
    max_sigma = float(np.max(space.width))
    while ev.left > 0:
        m, sigma = aux["mean"], aux["sigma"]
        B, D = aux["B"], aux["D"]
        Z = rng.standard_normal((lam, d))
        Xs = space.clip(m + sigma * (Z * D) @ B.T)
        k = min(lam, ev.left)
        fs = ev(Xs[:k])
        if k < lam:  # partial generation at the end of the epoch: no update
            X[:k], f[:k] = Xs[:k], fs
            break
        X, f = Xs, fs
        sel = np.argsort(fs, kind="stable")[:mu]
        Y = (Xs[sel] - m) / sigma
        yw = w @ Y
        aux["mean"] = m + sigma * yw
        invsqrt = (B / D) @ B.T
        ps = (1 - cs) * aux["ps"] + math.sqrt(cs * (2 - cs) * mueff) * (invsqrt @ yw)
        gen = aux["generation"] + 1
        ps_norm = float(np.linalg.norm(ps))
        hsig = ps_norm / math.sqrt(1 - (1 - cs) ** (2 * gen)) / chiN < 1.4 + 2 / (d + 1)
        pc = (1 - cc) * aux["pc"] + hsig * math.sqrt(cc * (2 - cc) * mueff) * yw
        C = aux["C"]
        C = (
            (1 - c1 - cmu) * C
            + c1 * (np.outer(pc, pc) + (1 - hsig) * cc * (2 - cc) * C)
            + cmu * (Y.T * w) @ Y
        )
        aux["C"], aux["B"], aux["D"] = repair(C)
        aux["sigma"] = min(sigma * math.exp((cs / damps) * (ps_norm / chiN - 1)), max_sigma)
        aux["ps"], aux["pc"], aux["generation"] = ps, pc, gen
    return X, f
