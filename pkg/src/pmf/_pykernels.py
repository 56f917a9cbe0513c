"""Pure numpy implementations of the hot kernels.

Used when the compiled extension is missing or ``PMF_PURE_PYTHON`` is set.
Results agree with the compiled kernels to rounding (different summation
order), not bit for bit.
"""

import numpy as np

BACKEND = "python"


def _base_rows(kind, Z):
    d = Z.shape[1]
    if kind == 0:
        return np.sum(Z * Z, axis=1)
    if kind == 1:
        return 10.0 * d + np.sum(Z * Z - 10.0 * np.cos(2.0 * np.pi * Z), axis=1)
    if kind == 2:
        t = Z[:, 1:] - Z[:, :-1] ** 2
        u = 1.0 - Z[:, :-1]
        return np.sum(100.0 * t * t + u * u, axis=1)
    if kind == 3:
        s = np.sum(Z * Z, axis=1)
        s2 = np.sum(np.cos(2.0 * np.pi * Z), axis=1)
        return -20.0 * np.exp(-0.2 * np.sqrt(s / d)) - np.exp(s2 / d) + 20.0 + np.e
    if kind == 4:
        i = np.arange(1, d + 1, dtype=float)
        return np.sum(Z * Z, axis=1) / 4000.0 - np.prod(np.cos(Z / np.sqrt(i)), axis=1) + 1.0
    i = np.arange(1, d + 1, dtype=float)
    s2 = (0.5 * i * Z).sum(axis=1)
    return np.sum(Z * Z, axis=1) + s2 ** 2 + s2 ** 4


def eval_base(kind, z):
    return float(_base_rows(kind, np.asarray(z, dtype=float)[None, :])[0])


def transformed_batch(kind, X, shift, rotation, scale, offset, bias):
    Z = (scale * (X - shift)) @ rotation.T + offset
    return _base_rows(kind, Z) + bias


def mean_pairwise_distance(X):
    n = X.shape[0]
    if n < 2:
        return 0.0
    diff = X[:, None, :] - X[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    iu = np.triu_indices(n, k=1)
    return float(dist[iu].mean())
