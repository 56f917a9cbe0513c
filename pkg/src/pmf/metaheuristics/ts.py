"""Tabu search over coordinate moves, run as independent chains.

A move adds ``+step`` or ``-step`` to one coordinate. After a move, its
reverse is tabu for ``tenure`` moves unless it would beat the chain's best
(aspiration). When no neighbor beats the chain's best the step halves.
"""

import numpy as np


def defaults(dim, n):
    return {"step": 0.05, "tenure": 5, "min_step": 1e-8}


def derive(X, f, space, params):
    n = X.shape[0]
    return {
        "tabu": [[] for _ in range(n)],
        "step": np.full(n, params["step"]),
        "chain_best": X.copy(),
        "chain_best_f": f.copy(),
        "cursor": 0,
    }


def neighbors(x, step_size):
    """The ``2 d`` coordinate moves as (positions, signatures)."""
    d = x.size
    moves = np.repeat(x[None, :], 2 * d, axis=0)
    coord = np.repeat(np.arange(d), 2)
    sign = np.tile([1, -1], d)
    moves[np.arange(2 * d), coord] += sign * step_size[coord]
    return moves, list(zip(coord.tolist(), sign.tolist()))


def step(X, f, aux, params, space, ev, rng):
    n = X.shape[0]
    tabu, steps = aux["tabu"], aux["step"]
    B, Bf = aux["chain_best"], aux["chain_best_f"]
    while ev.left > 0:
        c = aux["cursor"]
        moves, sigs = neighbors(X[c], steps[c] * space.width)
        moves = space.clip(moves)
        k = min(len(sigs), ev.left)
        fm = ev(moves[:k])
        admissible = np.array([sigs[j] not in tabu[c] or fm[j] < Bf[c] for j in range(k)])
        if admissible.any():
            j = int(np.flatnonzero(admissible)[np.argmin(fm[admissible])])
            X[c], f[c] = moves[j], fm[j]
            coord, sign = sigs[j]
            tabu[c].append((coord, -sign))
            del tabu[c][: -params["tenure"]]
        jbest = int(np.argmin(fm))
        if fm[jbest] < Bf[c]:
            B[c], Bf[c] = moves[jbest], fm[jbest]
        else:
            steps[c] = max(steps[c] * 0.5, params["min_step"])
        aux["cursor"] = (c + 1) % n
    return X, f
