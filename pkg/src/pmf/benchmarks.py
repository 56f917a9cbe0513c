"""Shifted, rotated and biased test functions on ``[-100, 100]^dim``.

A problem evaluates ``base(M (s (x - o)) + c) + bias`` where ``o`` is the
shift, ``M`` an orthonormal rotation, ``s`` a per-kind scale that maps the
common box onto the base function's usual domain, and ``c`` moves the base
optimum to the origin of ``z`` (only rosenbrock needs ``c = 1``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import kernels
from .core import ConfigInvalid, DimensionMismatch, RandomStream, SearchSpace

DOMAIN = (-100.0, 100.0)


class BaseFunction(str, Enum):
    SPHERE = "sphere"
    RASTRIGIN = "rastrigin"
    ROSENBROCK = "rosenbrock"
    ACKLEY = "ackley"
    GRIEWANK = "griewank"
    ZAKHAROV = "zakharov"

    @property
    def code(self) -> int:
        return _CODES[self]

    @property
    def optimum(self) -> float:
        """Coordinate value of the canonical optimum (the same in every axis)."""
        return 1.0 if self is BaseFunction.ROSENBROCK else 0.0


_CODES = {kind: i for i, kind in enumerate(BaseFunction)}

# linear pre-scale from the shared box to the canonical domain half-width
_SCALE = {
    BaseFunction.RASTRIGIN: 5.12 / 100.0,
    BaseFunction.GRIEWANK: 600.0 / 100.0,
    BaseFunction.ROSENBROCK: 5.0 / 100.0,
    BaseFunction.ACKLEY: 32.768 / 100.0,
}


def eval_base(kind: BaseFunction | str, z) -> float:
    """Canonical (untransformed) base function value at ``z``."""
    kind = BaseFunction(kind)
    z = np.ascontiguousarray(z, dtype=float)
    if z.ndim != 1 or z.size == 0:
        raise ValueError("z must be a non-empty vector")
    return float(kernels.eval_base(kind.code, z))


def random_rotation(dim: int, rng: RandomStream) -> np.ndarray:
    """Orthonormal matrix from the QR factors of a Gaussian matrix.

    Columns of Q are sign-flipped so R has a positive diagonal, which makes
    the result a deterministic function of the Gaussian draw.
    """
    A = rng.standard_normal((dim, dim))
    Q, R = np.linalg.qr(A)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return np.ascontiguousarray(Q * signs)


@dataclass(frozen=True, eq=False)
class Problem:
    base: BaseFunction
    shift: np.ndarray
    rotation: np.ndarray
    bias: float
    space: SearchSpace
    seed: int = 0
    label: str = ""
    _scale: float = field(init=False, repr=False)
    _offset: float = field(init=False, repr=False)

    def __post_init__(self):
        base = BaseFunction(self.base)
        object.__setattr__(self, "base", base)
        shift = np.ascontiguousarray(self.shift, dtype=float)
        rotation = np.ascontiguousarray(self.rotation, dtype=float)
        shift.flags.writeable = False
        rotation.flags.writeable = False
        d = shift.size
        if rotation.shape != (d, d) or self.space.dim != d:
            raise DimensionMismatch("shift, rotation and space dimensions disagree")
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "_scale", _SCALE.get(base, 1.0))
        object.__setattr__(self, "_offset", base.optimum)
        if not self.label:
            object.__setattr__(self, "label", base.value)

    @property
    def dim(self) -> int:
        return self.shift.size

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray:
        """Objective values for each row of ``X``; no budget accounting."""
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"expected {self.dim} columns, got {X.shape[1]}")
        return kernels.transformed_batch(
            self.base.code, X, self.shift, self.rotation, self._scale, self._offset, self.bias
        )

    def __call__(self, x) -> float:
        return float(self.evaluate_batch(np.asarray(x, dtype=float)[None, :])[0])

    def descriptor(self) -> dict:
        return {"kind": self.label, "dim": self.dim, "seed": self.seed, "bias": self.bias}


def make_problem(base: BaseFunction | str, dim: int, seed: int, bias: float = 0.0) -> Problem:
    """Seeded instance: shift uniform in the central 80% of the box, random rotation."""
    if dim < 1:
        raise ConfigInvalid(f"dim must be >= 1, got {dim}")
    base = BaseFunction(base)
    space = SearchSpace.box(dim, *DOMAIN)
    rng = RandomStream(seed).spawn("problem", base.value)
    lo, hi = DOMAIN
    margin = 0.1 * (hi - lo)
    shift = rng.uniform(lo + margin, hi - margin, size=dim)
    rotation = random_rotation(dim, rng)
    return Problem(base, shift, rotation, bias, space, seed=seed)


F1_LABEL = "f1_like"


def f1_2022_like(dim: int, seed: int) -> Problem:
    """Shifted, fully rotated zakharov with bias 300 (CEC2022 F1 shape)."""
    if dim < 2:
        raise ConfigInvalid("the F1-like problem needs dim >= 2")
    p = make_problem(BaseFunction.ZAKHAROV, dim, seed, bias=300.0)
    return Problem(p.base, p.shift, p.rotation, p.bias, p.space, seed=seed, label=F1_LABEL)


FUNCTIONS = tuple(k.value for k in BaseFunction) + (F1_LABEL,)


def problem_from_name(name: str, dim: int, seed: int = 0, bias: float | None = None) -> Problem:
    if name == F1_LABEL:
        if bias not in (None, 300.0):
            raise ConfigInvalid("the F1-like problem has a fixed bias of 300")
        return f1_2022_like(dim, seed)
    try:
        kind = BaseFunction(name)
    except ValueError:
        raise ConfigInvalid(
            f"unknown function {name!r}; expected one of {', '.join(FUNCTIONS)}"
        ) from None
    return make_problem(kind, dim, seed, 0.0 if bias is None else bias)


def problem_from_descriptor(desc: dict | str) -> Problem:
    if isinstance(desc, str):
        desc = json.loads(desc)
    try:
        return problem_from_name(desc["kind"], int(desc["dim"]), int(desc.get("seed", 0)), desc.get("bias"))
    except KeyError as exc:
        raise ConfigInvalid(f"problem descriptor is missing {exc.args[0]!r}") from None
