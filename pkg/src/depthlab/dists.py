"""Input distributions as explicit (points, weights) supports.

Three variants: uniform on [0,1]^d (midpoint quadrature grid in 1-D, seeded
Monte Carlo for d >= 2), exhaustive enumeration of {+-1}^n, and the induced
pair distribution on {+-1}^n x {z-set}.  All weights are explicit so every
expectation in the lab is a plain weighted sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boolfn import enumerate_signs

__all__ = [
    "InputDistribution",
    "uniform_cube",
    "uniform_signs",
    "induced_pair",
]

MAX_ENUM_BITS = 20  # enumeration cap: at most 2^20 support points


@dataclass(frozen=True)
class InputDistribution:
    kind: str
    points: np.ndarray  # (m, dim); int8 for sign domains, float64 otherwise
    weights: np.ndarray  # (m,), sums to 1
    meta: dict = field(default_factory=dict)
    is_full_enumeration: bool = False

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()}, expected 1")
        if w.shape[0] != self.points.shape[0]:
            raise ValueError("points/weights length mismatch")
        w.flags.writeable = False
        p = self.points
        p.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", p)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def points_float(self) -> np.ndarray:
        if self.points.dtype == np.float64:
            return self.points
        cached = self.meta.get("_points_float")
        if cached is None:
            cached = self.points.astype(np.float64)
            cached.flags.writeable = False
            self.meta["_points_float"] = cached
        return cached


def uniform_cube(d: int, *, grid: int | None = None, samples: int | None = None,
                 seed: int | None = None) -> InputDistribution:
    """Uniform on [0,1]^d.

    In 1-D pass ``grid`` for the fixed midpoint quadrature grid; for d >= 2
    pass ``samples`` and ``seed`` for Monte Carlo.  The grid is midpoint so
    dyadic breakpoints of square-wave targets are never sampled exactly.
    """
    if d == 1 and grid is not None:
        if grid < 1:
            raise ValueError("grid must be >= 1")
        pts = ((np.arange(grid) + 0.5) / grid)[:, None]
        w = np.full(grid, 1.0 / grid)
        return InputDistribution("uniform_cube", pts, w, {"d": 1, "grid": grid})
    if samples is None or seed is None:
        raise ValueError("Monte Carlo variant needs samples and seed")
    rng = np.random.default_rng(seed)
    pts = rng.random((samples, d))
    w = np.full(samples, 1.0 / samples)
    return InputDistribution(
        "uniform_cube", pts, w, {"d": d, "samples": samples, "seed": seed}
    )


def uniform_signs(n: int) -> InputDistribution:
    """Exhaustive uniform enumeration of {+-1}^n, n <= 20."""
    if n > MAX_ENUM_BITS:
        raise ValueError(f"enumeration cap is n <= {MAX_ENUM_BITS}")
    pts = enumerate_signs(n)
    m = 2**n
    w = np.full(m, 1.0 / m)
    return InputDistribution("uniform_signs", pts, w, {"n": n}, is_full_enumeration=True)


def induced_pair(n: int, zset: np.ndarray) -> InputDistribution:
    """Uniform on {+-1}^n x {z^(1),...,z^(d)}: rows are (x, z) concatenations.

    x ranges over the full sign enumeration (outer loop) and z over the
    given set (inner loop), each pair weighted 1/(2^n * d).
    """
    zset = np.asarray(zset, dtype=np.int8)
    d = zset.shape[0]
    if zset.ndim != 2 or zset.shape[1] != n or not np.all(np.abs(zset) == 1):
        raise ValueError("zset must be a (d, n) matrix of +-1")
    if n + int(np.ceil(np.log2(max(d, 1)))) > MAX_ENUM_BITS + 4:
        raise ValueError("induced pair support too large")
    X = enumerate_signs(n)
    pts = np.concatenate(
        [np.repeat(X, d, axis=0), np.tile(zset, (2**n, 1))], axis=1
    )
    m = (2**n) * d
    w = np.full(m, 1.0 / m)
    return InputDistribution("induced_pair", pts, w, {"n": n, "zset_size": d})
