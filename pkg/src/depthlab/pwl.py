"""Exact piecewise-linear algebra for 1-D ReLU networks.

A PwlFunction is a sorted breakpoint sequence plus per-segment (slope,
intercept) pairs on a closed interval.  Network propagation is symbolic:
affine maps transform segments, each ReLU splits segments at interior zero
crossings, and collinear neighbours are merged.  All hinge-loss integrals
against the dyadic square wave are computed in closed form per cell.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .mlp import Mlp, DimensionError

__all__ = [
    "PwlFunction",
    "PieceCapError",
    "from_mlp_1d",
    "count_pieces",
    "sign_crossings",
    "exact_hinge_loss_vs_fn",
    "sign_hinge_loss_vs_fn",
    "restrict_to_line",
    "piece_bound",
    "evaluate",
    "pwl_to_dict",
    "pwl_from_dict",
    "save_pwl",
    "load_pwl",
]

MERGE_TOL = 1e-12   # collinearity tolerance on (slope, intercept)
CONTINUITY_TOL = 1e-9
PIECE_CAP = 2**22   # refinement resource cap


class PieceCapError(RuntimeError):
    """A symbolic operation would exceed the configured piece cap."""


@dataclass(frozen=True)
class PwlFunction:
    lo: float
    hi: float
    breaks: np.ndarray      # strictly increasing, strictly inside (lo, hi)
    slopes: np.ndarray      # one per segment, len(breaks) + 1
    intercepts: np.ndarray  # y-intercepts of the extended segment lines

    def __post_init__(self):
        b = np.ascontiguousarray(self.breaks, dtype=np.float64)
        s = np.ascontiguousarray(self.slopes, dtype=np.float64)
        c = np.ascontiguousarray(self.intercepts, dtype=np.float64)
        if not self.lo < self.hi:
            raise ValueError("need lo < hi")
        if s.shape != c.shape or s.shape[0] != b.shape[0] + 1:
            raise ValueError("segment count must be breakpoint count + 1")
        if b.size and (b[0] <= self.lo or b[-1] >= self.hi or np.any(np.diff(b) <= 0)):
            raise ValueError("breakpoints must be strictly increasing inside (lo, hi)")
        left = s[:-1] * b + c[:-1]
        right = s[1:] * b + c[1:]
        if b.size and np.max(np.abs(left - right)) > CONTINUITY_TOL:
            raise ValueError("adjacent segments disagree at a breakpoint")
        for a in (b, s, c):
            a.flags.writeable = False
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "slopes", s)
        object.__setattr__(self, "intercepts", c)

    @property
    def n_pieces(self) -> int:
        return self.slopes.shape[0]

    def __call__(self, x):
        return evaluate(self, x)


def evaluate(f: PwlFunction, x) -> np.ndarray:
    """Vectorized evaluation; at a breakpoint the right segment is used."""
    x = np.asarray(x, dtype=np.float64)
    idx = np.searchsorted(f.breaks, x, side="right")
    return f.slopes[idx] * x + f.intercepts[idx]


# ---------------------------------------------------------------------------
# internal triple algebra: (breaks, slopes, intercepts) without validation

def _edges(lo, hi, b):
    return np.concatenate([[lo], b, [hi]])


def _merge(b, s, c):
    if b.size == 0:
        return b, s, c
    same = (np.abs(np.diff(s)) <= MERGE_TOL) & (np.abs(np.diff(c)) <= MERGE_TOL)
    keep = ~same
    return b[keep], np.concatenate([s[:1], s[1:][keep]]), np.concatenate([c[:1], c[1:][keep]])


def _check_cap(n):
    if n > PIECE_CAP:
        raise PieceCapError(f"{n} pieces exceeds the cap {PIECE_CAP}")


def _combine(lo, hi, triples, coefs, const):
    """Linear combination sum_l coefs[l] * p_l + const on the common refinement."""
    all_b = np.unique(np.concatenate([t[0] for t in triples]))
    _check_cap(all_b.size + 1)
    edges = _edges(lo, hi, all_b)
    mids = 0.5 * (edges[:-1] + edges[1:])
    s = np.full(mids.shape, 0.0)
    c = np.full(mids.shape, float(const))
    for (b_l, s_l, c_l), a in zip(triples, coefs):
        if a == 0.0:
            continue
        src = np.searchsorted(b_l, mids, side="right")
        s += a * s_l[src]
        c += a * c_l[src]
    return _merge(all_b, s, c)


def _split_at_level(lo, hi, b, s, c, level):
    """Insert breakpoints where the function strictly crosses ``level``."""
    edges = _edges(lo, hi, b)
    L, R = edges[:-1], edges[1:]
    vL = s * L + c - level
    vR = s * R + c - level
    straddle = (vL * vR) < 0.0
    if not straddle.any():
        return b, s, c
    safe = np.where(s == 0.0, 1.0, s)
    roots = (level - c) / safe
    valid = straddle & (roots > L) & (roots < R)
    if not valid.any():
        return b, s, c
    new_b = np.sort(np.concatenate([b, roots[valid]]))
    _check_cap(new_b.size + 1)
    edges = _edges(lo, hi, new_b)
    mids = 0.5 * (edges[:-1] + edges[1:])
    src = np.searchsorted(b, mids, side="right")
    return new_b, s[src], c[src]


def _relu(lo, hi, b, s, c):
    b, s, c = _split_at_level(lo, hi, b, s, c, 0.0)
    edges = _edges(lo, hi, b)
    mids = 0.5 * (edges[:-1] + edges[1:])
    neg = (s * mids + c) < 0.0
    s = np.where(neg, 0.0, s)
    c = np.where(neg, 0.0, c)
    return _merge(b, s, c)


# ---------------------------------------------------------------------------

def from_mlp_1d(net: Mlp, lo: float = 0.0, hi: float = 1.0) -> PwlFunction:
    """Exact symbolic propagation of a 1-input net into a PwlFunction."""
    if net.in_dim != 1:
        raise DimensionError("from_mlp_1d needs a net with input dimension 1")
    empty = np.array([], dtype=np.float64)
    units = [(empty, np.array([1.0]), np.array([0.0]))]  # the identity map
    last = len(net.layers) - 1
    for i, (W, bias) in enumerate(net.layers):
        new_units = []
        for j in range(W.shape[0]):
            t = _combine(lo, hi, units, W[j], bias[j])
            if i != last:
                t = _relu(lo, hi, *t)
            new_units.append(t)
        units = new_units
    b, s, c = _merge(*units[0])
    return PwlFunction(lo, hi, b, s, c)


def count_pieces(f: PwlFunction) -> int:
    """Number of maximal affine segments (collinear neighbours merged)."""
    b, s, c = _merge(f.breaks, f.slopes, f.intercepts)
    return s.shape[0]


def piece_bound(depth: int, width: int) -> int:
    """Worst-case piece count of a depth-L width-k 1-D ReLU net: 2^(L-1) k^L."""
    return 2 ** (depth - 1) * width**depth


def _cells_with_signs(f: PwlFunction):
    """Refine at zero crossings; per-cell sign with sign(0) = +1."""
    b, s, c = _split_at_level(f.lo, f.hi, f.breaks, f.slopes, f.intercepts, 0.0)
    edges = _edges(f.lo, f.hi, b)
    mids = 0.5 * (edges[:-1] + edges[1:])
    vals = s * mids + c
    return edges, np.where(vals >= 0.0, 1, -1)


def sign_crossings(f: PwlFunction) -> int:
    """Number of jumps of x -> sign(f(x)), with sign(0) = +1.

    Each transversal zero counts once; a flat zero interval counts once
    per sign flip at its ends.
    """
    _, signs = _cells_with_signs(f)
    return int(np.count_nonzero(np.diff(signs)))


def _square_wave_on_mids(mids: np.ndarray, n: int) -> np.ndarray:
    cells = np.floor(mids * 2**n).astype(np.int64)
    return np.where(cells % 2 == 0, 1.0, -1.0)


def exact_hinge_loss_vs_fn(f: PwlFunction, n: int) -> float:
    """Closed-form integral of max(0, 1 - f_n(x) f(x)) over [0,1].

    The integrand is affine on the common refinement of f's breakpoints,
    the 2^n dyadic band edges, and the crossings of f with the levels
    +-1, so the midpoint value integrates each cell exactly.
    """
    if f.lo > 0.0 or f.hi < 1.0:
        raise ValueError("function domain must contain [0,1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_cap(2**n + f.n_pieces)
    b, s, c = f.breaks, f.slopes, f.intercepts
    for level in (1.0, -1.0):
        b, s, c = _split_at_level(f.lo, f.hi, b, s, c, level)
    dyadic = np.arange(1, 2**n) / float(2**n)
    cuts = np.unique(np.concatenate([b, dyadic, [0.0, 1.0]]))
    cuts = cuts[(cuts >= 0.0) & (cuts <= 1.0)]
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    widths = np.diff(cuts)
    src = np.searchsorted(b, mids, side="right")
    vals = s[src] * mids + c[src]
    wave = _square_wave_on_mids(mids, n)
    integrand = np.maximum(0.0, 1.0 - wave * vals)
    return float(np.dot(widths, integrand))


def sign_hinge_loss_vs_fn(f: PwlFunction, n: int) -> float:
    """Hinge loss of the symbolic sign of f against the square wave.

    sign(f) takes values +-1 (sign(0) = +1), so the loss is exactly twice
    the measure where sign(f) disagrees with the wave.  The sign is
    composed symbolically; no discontinuous function is materialized.
    """
    if f.lo > 0.0 or f.hi < 1.0:
        raise ValueError("function domain must contain [0,1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_cap(2**n + f.n_pieces)
    edges, signs = _cells_with_signs(f)
    dyadic = np.arange(1, 2**n) / float(2**n)
    cuts = np.unique(np.concatenate([edges, dyadic, [0.0, 1.0]]))
    cuts = cuts[(cuts >= 0.0) & (cuts <= 1.0)]
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    widths = np.diff(cuts)
    cell = np.searchsorted(edges[1:-1], mids, side="right")
    s_f = signs[cell]
    wave = _square_wave_on_mids(mids, n)
    return float(2.0 * np.dot(widths, (s_f != wave).astype(np.float64)))


def restrict_to_line(net: Mlp, y) -> Mlp:
    """Freeze the first d-1 coordinates at y, leaving a 1-input net.

    The frozen part of the first layer folds into its bias, so
    forward(restricted, x) == forward(net, (y, x)) exactly and widths are
    unchanged.
    """
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    d = net.in_dim
    if y.shape != (d - 1,):
        raise DimensionError(f"expected frozen vector of length {d - 1}, got {y.shape}")
    W1, b1 = net.layers[0]
    newW = W1[:, -1:].copy()
    newb = b1 + W1[:, :-1] @ y
    return Mlp([(newW, newb)] + list(net.layers[1:]))


def pwl_to_dict(f: PwlFunction) -> dict:
    return {
        "lo": f.lo,
        "hi": f.hi,
        "breakpoints": f.breaks.tolist(),
        "segments": [[s, c] for s, c in zip(f.slopes.tolist(), f.intercepts.tolist())],
    }


def pwl_from_dict(d: dict) -> PwlFunction:
    seg = np.array(d["segments"], dtype=np.float64).reshape(-1, 2)
    return PwlFunction(
        float(d["lo"]), float(d["hi"]), np.array(d["breakpoints"]), seg[:, 0], seg[:, 1]
    )


def save_pwl(f: PwlFunction, path) -> None:
    with open(path, "w") as fh:
        json.dump(pwl_to_dict(f), fh)


def load_pwl(path) -> PwlFunction:
    with open(path) as fh:
        return pwl_from_dict(json.load(fh))
