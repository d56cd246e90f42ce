"""Signatures of piecewise-linear paths and decay diagnostics.

A piecewise-linear path is segment-exactly summarized by its truncated
signature: the tensor exponential of each segment increment, concatenated in
time order.  Queries at interior times interpolate linearly, so a signature
over [s, t] is a finite product of segment exponentials.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .reports import BoundReport, make_bound_report
from .tensor_algebra import (
    TruncatedTensor,
    homogeneous_norm,
    project,
    segment_exp,
    truncated_mul,
    unit_tensor,
)

__all__ = [
    "PiecewiseLinearPath",
    "DecayTable",
    "signature",
    "chen_concat",
    "decay_scan",
    "level2_symmetry_check",
]


@dataclass(frozen=True)
class PiecewiseLinearPath:
    """Vertex times (strictly increasing) and vertex points, shape (n+1, d)."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).reshape(-1)
        p = np.asarray(self.points, dtype=float)
        if p.ndim == 1:
            p = p[:, None]
        if t.shape[0] < 2:
            raise ValueError("a path needs at least two vertices")
        if p.shape[0] != t.shape[0]:
            raise ValueError(
                f"times ({t.shape[0]}) and points ({p.shape[0]}) disagree"
            )
        if p.shape[1] < 1:
            raise ValueError("path dimension must be >= 1")
        if not np.all(np.diff(t) > 0):
            raise ValueError("vertex times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", p)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t1(self) -> float:
        return float(self.times[-1])

    def _check_time(self, t: float):
        if not (self.t0 - 1e-12 <= t <= self.t1 + 1e-12):
            raise ValueError(
                f"time {t} outside the path domain [{self.t0}, {self.t1}]"
            )

    def position(self, t: float) -> np.ndarray:
        """Linear interpolation at time t."""
        self._check_time(t)
        t = min(max(t, self.t0), self.t1)
        j = int(np.searchsorted(self.times, t, side="right") - 1)
        j = min(max(j, 0), len(self.times) - 2)
        t0, t1 = self.times[j], self.times[j + 1]
        w = (t - t0) / (t1 - t0)
        return (1.0 - w) * self.points[j] + w * self.points[j + 1]

    def increments(self, s: float, t: float) -> np.ndarray:
        """Segment increments of the restriction to [s, t], one row each."""
        self._check_time(s)
        self._check_time(t)
        if s > t:
            raise ValueError(f"need s <= t, got s={s}, t={t}")
        if s == t:
            return np.zeros((0, self.dim))
        interior = self.times[(self.times > s) & (self.times < t)]
        knots = np.concatenate(([s], interior, [t]))
        pts = np.vstack([self.position(u) for u in knots])
        return np.diff(pts, axis=0)

    @classmethod
    def from_json(cls, obj) -> "PiecewiseLinearPath":
        """Accepts {"times": [...], "points": [[...], ...]} (dict or JSON text)."""
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        if not isinstance(obj, dict):
            raise ValueError("path document must be a JSON object")
        unknown = set(obj) - {"times", "points"}
        if unknown:
            raise ValueError(f"unknown path keys: {sorted(unknown)}")
        if "times" not in obj or "points" not in obj:
            raise ValueError('path document needs "times" and "points"')
        return cls(np.asarray(obj["times"], dtype=float),
                   np.asarray(obj["points"], dtype=float))

    def to_json(self) -> dict:
        return {"times": self.times.tolist(), "points": self.points.tolist()}


def signature(path: PiecewiseLinearPath, s: float, t: float,
              depth: int) -> TruncatedTensor:
    """Truncated signature of path over [s, t], exact per segment.

    The interval is split at interior vertices; each linear piece contributes
    its tensor exponential and the pieces are concatenated in time order.
    s == t gives the unit.
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")
    incs = path.increments(s, t)
    sig = unit_tensor(path.dim, depth)
    for row in incs:
        sig = truncated_mul(sig, segment_exp(row, depth))
    return sig


def chen_concat(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Concatenation product restricted to group-like inputs (scalar part 1)."""
    for x in (a, b):
        if abs(x.scalar - 1.0) > 1e-9:
            raise ValueError(
                f"chen_concat expects group-like inputs (scalar 1), got {x.scalar!r}"
            )
    return truncated_mul(a, b)


@dataclass
class DecayTable:
    """Per-level norm columns: measured, 1-variation reference, extension bound.

    rows: list of (level, measured, one_var_ref, extension_ref) where
      measured      = ||level n of the signature over [s, t]||
      one_var_ref   = |X|_{1-var}^n / n!
      extension_ref = beta(p)^(n-1) * ||X||_{p-var}^n / (n/p)!
    """

    s: float
    t: float
    p: float
    rows: list


def decay_scan(path: PiecewiseLinearPath, s: float, t: float,
               max_level: int, p: float = 1.0) -> DecayTable:
    """Raw factorial-decay columns; callers/tests assert the inequalities."""
    if max_level < 1:
        raise ValueError(f"max_level must be >= 1, got {max_level}")
    # Local imports: variation/inequalities sit above this module in the
    # dependency order for their own tests, but only these two values.
    from .inequalities import beta_constant, gamma_factorial
    from .variation import homogeneous_p_variation, one_variation

    sig = signature(path, s, t, max_level)
    v1 = one_variation(path, s, t)
    vp = homogeneous_p_variation(path, p, s, t).value if p > 1.0 else v1
    beta = beta_constant(p)
    rows = []
    for n in range(1, max_level + 1):
        measured = float(np.linalg.norm(project(sig, n)))
        one_var_ref = v1**n / math.factorial(n)
        extension_ref = beta ** (n - 1) * vp**n / gamma_factorial(n / p)
        rows.append((n, measured, one_var_ref, extension_ref))
    return DecayTable(s=float(s), t=float(t), p=float(p), rows=rows)


def level2_symmetry_check(path: PiecewiseLinearPath, s: float, t: float,
                          tol: float = 1e-12) -> BoundReport:
    """Defect of the level-2 symmetrization identity Sym(X^2) = X^1 (x) X^1 / 2.

    Zero (to rounding) for any path built from genuine iterated integrals.
    """
    sig = signature(path, s, t, 2)
    d = path.dim
    x1 = project(sig, 1)
    x2 = project(sig, 2).reshape(d, d)
    defect = float(np.max(np.abs(x2 + x2.T - np.outer(x1, x1))))
    return make_bound_report(
        defect,
        tol,
        tol=0.0,
        params={"s": float(s), "t": float(t), "order": 2},
        note="level-2 symmetrization defect",
    )
