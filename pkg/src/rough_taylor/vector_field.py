"""Polynomial driving fields and their Taylor coefficient hierarchy.

A field maps state y in R^e to a linear map R^d -> R^e (one polynomial per
matrix entry).  Polynomials are stored as dense coefficient cubes with one
axis per state variable, so products are shift-adds and derivatives are
slice-scales; stacks of polynomials share trailing cube axes and evaluate in
one einsum against per-axis Vandermonde matrices.

The hierarchy: coefficient field k+1 applies the state derivative of field k
in the direction of the field itself.  The fresh tensor slot is the FIRST
word letter (the earliest integration variable of the matching iterated
integral) — for a linear system y' = A_i y dx^i the word (i, j) therefore
carries A_j A_i y.  The reversed ("last slot") variant is kept only to power
the negative convergence test that pins down the convention.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass

import numpy as np

__all__ = [
    "VectorFieldJet",
    "MultilinearField",
    "Box",
    "SupNormEstimate",
    "taylor_coefficient",
    "apply_multilinear",
    "sup_norm_estimate",
    "lip_norm_estimate",
    "field_lip1_estimate",
]


# ---------------------------------------------------------------------------
# dense-cube polynomial helpers (stack = array with `e` trailing poly axes)

def _pad_poly(stack: np.ndarray, e: int, shape) -> np.ndarray:
    pads = [(0, 0)] * (stack.ndim - e) + [
        (0, s - cur) for s, cur in zip(shape, stack.shape[-e:])
    ]
    if any(p[1] for p in pads):
        return np.pad(stack, pads)
    return stack


def _common_shape(shapes):
    return tuple(max(s[i] for s in shapes) for i in range(len(shapes[0])))


def _poly_diff(stack: np.ndarray, e: int, var: int) -> np.ndarray:
    """d/dy_var applied to every polynomial in the stack."""
    ax = stack.ndim - e + var
    n = stack.shape[ax]
    if n == 1:
        return np.zeros_like(stack)
    moved = np.moveaxis(stack, ax, -1)
    out = moved[..., 1:] * np.arange(1, n, dtype=float)
    return np.moveaxis(out, -1, ax)


def _poly_mul_single(stack: np.ndarray, cube: np.ndarray, e: int) -> np.ndarray:
    """Multiply every polynomial in the stack by the one polynomial `cube`."""
    sa = stack.shape[-e:]
    sb = cube.shape
    out = np.zeros(stack.shape[:-e] + tuple(a + b - 1 for a, b in zip(sa, sb)))
    for idx in np.argwhere(cube != 0.0):
        c = cube[tuple(idx)]
        sl = (Ellipsis,) + tuple(
            slice(int(i), int(i) + a) for i, a in zip(idx, sa)
        )
        out[sl] += c * stack
    return out


def _poly_eval_stack(stack: np.ndarray, e: int, points: np.ndarray) -> np.ndarray:
    """Evaluate a stack at points (P, e); returns lead_shape + (P,)."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    if single:
        pts = pts[None, :]
    lead = stack.shape[:-e]
    poly_shape = stack.shape[-e:]
    flat = stack.reshape((-1,) + poly_shape)
    letters = string.ascii_lowercase[:e]
    vans = [
        pts[:, a][:, None] ** np.arange(poly_shape[a])[None, :]
        for a in range(e)
    ]
    ein = "z" + letters + "," + ",".join("p" + l for l in letters) + "->zp"
    vals = np.einsum(ein, flat, *vans)
    vals = vals.reshape(lead + (pts.shape[0],))
    return vals[..., 0] if single else vals


def _cube_from_terms(terms: dict, e: int) -> np.ndarray:
    """Minimal dense cube from {exponent-tuple: coefficient}."""
    if not terms:
        return np.zeros((1,) * e)
    degs = [max(k[a] for k in terms) for a in range(e)]
    cube = np.zeros(tuple(d + 1 for d in degs))
    for expo, c in terms.items():
        cube[tuple(expo)] += float(c)
    return cube


def _parse_exponent_key(key, e: int):
    if isinstance(key, tuple):
        expo = key
    else:
        body = str(key).strip().strip("()")
        # tolerate python-tuple spellings like "(1,)" and "(1, 2)"
        expo = tuple(int(x) for x in body.split(",") if x.strip() != "")
    if len(expo) != e or any(a < 0 for a in expo):
        raise ValueError(f"bad exponent key {key!r} for {e} state variables")
    return expo


# ---------------------------------------------------------------------------


class VectorFieldJet:
    """Polynomial field R^e -> L(R^d, R^e), components[a][i] = entry (a, i).

    Each component is a map {exponent-tuple: coefficient}.  Immutable by
    convention after construction; derived data (compiled cubes, coefficient
    fields) is cached on the instance.
    """

    def __init__(self, e: int, d: int, components):
        if e < 1 or d < 1:
            raise ValueError(f"need e, d >= 1, got e={e}, d={d}")
        if len(components) != e or any(len(row) != d for row in components):
            raise ValueError(f"components must form an {e} x {d} array")
        self.e = int(e)
        self.d = int(d)
        norm = []
        for row in components:
            out_row = []
            for terms in row:
                clean = {}
                for key, c in dict(terms).items():
                    expo = _parse_exponent_key(key, e)
                    if float(c) != 0.0:
                        clean[expo] = clean.get(expo, 0.0) + float(c)
                out_row.append(clean)
            norm.append(out_row)
        self.components = norm
        self._cubes = [
            [_cube_from_terms(self.components[a][i], e) for i in range(d)]
            for a in range(e)
        ]
        shape = _common_shape(
            [c.shape for row in self._cubes for c in row]
        )
        self._stack = np.stack(
            [
                np.stack([_pad_poly(c, e, shape) for c in row])
                for row in self._cubes
            ]
        )  # (e, d) + poly axes
        self._taylor_cache: dict = {}

    # -- construction helpers ------------------------------------------------

    @classmethod
    def linear(cls, matrices) -> "VectorFieldJet":
        """Linear system: direction i acts as the matrix A_i (each e x e)."""
        mats = [np.asarray(m, dtype=float) for m in matrices]
        e = mats[0].shape[0]
        comps = []
        for a in range(e):
            row = []
            for A in mats:
                terms = {}
                for b in range(e):
                    if A[a, b] != 0.0:
                        expo = tuple(1 if q == b else 0 for q in range(e))
                        terms[expo] = float(A[a, b])
                row.append(terms)
            comps.append(row)
        return cls(e, len(mats), comps)

    @classmethod
    def from_json(cls, obj) -> "VectorFieldJet":
        if isinstance(obj, (str, bytes)):
            obj = json.loads(obj)
        if not isinstance(obj, dict):
            raise ValueError("field document must be a JSON object")
        unknown = set(obj) - {"e", "d", "components"}
        if unknown:
            raise ValueError(f"unknown field keys: {sorted(unknown)}")
        for key in ("e", "d", "components"):
            if key not in obj:
                raise ValueError(f'field document needs "{key}"')
        e, d = int(obj["e"]), int(obj["d"])
        comps = []
        for row in obj["components"]:
            out_row = []
            for cell in row:
                if set(cell) - {"coeffs"}:
                    raise ValueError(
                        f"unknown component keys: {sorted(set(cell) - {'coeffs'})}"
                    )
                out_row.append(dict(cell.get("coeffs", {})))
            comps.append(out_row)
        return cls(e, d, comps)

    def to_json(self) -> dict:
        return {
            "e": self.e,
            "d": self.d,
            "components": [
                [
                    {
                        "coeffs": {
                            "(" + ",".join(str(a) for a in expo) + ")": c
                            for expo, c in sorted(cell.items())
                        }
                    }
                    for cell in row
                ]
                for row in self.components
            ],
        }

    # -- evaluation ----------------------------------------------------------

    def __call__(self, y) -> np.ndarray:
        """Matrix f(y), shape (e, d)."""
        return _poly_eval_stack(self._stack, self.e, np.asarray(y, dtype=float))

    def eval_many(self, points) -> np.ndarray:
        """Shape (P, e, d)."""
        vals = _poly_eval_stack(self._stack, self.e, points)
        return np.moveaxis(vals, -1, 0)

    def directional_stack(self, v) -> np.ndarray:
        """Polynomial stack of f(.) v, shape (e,) + poly axes."""
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape[0] != self.d:
            raise ValueError(f"direction must have {self.d} components")
        return np.tensordot(self._stack, v, axes=([1], [0]))

    @property
    def degree(self) -> int:
        return max(
            (sum(expo) for row in self.components for cell in row for expo in cell),
            default=0,
        )


@dataclass
class MultilinearField:
    """Polynomial map y -> L((R^d)^(x order), R^e).

    coeffs has shape (e, d**order) + one poly axis per state variable; the
    word axis is lexicographic with the first letter most significant, exactly
    matching the flat storage of signature levels.
    """

    order: int
    e: int
    d: int
    coeffs: np.ndarray

    def values(self, y) -> np.ndarray:
        """Matrix of word coefficients at state y, shape (e, d**order)."""
        return _poly_eval_stack(self.coeffs, self.e, np.asarray(y, dtype=float))

    def values_many(self, points) -> np.ndarray:
        """Shape (P, e, d**order)."""
        vals = _poly_eval_stack(self.coeffs, self.e, points)
        return np.moveaxis(vals, -1, 0)


def taylor_coefficient(field: VectorFieldJet, order: int,
                       new_slot: str = "first") -> MultilinearField:
    """Coefficient field of the given order in the driver-Taylor expansion.

    Order 1 is the field itself.  Each step differentiates in state and feeds
    the field through the fresh slot; `new_slot` selects where that slot lands
    in the word ("first" = adopted convention, "last" = reversed, kept for the
    negative test).
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if new_slot not in ("first", "last"):
        raise ValueError(f"new_slot must be 'first' or 'last', got {new_slot!r}")
    key = (order, new_slot)
    cached = field._taylor_cache.get(key)
    if cached is not None:
        return cached

    e, d = field.e, field.d
    if order == 1:
        out = MultilinearField(1, e, d, field._stack.copy())
    else:
        prev = taylor_coefficient(field, order - 1, new_slot)
        nw = d ** (order - 1)
        terms = []  # (i, stack) pairs, one per direction of the fresh slot
        for i in range(d):
            acc = None
            for b in range(e):
                cube = field._cubes[b][i]
                if not np.any(cube):
                    continue
                db = _poly_diff(prev.coeffs, e, b)
                term = _poly_mul_single(db, cube, e)
                if acc is None:
                    acc = term
                else:
                    shape = _common_shape([acc.shape[-e:], term.shape[-e:]])
                    acc = _pad_poly(acc, e, shape) + _pad_poly(term, e, shape)
            if acc is None:
                acc = np.zeros((e, nw) + (1,) * e)
            terms.append(acc)
        shape = _common_shape([t.shape[-e:] for t in terms])
        terms = [_pad_poly(t, e, shape) for t in terms]
        stacked = np.stack(terms, axis=1)  # (e, d, nw) + poly
        if new_slot == "first":
            coeffs = stacked.reshape((e, d * nw) + shape)
        else:
            coeffs = np.swapaxes(stacked, 1, 2).reshape((e, nw * d) + shape)
        out = MultilinearField(order, e, d, coeffs)
    field._taylor_cache[key] = out
    return out


def apply_multilinear(F: MultilinearField, y, tensor: np.ndarray) -> np.ndarray:
    """Contract F(y) against a flat level-`order` tensor; returns (e,)."""
    v = np.asarray(tensor, dtype=float).reshape(-1)
    if v.shape[0] != F.d**F.order:
        raise ValueError(
            f"tensor has {v.shape[0]} entries, expected {F.d ** F.order}"
        )
    return F.values(y) @ v


# ---------------------------------------------------------------------------
# boxes and norm estimates


@dataclass(frozen=True)
class Box:
    """Axis-aligned state box with a per-axis lattice sample count."""

    lower: np.ndarray
    upper: np.ndarray
    sample_count: int = 9

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("box bounds must have matching shapes")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")
        if self.sample_count < 2:
            raise ValueError("sample_count must be >= 2")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def inflate(cls, lower, upper, policy: float = 0.1,
                sample_count: int = 9) -> "Box":
        """Push each side outward by `policy` times its own magnitude."""
        lo = np.asarray(lower, dtype=float).reshape(-1)
        hi = np.asarray(upper, dtype=float).reshape(-1)
        return cls(lo - policy * np.abs(lo), hi + policy * np.abs(hi),
                   sample_count)

    def lattice(self) -> np.ndarray:
        """Regular grid, shape (sample_count**e, e)."""
        axes = [
            np.linspace(self.lower[a], self.upper[a], self.sample_count)
            for a in range(self.lower.shape[0])
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass
class SupNormEstimate:
    """Sampled operator-norm maximum plus its pointwise Frobenius upper bound.

    Both are lattice maxima: the Frobenius column dominates the operator
    column at every sample, and both sit below the true supremum over the box
    (they bracket the sampled truth, not the continuum).
    """

    operator_max: float
    frobenius_max: float


def _stack_sup_estimate(stack: np.ndarray, e: int, box: Box) -> SupNormEstimate:
    pts = box.lattice()
    vals = _poly_eval_stack(stack, e, pts)  # (e, M, P)
    vals = np.moveaxis(vals, -1, 0)  # (P, e, M)
    svals = np.linalg.svd(vals, compute_uv=False)
    op = float(svals[:, 0].max()) if svals.size else 0.0
    frob = float(np.sqrt((vals**2).sum(axis=(1, 2))).max()) if vals.size else 0.0
    return SupNormEstimate(operator_max=op, frobenius_max=frob)


def sup_norm_estimate(F: MultilinearField, box: Box) -> SupNormEstimate:
    """Lattice estimate of sup over the box of the operator norm of F(y)."""
    if box.lower.shape[0] != F.e:
        raise ValueError(
            f"box dimension {box.lower.shape[0]} does not match state dim {F.e}"
        )
    return _stack_sup_estimate(F.coeffs, F.e, box)


def _derivative_stack(stack: np.ndarray, e: int) -> np.ndarray:
    """State gradient: (e, M) + poly  ->  (e, M*e) + poly."""
    parts = [_poly_diff(stack, e, b) for b in range(e)]
    shape = _common_shape([p.shape[-e:] for p in parts])
    parts = [_pad_poly(p, e, shape) for p in parts]
    stacked = np.stack(parts, axis=2)  # (e, M, e) + poly
    lead = stacked.shape[0]
    return stacked.reshape((lead, -1) + shape)


def lip_norm_estimate(field: VectorFieldJet, gamma: float, box: Box) -> float:
    """Sampled smoothness norm: sup of derivatives up to floor(gamma), plus
    the (gamma - floor(gamma))-Hoelder quotient of the top derivative over
    sample pairs (Frobenius on pairs).  A lattice estimate, not a certificate.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    e = field.e
    n_levels = int(np.floor(gamma))
    alpha = gamma - n_levels
    columns = []
    stack = field._stack  # (e, d) + poly axes: already an (e, M)-shaped stack
    for _ in range(n_levels + 1):
        columns.append(_stack_sup_estimate(stack, e, box).operator_max)
        top = stack
        stack = _derivative_stack(stack, e)
    # Hoelder quotient of the top retained derivative on a coarse pair lattice.
    pair_box = Box(box.lower, box.upper, sample_count=min(5, box.sample_count))
    pts = pair_box.lattice()
    vals = np.moveaxis(_poly_eval_stack(top, e, pts), -1, 0)  # (P, e, M)
    flat = vals.reshape(vals.shape[0], -1)
    diff = np.sqrt(
        np.maximum(
            (flat**2).sum(1)[:, None]
            + (flat**2).sum(1)[None, :]
            - 2.0 * flat @ flat.T,
            0.0,
        )
    )
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    mask = dist > 0
    if np.any(mask):
        quot = diff[mask] / dist[mask] ** alpha if alpha > 0 else diff[mask]
        columns.append(float(quot.max()))
    return max(columns)


def field_lip1_estimate(F: MultilinearField, box: Box) -> float:
    """Lip(1)-style estimate for a coefficient field: max(sup F, sup DF)."""
    a = _stack_sup_estimate(F.coeffs, F.e, box).operator_max
    b = _stack_sup_estimate(_derivative_stack(F.coeffs, F.e), F.e, box).operator_max
    return max(a, b)
