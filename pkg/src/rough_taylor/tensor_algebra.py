"""Truncated tensor-series arithmetic.

Elements live in the truncation of 1 + R^d + (R^d)^x2 + ... at a fixed depth N.
Level k is stored as a dense float array of d**k coefficients in lexicographic
word order: the word (i_1, ..., i_k) sits at flat index
i_1*d**(k-1) + ... + i_k (0-based letters).  Concatenation of words is then
plain index arithmetic, which keeps the product a per-level outer product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TruncatedTensor",
    "unit_tensor",
    "truncated_mul",
    "truncated_inverse",
    "segment_exp",
    "homogeneous_norm",
    "project",
]


@dataclass(frozen=True)
class TruncatedTensor:
    """Dense truncated tensor series.

    levels[k] has shape (dim**k,); levels[0] is the scalar part with shape (1,).
    Instances are treated as immutable; operations return new objects.
    """

    dim: int
    depth: int
    levels: tuple

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth}")
        if len(self.levels) != self.depth + 1:
            raise ValueError(
                f"expected {self.depth + 1} levels, got {len(self.levels)}"
            )
        lv = []
        for k, arr in enumerate(self.levels):
            a = np.asarray(arr, dtype=float).reshape(-1)
            if a.shape[0] != self.dim**k:
                raise ValueError(
                    f"level {k} must have {self.dim ** k} entries, got {a.shape[0]}"
                )
            lv.append(a)
        object.__setattr__(self, "levels", tuple(lv))

    @property
    def scalar(self) -> float:
        return float(self.levels[0][0])


def unit_tensor(dim: int, depth: int) -> TruncatedTensor:
    """Multiplicative unit: scalar part 1, everything above zero."""
    levels = [np.zeros(dim**k) for k in range(depth + 1)]
    levels[0][0] = 1.0
    return TruncatedTensor(dim, depth, tuple(levels))


def _check_compatible(a: TruncatedTensor, b: TruncatedTensor):
    if a.dim != b.dim or a.depth != b.depth:
        raise ValueError(
            f"incompatible operands: (dim={a.dim}, depth={a.depth}) vs "
            f"(dim={b.dim}, depth={b.depth})"
        )


def _add(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    _check_compatible(a, b)
    return TruncatedTensor(
        a.dim, a.depth, tuple(x + y for x, y in zip(a.levels, b.levels))
    )


def truncated_mul(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Concatenation (tensor) product, discarding levels above the truncation.

    Level k of the result is sum_j a_j (x) b_{k-j}; with flat lexicographic
    storage each term is an outer product raveled in C order.
    """
    _check_compatible(a, b)
    out = []
    for k in range(a.depth + 1):
        acc = np.zeros(a.dim**k)
        for j in range(k + 1):
            acc += np.outer(a.levels[j], b.levels[k - j]).ravel()
        out.append(acc)
    return TruncatedTensor(a.dim, a.depth, tuple(out))


def truncated_inverse(x: TruncatedTensor) -> TruncatedTensor:
    """Inverse of a series with scalar part 1 via the terminating Neumann sum.

    With y = 1 - x nilpotent (no scalar part), x^-1 = sum_{k<=depth} y^k exactly.
    """
    if abs(x.scalar - 1.0) > 1e-12:
        raise ValueError(f"scalar part must be 1 to invert, got {x.scalar!r}")
    one = unit_tensor(x.dim, x.depth)
    y = TruncatedTensor(
        x.dim,
        x.depth,
        tuple(
            (one.levels[k] - x.levels[k]) for k in range(x.depth + 1)
        ),
    )
    acc = one
    power = one
    for _ in range(x.depth):
        power = truncated_mul(power, y)
        acc = _add(acc, power)
    return acc


def segment_exp(increment: np.ndarray, depth: int) -> TruncatedTensor:
    """Tensor exponential of a single linear segment: level k = inc^(x k) / k!."""
    inc = np.asarray(increment, dtype=float).reshape(-1)
    d = inc.shape[0]
    if d < 1:
        raise ValueError("increment must have at least one component")
    levels = [np.ones(1)]
    for k in range(1, depth + 1):
        levels.append(np.outer(levels[-1], inc).ravel() / k)
    return TruncatedTensor(d, depth, tuple(levels))


def homogeneous_norm(x: TruncatedTensor) -> float:
    """max over k >= 1 of ||level k||_2^(1/k) (Euclidean norm per level)."""
    if x.depth < 1:
        raise ValueError("homogeneous norm needs depth >= 1")
    return max(
        float(np.linalg.norm(x.levels[k])) ** (1.0 / k)
        for k in range(1, x.depth + 1)
    )


def project(x: TruncatedTensor, level: int) -> np.ndarray:
    """Level accessor (copy), bounds-checked."""
    if not 0 <= level <= x.depth:
        raise ValueError(f"level {level} outside [0, {x.depth}]")
    return x.levels[level].copy()
