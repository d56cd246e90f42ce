"""Scalar analytic helpers: fractional factorials, the binomial-type sum
bound for fractional exponents, and the zeta-style series constant used by
the homogeneous remainder estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "gamma_factorial",
    "NeoclassicalSample",
    "neoclassical_check",
    "beta_constant",
]

# Lanczos approximation, g = 7, 9 coefficients.  Relative error is below
# 1e-13 on the range we use (arguments in [1, 51]).
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def _gamma(z: float) -> float:
    """Gamma function for z >= 0.5 via the Lanczos series."""
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += c / (z - 1.0 + i)
    t = z - 1.0 + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z - 0.5) * math.exp(-t) * acc


def gamma_factorial(x: float) -> float:
    """Generalized factorial x! = Gamma(x + 1) for real x >= 0."""
    if x < 0:
        raise ValueError(f"gamma_factorial needs x >= 0, got {x}")
    return _gamma(x + 1.0)


@dataclass
class NeoclassicalSample:
    a: float
    b: float
    n: int
    p: float
    lhs: float
    rhs: float
    ratio: float
    passed: bool


def neoclassical_check(a: float, b: float, n: int, p: float,
                       tol: float = 1e-9) -> NeoclassicalSample:
    """Check the fractional binomial-type sum bound at one sample point.

    lhs = sum_{k=0}^{n} a^(k/p) b^((n-k)/p) / ((k/p)! ((n-k)/p)!)
    rhs = p (a + b)^(n/p) / (n/p)!

    At p = 1 both sides collapse to the plain binomial theorem and the
    ratio is exactly 1/p = 1.
    """
    if a < 0 or b < 0:
        raise ValueError(f"need a, b >= 0, got a={a}, b={b}")
    if n < 0:
        raise ValueError(f"need n >= 0, got {n}")
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    lhs = 0.0
    for k in range(n + 1):
        lhs += (
            a ** (k / p)
            * b ** ((n - k) / p)
            / (gamma_factorial(k / p) * gamma_factorial((n - k) / p))
        )
    rhs = p * (a + b) ** (n / p) / gamma_factorial(n / p)
    ratio = lhs / rhs if rhs > 0 else (0.0 if lhs == 0 else float("inf"))
    return NeoclassicalSample(
        a=a, b=b, n=n, p=p, lhs=lhs, rhs=rhs, ratio=ratio,
        passed=lhs <= rhs * (1.0 + tol),
    )


def beta_constant(p: float, terms: int = 10_000) -> float:
    """Series constant  p * (3 + 2^q * sum_{m >= 3} m^(-q)),  q = (floor(p)+1)/p.

    The sum is evaluated with `terms` explicit terms and an Euler-Maclaurin
    tail correction; for p in [1, 5] the tail error is below 1e-15, far
    inside float precision of the total.
    """
    if p < 1:
        raise ValueError(f"need p >= 1, got {p}")
    if terms < 100:
        raise ValueError(f"need at least 100 explicit terms, got {terms}")
    q = (math.floor(p) + 1.0) / p
    s = 0.0
    # sum smallest-first so accumulation error stays at a few ulp
    for m in range(terms, 2, -1):
        s += m ** (-q)
    a = terms + 1.0
    tail = a ** (1.0 - q) / (q - 1.0) + 0.5 * a ** (-q) + q * a ** (-q - 1.0) / 12.0
    return p * (3.0 + 2.0**q * (s + tail))
