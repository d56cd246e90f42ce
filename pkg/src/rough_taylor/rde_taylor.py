"""Reference solutions, Taylor approximants, and remainder verification.

The controlled equation dY = f(Y) dX along a piecewise-linear driver reduces,
on each segment, to an autonomous ODE with constant direction.  A classical
4th-order one-step method with per-segment substep doubling supplies the
reference solution; its Richardson error estimate sets the "solver floor"
below which measured remainders are indistinguishable from zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .path_signature import PiecewiseLinearPath, signature
from .reports import BoundReport, make_bound_report
from .tensor_algebra import TruncatedTensor, project
from .vector_field import (
    Box,
    VectorFieldJet,
    _poly_eval_stack,
    apply_multilinear,
    field_lip1_estimate,
    lip_norm_estimate,
    sup_norm_estimate,
    taylor_coefficient,
)

__all__ = [
    "SolverConvergenceError",
    "SolutionSampler",
    "RemainderResult",
    "ProfileResult",
    "ControlledTuple",
    "CompensatedSum",
    "solve_reference",
    "taylor_approx",
    "remainder",
    "bound_check_1var",
    "theorem1_profile",
    "controlled_tuple",
    "tuple_remainder",
    "compensated_riemann_sum",
    "point_removal_delta",
]


class SolverConvergenceError(RuntimeError):
    """Raised when substep doubling hits its cap without converging."""

    def __init__(self, segment: int, message: str):
        super().__init__(message)
        self.segment = segment


@dataclass
class SolutionSampler:
    """Dense reference solution with cubic-Hermite interpolation per node gap."""

    path: PiecewiseLinearPath
    field: VectorFieldJet
    y0: np.ndarray
    accuracy: float
    tol: float
    _seg_times: list = dc_field(repr=False, default_factory=list)
    _seg_values: list = dc_field(repr=False, default_factory=list)
    _seg_derivs: list = dc_field(repr=False, default_factory=list)

    def __call__(self, t: float) -> np.ndarray:
        self.path._check_time(t)
        t = min(max(t, self.path.t0), self.path.t1)
        j = int(np.searchsorted(self.path.times, t, side="right") - 1)
        j = min(max(j, 0), len(self.path.times) - 2)
        times = self._seg_times[j]
        ys = self._seg_values[j]
        ds = self._seg_derivs[j]
        i = int(np.searchsorted(times, t, side="right") - 1)
        i = min(max(i, 0), len(times) - 2)
        h = times[i + 1] - times[i]
        w = (t - times[i]) / h
        h00 = (1.0 + 2.0 * w) * (1.0 - w) ** 2
        h10 = w * (1.0 - w) ** 2
        h01 = w**2 * (3.0 - 2.0 * w)
        h11 = w**2 * (w - 1.0)
        return h00 * ys[i] + h10 * h * ds[i] + h01 * ys[i + 1] + h11 * h * ds[i + 1]

    def range_box(self, s: float, t: float):
        """Componentwise min/max of the stored solution nodes over [s, t]."""
        lo = None
        hi = None
        for times, ys in zip(self._seg_times, self._seg_values):
            mask = (times >= s) & (times <= t)
            if not np.any(mask):
                continue
            block = ys[mask]
            blo, bhi = block.min(axis=0), block.max(axis=0)
            lo = blo if lo is None else np.minimum(lo, blo)
            hi = bhi if hi is None else np.maximum(hi, bhi)
        ends = np.vstack([self(s), self(t)])
        elo, ehi = ends.min(axis=0), ends.max(axis=0)
        lo = elo if lo is None else np.minimum(lo, elo)
        hi = ehi if hi is None else np.maximum(hi, ehi)
        return lo, hi


def _rk4_segment(g_stack, e, y, t0, t1, n, record):
    """Integrate dy/du = g(y) over [t0, t1] with n classical 4th-order steps."""
    h = (t1 - t0) / n
    if record:
        times = np.linspace(t0, t1, n + 1)
        ys = np.empty((n + 1, e))
        ds = np.empty((n + 1, e))
        ys[0] = y

    def g(v):
        return _poly_eval_stack(g_stack, e, v)

    for i in range(n):
        k1 = g(y)
        k2 = g(y + 0.5 * h * k1)
        k3 = g(y + 0.5 * h * k2)
        k4 = g(y + h * k3)
        if record:
            ds[i] = k1
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if record:
            ys[i + 1] = y
    if not np.all(np.isfinite(y)):
        raise FloatingPointError
    if record:
        ds[n] = g(y)
        return y, (times, ys, ds)
    return y, None


def solve_reference(field: VectorFieldJet, path: PiecewiseLinearPath, y0,
                    tol: float = 1e-10, min_substeps: int = 4,
                    max_substeps: int = 2**20) -> SolutionSampler:
    """Reference solve of dY = f(Y) dX, vertex-converged to tol/10.

    Substeps per segment double until two successive passes agree below
    tol/10 at every vertex time; the final Richardson estimate (disagreement
    divided by 2^4 - 1) becomes the sampler's accuracy field.
    """
    y0 = np.asarray(y0, dtype=float).reshape(-1)
    if y0.shape[0] != field.e:
        raise ValueError(
            f"y0 has {y0.shape[0]} components, field expects {field.e}"
        )
    if field.d != path.dim:
        raise ValueError(
            f"field drives {field.d} directions, path has {path.dim}"
        )
    if tol <= 0:
        raise ValueError("tol must be positive")
    times = path.times
    n_seg = len(times) - 1
    g_stacks = []
    for j in range(n_seg):
        dt = times[j + 1] - times[j]
        v = (path.points[j + 1] - path.points[j]) / dt
        g_stacks.append(field.directional_stack(v))

    def sweep(n, record):
        y = y0.copy()
        vertex_vals = [y.copy()]
        dense = []
        for j in range(n_seg):
            try:
                y, data = _rk4_segment(
                    g_stacks[j], field.e, y, times[j], times[j + 1], n, record
                )
            except FloatingPointError:
                raise SolverConvergenceError(
                    j,
                    f"reference solve diverged on segment {j} "
                    f"([{times[j]}, {times[j + 1]}]) with {n} substeps",
                ) from None
            vertex_vals.append(y.copy())
            dense.append(data)
        return np.vstack(vertex_vals), dense

    n = max(2, int(min_substeps))
    prev, _ = sweep(n, record=False)
    while True:
        n *= 2
        cur, dense = sweep(n, record=True)
        diffs = np.linalg.norm(cur - prev, axis=1)
        worst = float(diffs.max())
        if worst < tol / 10.0:
            break
        if n >= max_substeps:
            seg = int(np.argmax(diffs[1:]))
            raise SolverConvergenceError(
                seg,
                f"no convergence below {tol / 10.0:g} after {n} substeps per "
                f"segment; worst vertex disagreement {worst:g} after segment {seg}",
            )
        prev = cur
    sampler = SolutionSampler(
        path=path,
        field=field,
        y0=y0,
        accuracy=worst / 15.0,
        tol=tol,
    )
    sampler._seg_times = [d[0] for d in dense]
    sampler._seg_values = [d[1] for d in dense]
    sampler._seg_derivs = [d[2] for d in dense]
    return sampler


# ---------------------------------------------------------------------------
# Taylor approximants and the exact-at-p=1 bound


def taylor_approx(field: VectorFieldJet, y_s, sig: TruncatedTensor,
                  order: int, new_slot: str = "first") -> np.ndarray:
    """y_s plus the first `order` coefficient-field contractions of the
    signature; order 0 returns y_s unchanged."""
    if order < 0:
        raise ValueError(f"order must be >= 0, got {order}")
    if sig.depth < order:
        raise ValueError(
            f"signature depth {sig.depth} below requested order {order}"
        )
    y = np.asarray(y_s, dtype=float).reshape(-1).copy()
    for k in range(1, order + 1):
        F = taylor_coefficient(field, k, new_slot)
        y += apply_multilinear(F, y_s, project(sig, k))
    return y


@dataclass
class RemainderResult:
    value: float
    solver_accuracy: float
    below_floor: bool


def remainder(field: VectorFieldJet, path: PiecewiseLinearPath, y0,
              s: float, t: float, order: int, tol: float = 1e-10,
              sampler: SolutionSampler = None,
              new_slot: str = "first") -> RemainderResult:
    """Distance between the reference solution at t and the order-`order`
    Taylor approximant started at s.  Values within 100x the solver accuracy
    are flagged below_floor: they are indistinguishable from zero.
    """
    if s > t:
        raise ValueError(f"need s <= t, got s={s}, t={t}")
    if sampler is None:
        sampler = solve_reference(field, path, y0, tol=tol)
    if s == t:
        return RemainderResult(0.0, sampler.accuracy, True)
    sig = signature(path, s, t, order)
    approx = taylor_approx(field, sampler(s), sig, order, new_slot)
    gap = float(np.linalg.norm(sampler(t) - approx))
    floor = 100.0 * sampler.accuracy
    return RemainderResult(gap, sampler.accuracy, gap <= floor)


def bound_check_1var(field: VectorFieldJet, path: PiecewiseLinearPath, y0,
                     s: float = None, t: float = None, order: int = 1,
                     tol: float = 1e-10, box_policy: float = 0.1,
                     sample_count: int = 9,
                     sampler: SolutionSampler = None) -> BoundReport:
    """Exact-decay check for bounded-variation drivers.

    Iterating the equation N+1 times writes the order-N remainder exactly as
    the order-(N+1) coefficient field, evaluated along the solution,
    integrated over the (N+1)-simplex of the driver.  Hence

        bound = sup ||coefficient field order N+1|| * |X|_{1-var}^(N+1) / (N+1)!

    with the sup taken over the inflated trajectory box lattice together with
    direct samples of the trajectory (the integrand lives on the flow, and a
    coarse lattice alone can dip under its maximum between planes).
    Pass iff measured <= bound * (1 + 1e-9); rows below the solver floor pass
    with an explanatory note instead of being asserted.
    """
    from .variation import one_variation

    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    s = path.t0 if s is None else s
    t = path.t1 if t is None else t
    if sampler is None:
        sampler = solve_reference(field, path, y0, tol=tol)
    rem = remainder(field, path, y0, s, t, order, tol=tol, sampler=sampler)
    lo, hi = sampler.range_box(s, t)
    box = Box.inflate(lo, hi, box_policy, sample_count)
    FN1 = taylor_coefficient(field, order + 1)
    box_est = sup_norm_estimate(FN1, box)
    traj = np.vstack([sampler(u) for u in np.linspace(s, t, 33)])
    tvals = np.moveaxis(_poly_eval_stack(FN1.coeffs, field.e, traj), -1, 0)
    traj_op = float(np.linalg.svd(tvals, compute_uv=False)[:, 0].max())
    sup_next = max(box_est.operator_max, traj_op)
    v1 = one_variation(path, s, t)
    bound = sup_next * v1 ** (order + 1) / math.factorial(order + 1)
    rep = make_bound_report(
        rem.value,
        bound,
        tol=1e-9,
        params={
            "s": float(s),
            "t": float(t),
            "order": int(order),
            "box_lo": box.lower.tolist(),
            "box_hi": box.upper.tolist(),
            "one_variation": v1,
            "next_coeff_sup": sup_next,
            "next_coeff_box_sup": box_est.operator_max,
            "next_coeff_traj_sup": traj_op,
            "solver_accuracy": rem.solver_accuracy,
        },
    )
    if rem.below_floor:
        rep.passed = True
        rep.note = "below solver floor"
    return rep


# ---------------------------------------------------------------------------
# fitted-constant profile for the general p >= 1 estimate


@dataclass
class ProfileResult:
    reports: list
    c_hat: float
    slope: float
    n_used: int
    constants: dict


def theorem1_profile(field: VectorFieldJet, path: PiecewiseLinearPath, y0,
                     p: float, gamma: float, grid, tol: float = 1e-10,
                     box_policy: float = 0.1, sample_count: int = 9,
                     sampler: SolutionSampler = None) -> ProfileResult:
    """Fit the single unknown constant of the homogeneous remainder estimate.

    For every grid pair s < t the measured remainder at order floor(gamma) is
    compared against the structural factor

        S(s, t) = beta(p)^floor(gamma) / (floor(gamma)/p)!
                  * 2 * (smoothness norm of f  v 1)^(floor(p)+1)
                  * (p-variation of X over the whole span  v 1)^(p+1)
                  * max_m Lip(1) estimate of coefficient fields m
                  * omega(s, t)^(gamma/p)

    and the fitted constant is the max of measured/S over usable rows (rows
    below the solver floor or with zero omega are excluded from the fit).
    The log-log slope of measured against omega is fitted alongside.
    """
    from .inequalities import beta_constant, gamma_factorial
    from .variation import control_omega, homogeneous_p_variation

    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if gamma <= p - 1:
        raise ValueError(
            f"the estimate needs gamma > p - 1, got gamma={gamma}, p={p}"
        )
    grid = np.unique(np.asarray(grid, dtype=float).reshape(-1))
    if grid.shape[0] < 2:
        return ProfileResult([], 0.0, float("nan"), 0, {})
    N = int(math.floor(gamma))
    pfloor = int(math.floor(p))
    if sampler is None:
        sampler = solve_reference(field, path, y0, tol=tol)

    lo, hi = sampler.range_box(float(grid[0]), float(grid[-1]))
    box = Box.inflate(lo, hi, box_policy, sample_count)
    lip_f = lip_norm_estimate(field, gamma, box)
    m_lo = max(1, N - pfloor + 1)
    lip1_coeff = max(
        field_lip1_estimate(taylor_coefficient(field, m), box)
        for m in range(m_lo, N + 1)
    )
    xvar = homogeneous_p_variation(path, p, float(grid[0]), float(grid[-1]),
                                   grid=grid).value
    beta = beta_constant(p)
    prefactor = (
        beta**N
        / gamma_factorial(N / p)
        * 2.0
        * max(lip_f, 1.0) ** (pfloor + 1)
        * max(xvar, 1.0) ** (p + 1)
        * lip1_coeff
    )
    omega = control_omega(path, p, grid=grid)

    rows = []
    for i in range(grid.shape[0] - 1):
        for j in range(i + 1, grid.shape[0]):
            s, t = float(grid[i]), float(grid[j])
            rem = remainder(field, path, y0, s, t, N, tol=tol, sampler=sampler)
            w = omega(s, t)
            S = prefactor * w ** (gamma / p) if w > 0 else 0.0
            usable = (not rem.below_floor) and w > 0 and rem.value > 0
            rows.append((s, t, rem, w, S, usable))

    usable_rows = [r for r in rows if r[5]]
    n_used = len(usable_rows)
    c_hat = max((r[2].value / r[4] for r in usable_rows), default=0.0)
    if n_used >= 2:
        lw = np.log([r[3] for r in usable_rows])
        lm = np.log([r[2].value for r in usable_rows])
        slope, _ = np.polyfit(lw, lm, 1)
        slope = float(slope)
    else:
        slope = float("nan")

    m_const = (
        2.0
        * c_hat
        * max(lip_f, 1.0) ** (pfloor + 1)
        * max(xvar, 1.0) ** (p + 1)
    )
    reports = []
    for s, t, rem, w, S, usable in rows:
        rep = make_bound_report(
            rem.value,
            c_hat * S,
            tol=1e-9,
            params={
                "s": s,
                "t": t,
                "order": N,
                "omega": w,
                "structural_factor": S,
                "box_lo": box.lower.tolist(),
                "box_hi": box.upper.tolist(),
                "p": p,
                "gamma": gamma,
                "M_constant": m_const,
                "solver_accuracy": rem.solver_accuracy,
            },
        )
        if not usable:
            rep.passed = True
            rep.note = ("below solver floor" if rem.below_floor
                        else "degenerate interval")
        reports.append(rep)
    constants = {
        "beta": beta,
        "lip_f": lip_f,
        "lip1_coeff": lip1_coeff,
        "x_pvar": xvar,
        "prefactor": prefactor,
        "M_constant": m_const,
    }
    return ProfileResult(reports, float(c_hat), slope, n_used, constants)


# ---------------------------------------------------------------------------
# controlled tuples and compensated sums


def _contract_first(V: np.ndarray, x: np.ndarray, d: int) -> np.ndarray:
    """Contract the first `l` word slots of V (e, d^(l+r)) with x (d^l,)."""
    nl = x.shape[0]
    e = V.shape[0]
    rest = V.shape[1] // nl
    return np.einsum("auw,u->aw", V.reshape(e, nl, rest), x)


@dataclass
class ControlledTuple:
    """Grid samples of the coefficient-field hierarchy along the solution.

    values[m] has shape (G, e, d^m): entry g is the order-m coefficient field
    evaluated at the reference solution at grid time g (order 0 is the
    solution itself).
    """

    field: VectorFieldJet
    path: PiecewiseLinearPath
    gamma: float
    grid: np.ndarray
    values: dict
    sampler: SolutionSampler

    def index_of(self, t: float) -> int:
        hits = np.nonzero(np.isclose(self.grid, t, rtol=0.0, atol=1e-12))[0]
        if hits.shape[0] != 1:
            raise ValueError(f"time {t} is not a tuple grid point")
        return int(hits[0])

    def value(self, m: int, t: float) -> np.ndarray:
        if m not in self.values:
            raise ValueError(f"tuple holds orders 0..{max(self.values)}, got {m}")
        return self.values[m][self.index_of(t)]


def controlled_tuple(field: VectorFieldJet, path: PiecewiseLinearPath, y0,
                     gamma: float, grid, tol: float = 1e-10,
                     sampler: SolutionSampler = None,
                     new_slot: str = "first") -> ControlledTuple:
    """Sample coefficient fields of orders 0..floor(gamma) on a time grid."""
    if gamma < 1:
        raise ValueError(f"gamma must be >= 1, got {gamma}")
    grid = np.unique(np.asarray(grid, dtype=float).reshape(-1))
    if grid.shape[0] < 2:
        raise ValueError("tuple grid needs at least two times")
    if sampler is None:
        sampler = solve_reference(field, path, y0, tol=tol)
    Y = np.vstack([sampler(t) for t in grid])
    values = {0: Y[:, :, None]}
    for m in range(1, int(math.floor(gamma)) + 1):
        F = taylor_coefficient(field, m, new_slot)
        values[m] = F.values_many(Y)
    return ControlledTuple(field, path, float(gamma), grid, values, sampler)


def tuple_remainder(tup: ControlledTuple, path: PiecewiseLinearPath, p: float,
                    m: int, s: float, t: float, left_at_t: bool = True) -> float:
    """Defect of the order-m tuple expansion between grid times s <= t.

    Compares the order-m value at the far time against the signature
    expansion around s through order floor(gamma) - m.  `left_at_t=False`
    evaluates the left side at s instead (the printed-variant cross-check;
    the expansion-point structure forces the far time, which is the default).
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    N = int(math.floor(tup.gamma))
    if not 0 <= m <= N:
        raise ValueError(f"m must lie in 0..{N}, got {m}")
    if s > t:
        raise ValueError(f"need s <= t, got s={s}, t={t}")
    L = N - m
    sig = signature(path, s, t, L)
    acc = np.zeros_like(tup.value(m, s).reshape(tup.field.e, -1))
    for l in range(L + 1):
        V = tup.value(l + m, s).reshape(tup.field.e, -1)
        acc += _contract_first(V, project(sig, l), tup.field.d)
    left_time = t if left_at_t else s
    left = tup.value(m, left_time).reshape(tup.field.e, -1)
    return float(np.linalg.norm(left - acc))


@dataclass
class CompensatedSum:
    """Compensated sum over one partition plus its algebraic part.

    The algebraic part is assembled from the same partition data (triple sum)
    but is mathematically partition-independent; comparing it across
    partitions, or against the direct expansion around s, is the telescoping
    cross-check.
    """

    value: np.ndarray
    algebraic: np.ndarray


def _expansion_defect(tup: ControlledTuple, order: int, base: float,
                      at: float, depth: int) -> np.ndarray:
    """order-`order` value at `at` minus its expansion around `base`."""
    e = tup.field.e
    sig = signature(tup.path, base, at, depth)
    acc = np.zeros((e, tup.field.d**order))
    for l1 in range(depth + 1):
        V = tup.value(order + l1, base).reshape(e, -1)
        acc += _contract_first(V, project(sig, l1), tup.field.d)
    return tup.value(order, at).reshape(e, -1) - acc


def compensated_riemann_sum(tup: ControlledTuple, path: PiecewiseLinearPath,
                            k: int, partition) -> CompensatedSum:
    """Compensated sum at tensor order k over the given partition.

    Each partition interval contributes the expansion defects of the higher
    coefficient orders at its left end, contracted against the interval's
    signature levels; the algebraic part re-adds the subtracted expansions.
    """
    N = int(math.floor(tup.gamma))
    K = N - k
    if k < 0 or K < 1:
        raise ValueError(
            f"order k must lie in 0..{N - 1} so the sum is nonempty, got {k}"
        )
    P = np.asarray(partition, dtype=float).reshape(-1)
    if P.shape[0] < 2 or not np.all(np.diff(P) > 0):
        raise ValueError("partition must be >= 2 strictly increasing times")
    s = float(P[0])
    e, d = tup.field.e, tup.field.d
    value = np.zeros((e, d**k))
    algebraic = np.zeros((e, d**k))
    for i in range(P.shape[0] - 1):
        ti, tj = float(P[i]), float(P[i + 1])
        inc = signature(path, ti, tj, K)
        base = signature(path, s, ti, K)
        for l in range(1, K + 1):
            xl = project(inc, l)
            defect = _expansion_defect(tup, k + l, s, ti, K - l)
            value += _contract_first(defect, xl, d)
            for l1 in range(K - l + 1):
                V = tup.value(k + l + l1, s).reshape(e, -1)
                partial = _contract_first(V, project(base, l1), d)
                algebraic += _contract_first(partial, xl, d)
    return CompensatedSum(value=value, algebraic=algebraic)


def point_removal_delta(tup: ControlledTuple, path: PiecewiseLinearPath,
                        k: int, partition, j: int) -> np.ndarray:
    """Change of the compensated sum when interior point t_j is removed.

    Equals the local expansion defect at t_j (around t_{j-1}) contracted
    against the following interval's signature levels — the identity behind
    the one-point coarsening step.
    """
    N = int(math.floor(tup.gamma))
    K = N - k
    if k < 0 or K < 1:
        raise ValueError(
            f"order k must lie in 0..{N - 1} so the sum is nonempty, got {k}"
        )
    P = np.asarray(partition, dtype=float).reshape(-1)
    if not 0 < j < P.shape[0] - 1:
        raise ValueError(f"j must index an interior partition point, got {j}")
    e, d = tup.field.e, tup.field.d
    out = np.zeros((e, d**k))
    inc = signature(path, float(P[j]), float(P[j + 1]), K)
    for l in range(1, K + 1):
        defect = _expansion_defect(tup, k + l, float(P[j - 1]), float(P[j]),
                                   K - l)
        out += _contract_first(defect, project(inc, l), d)
    return out
