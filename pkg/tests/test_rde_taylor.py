import math

import numpy as np
import pytest

from corpus import random_field, random_path, random_y0
from rough_taylor import (
    PiecewiseLinearPath,
    SolverConvergenceError,
    VectorFieldJet,
    bound_check_1var,
    compensated_riemann_sum,
    control_omega,
    controlled_tuple,
    point_removal_delta,
    remainder,
    signature,
    solve_reference,
    taylor_approx,
    theorem1_profile,
    tuple_remainder,
)


def series_expm(A, terms=40):
    """Test-local matrix exponential by plain power series."""
    out = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


SCALAR_EXP = VectorFieldJet(1, 1, [[{(1,): 1.0}]])
UNIT_LINE = PiecewiseLinearPath([0.0, 1.0], [[0.0], [1.0]])


def test_zero_field_constant_solution():
    f = VectorFieldJet(2, 2, [[{}, {}], [{}, {}]])
    path = random_path(np.random.default_rng(401), d=2)
    sampler = solve_reference(f, path, [0.3, -0.8])
    for t in np.linspace(path.t0, path.t1, 7):
        assert np.allclose(sampler(t), [0.3, -0.8], atol=1e-14)
    res = remainder(f, path, [0.3, -0.8], path.t0, path.t1, 2)
    assert res.value == 0.0 or res.below_floor


def test_scalar_exponential_reference():
    sampler = solve_reference(SCALAR_EXP, UNIT_LINE, [1.0], tol=1e-12)
    for t in (0.25, 0.5, 0.75, 1.0):
        assert sampler(t)[0] == pytest.approx(math.exp(t), abs=1e-10)
    assert sampler.accuracy < 1e-11


def test_scalar_exponential_remainders():
    # truncating the exponential series: remainder = e - sum_{k<=N} 1/k!
    for order in (1, 2, 3, 4):
        res = remainder(SCALAR_EXP, UNIT_LINE, [1.0], 0.0, 1.0, order,
                        tol=1e-12)
        expected = math.e - sum(1.0 / math.factorial(k)
                                for k in range(order + 1))
        assert res.value == pytest.approx(expected, abs=1e-9)


def test_nilpotent_noncommuting_closed_form():
    # strictly upper-triangular pair: all products of length 3 vanish, so the
    # order-2 expansion is exact and the flow is a product of exponentials
    E12 = np.zeros((3, 3))
    E12[0, 1] = 1.0
    E23 = np.zeros((3, 3))
    E23[1, 2] = 1.0
    f = VectorFieldJet.linear([E12, E23])
    h1, h2 = 0.7, -0.4
    path = PiecewiseLinearPath([0.0, 0.5, 1.0],
                               [[0.0, 0.0], [h1, 0.0], [h1, h2]])
    y0 = np.array([0.2, -1.0, 0.5])
    sampler = solve_reference(f, path, y0, tol=1e-12)
    exact = series_expm(h2 * E23) @ series_expm(h1 * E12) @ y0
    assert np.allclose(sampler(1.0), exact, atol=1e-10)

    res = remainder(f, path, y0, 0.0, 1.0, 2, tol=1e-12)
    assert res.below_floor  # order-2 expansion is exact here

    sig = signature(path, 0.0, 1.0, 2)
    approx = taylor_approx(f, y0, sig, 2)
    assert np.allclose(approx, exact, atol=1e-13)


def test_taylor_approx_orders():
    sig = signature(UNIT_LINE, 0.0, 1.0, 3)
    y0 = np.array([1.0])
    assert taylor_approx(SCALAR_EXP, y0, sig, 0)[0] == 1.0
    assert taylor_approx(SCALAR_EXP, y0, sig, 1)[0] == pytest.approx(2.0)
    assert taylor_approx(SCALAR_EXP, y0, sig, 3)[0] == pytest.approx(
        1 + 1 + 0.5 + 1.0 / 6.0)
    with pytest.raises(ValueError):
        taylor_approx(SCALAR_EXP, y0, sig, 4)  # signature too shallow
    with pytest.raises(ValueError):
        taylor_approx(SCALAR_EXP, y0, sig, -1)


def test_remainder_trivial_interval_and_high_order():
    res = remainder(SCALAR_EXP, UNIT_LINE, [1.0], 0.4, 0.4, 3)
    assert res.value == 0.0 and res.below_floor
    res = remainder(SCALAR_EXP, UNIT_LINE, [1.0], 0.0, 1.0, 20, tol=1e-10)
    assert res.below_floor  # 1/21! is far under any solver floor


def test_remainder_order_scaling():
    # remainder of the order-N expansion shrinks like h^(N+1)
    A1 = np.array([[0.5, 0.2], [-0.3, 0.1]])
    A2 = np.array([[0.0, -0.4], [0.6, 0.2]])
    f = VectorFieldJet.linear([A1, A2])
    y0 = [1.0, -0.5]
    hs = [0.4, 0.2, 0.1, 0.05]
    for order in (1, 2, 3):
        vals = []
        for h in hs:
            path = PiecewiseLinearPath([0.0, 0.5, 1.0],
                                       [[0.0, 0.0], [h, 0.0], [h, h]])
            vals.append(remainder(f, path, y0, 0.0, 1.0, order,
                                  tol=1e-13).value)
        slope = np.polyfit(np.log(hs), np.log(vals), 1)[0]
        assert slope == pytest.approx(order + 1, abs=0.2)


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
def test_solver_divergence_reports_segment():
    # quadratic growth blows up inside the third segment
    f = VectorFieldJet(1, 1, [[{(2,): 1.0}]])
    path = PiecewiseLinearPath([0.0, 0.2, 0.4, 1.0],
                               [[0.0], [0.05], [0.1], [2.0]])
    with pytest.raises(SolverConvergenceError) as err:
        solve_reference(f, path, [1.2], tol=1e-10)
    assert err.value.segment == 2
    assert "segment 2" in str(err.value)


def test_sampler_range_box_contains_vertices():
    sampler = solve_reference(SCALAR_EXP, UNIT_LINE, [1.0], tol=1e-10)
    lo, hi = sampler.range_box(0.0, 1.0)
    assert lo[0] <= 1.0 + 1e-12
    assert hi[0] >= math.e - 1e-9
    lo2, hi2 = sampler.range_box(0.3, 0.6)
    assert lo2[0] >= lo[0] - 1e-12 and hi2[0] <= hi[0] + 1e-12


def test_bound_check_scalar_exponential_fixture():
    rep = bound_check_1var(SCALAR_EXP, UNIT_LINE, [1.0], order=2, tol=1e-12)
    assert rep.passed
    assert rep.measured == pytest.approx(math.e - 2.5, abs=1e-9)
    # third coefficient field of f(y)=y is y itself; its sup over the
    # inflated box [1, 1.1 e] gives bound = 1.1 e * 1^3 / 3!
    assert rep.bound == pytest.approx(1.1 * math.e / 6.0, rel=1e-9)


def test_bound_check_zero_field():
    f = VectorFieldJet(1, 1, [[{}]])
    rep = bound_check_1var(f, UNIT_LINE, [0.7], order=1)
    assert rep.passed
    assert rep.measured == 0.0
    assert rep.bound == 0.0
    assert rep.slack_ratio == 0.0


def test_bound_check_random_corpus_small():
    rng = np.random.default_rng(419)
    for _ in range(8):
        e = int(rng.integers(1, 3))
        d = int(rng.integers(1, 3))
        f = random_field(rng, e=e, d=d, coeff_scale=0.7)
        path = random_path(rng, d=d, max_vertices=8, target_var=0.8)
        y0 = random_y0(rng, e, scale=0.3)
        sampler = solve_reference(f, path, y0, tol=1e-10)
        for order in (1, 2, 3):
            rep = bound_check_1var(f, path, y0, order=order, sampler=sampler)
            assert rep.passed, (rep.measured, rep.bound, rep.note)


def test_profile_rejects_bad_exponents():
    with pytest.raises(ValueError):
        theorem1_profile(SCALAR_EXP, UNIT_LINE, [1.0], 2.0, 1.0,
                         [0.0, 0.5, 1.0])  # gamma <= p - 1
    res = theorem1_profile(SCALAR_EXP, UNIT_LINE, [1.0], 1.0, 2.0, [])
    assert res.n_used == 0 and res.reports == []


def test_profile_scalar_consistency():
    grid = np.concatenate(([0.0], 1.0 / 2.0 ** np.arange(5, -1, -1)))
    res = theorem1_profile(SCALAR_EXP, UNIT_LINE, [1.0], 1.0, 2.0, grid,
                           tol=1e-12)
    assert res.n_used > 0
    assert res.c_hat > 0
    # every usable row is covered at the fitted constant by construction
    for rep in res.reports:
        assert rep.passed
    # order-2 remainder against omega^2 control: local slope is 3
    assert res.slope > 2.5


def test_controlled_tuple_scalar_closed_form():
    # f = a y: order-m coefficient field along the flow is a^m Y_t
    a = 0.8
    f = VectorFieldJet(1, 1, [[{(1,): a}]])
    grid = np.linspace(0.0, 1.0, 9)
    tup = controlled_tuple(f, UNIT_LINE, [1.0], 3.0, grid, tol=1e-12)
    for m in (0, 1, 2, 3):
        for t in (0.0, 0.375, 1.0):
            v = tup.value(m, t)
            assert v.shape == (1, 1)
            assert v[0, 0] == pytest.approx(a**m * math.exp(a * t), abs=1e-9)


def test_tuple_remainder_closed_form():
    a = 1.1
    f = VectorFieldJet(1, 1, [[{(1,): a}]])
    grid = np.linspace(0.0, 1.0, 9)
    tup = controlled_tuple(f, UNIT_LINE, [1.0], 3.0, grid, tol=1e-12)
    s, t = 0.25, 0.875
    delta = t - s
    for m in (0, 1, 2, 3):
        got = tuple_remainder(tup, UNIT_LINE, 1.0, m, s, t)
        L = 3 - m
        partial = sum((a * delta) ** l / math.factorial(l) for l in range(L + 1))
        expected = abs(a**m * (math.exp(a * t) - math.exp(a * s) * partial))
        assert got == pytest.approx(expected, abs=1e-8)


def test_compensated_sum_trivial_partition_vanishes():
    rng = np.random.default_rng(431)
    f = random_field(rng, e=2, d=2, coeff_scale=0.6)
    path = random_path(rng, d=2, max_vertices=6, target_var=0.7)
    y0 = random_y0(rng, 2, scale=0.3)
    grid = np.linspace(path.t0, path.t1, 9)
    tup = controlled_tuple(f, path, y0, 3.0, grid, tol=1e-10)
    for k in (0, 1, 2):
        cs = compensated_riemann_sum(tup, path, k,
                                     [path.t0, path.t1])
        assert np.max(np.abs(cs.value)) == 0.0


def test_compensated_sum_partition_invariance():
    rng = np.random.default_rng(433)
    f = random_field(rng, e=2, d=2, coeff_scale=0.6)
    path = random_path(rng, d=2, max_vertices=6, target_var=0.7)
    y0 = random_y0(rng, 2, scale=0.3)
    grid = np.linspace(path.t0, path.t1, 13)
    tup = controlled_tuple(f, path, y0, 3.0, grid, tol=1e-10)
    for k in (0, 1):
        parts = []
        for step in (1, 2, 3, 4):
            P = np.concatenate((grid[::step], [grid[-1]]))
            parts.append(compensated_riemann_sum(tup, path, k,
                                                 np.unique(P)).algebraic)
        scale = max(1.0, float(np.max(np.abs(parts[0]))))
        for other in parts[1:]:
            assert np.max(np.abs(other - parts[0])) < 1e-12 * scale


def test_point_removal_identity():
    rng = np.random.default_rng(439)
    f = random_field(rng, e=2, d=2, coeff_scale=0.6)
    path = random_path(rng, d=2, max_vertices=5, target_var=0.7)
    y0 = random_y0(rng, 2, scale=0.3)
    grid = np.linspace(path.t0, path.t1, 9)
    tup = controlled_tuple(f, path, y0, 3.0, grid, tol=1e-10)
    P = grid[::2]
    for k in (0, 1):
        full = compensated_riemann_sum(tup, path, k, P)
        for j in range(1, P.shape[0] - 1):
            delta = point_removal_delta(tup, path, k, P, j)
            rest = compensated_riemann_sum(tup, path, k, np.delete(P, j))
            scale = max(1.0, float(np.max(np.abs(full.value))))
            assert np.max(np.abs((full.value - rest.value) - delta)) < \
                1e-12 * scale


def test_compensated_sum_refinement_limit():
    # as the partition refines, the order-k sum converges to the order-k
    # tuple increment minus its expansion -- check the defect shrinks
    a = 0.9
    f = VectorFieldJet(1, 1, [[{(1,): a}]])
    grid = np.linspace(0.0, 1.0, 65)
    tup = controlled_tuple(f, UNIT_LINE, [1.0], 3.0, grid, tol=1e-12)
    target = tuple_remainder(tup, UNIT_LINE, 1.0, 0, 0.0, 1.0)
    gaps = []
    for step in (32, 8, 2):
        P = grid[::step]
        cs = compensated_riemann_sum(tup, UNIT_LINE, 0, P)
        gaps.append(abs(abs(float(cs.value[0, 0])) - target))
    assert gaps[2] < gaps[0]
    assert gaps[2] < 1e-4


def test_tuple_validation():
    f = VectorFieldJet(1, 1, [[{(1,): 1.0}]])
    with pytest.raises(ValueError):
        controlled_tuple(f, UNIT_LINE, [1.0], 0.5, [0.0, 1.0])
    with pytest.raises(ValueError):
        controlled_tuple(f, UNIT_LINE, [1.0], 2.0, [0.3])
    grid = np.linspace(0.0, 1.0, 5)
    tup = controlled_tuple(f, UNIT_LINE, [1.0], 2.0, grid)
    with pytest.raises(ValueError):
        tup.value(0, 0.1)  # not a grid time
    with pytest.raises(ValueError):
        tuple_remainder(tup, UNIT_LINE, 1.0, 5, 0.0, 1.0)
    with pytest.raises(ValueError):
        compensated_riemann_sum(tup, UNIT_LINE, 2, grid)  # k too deep
