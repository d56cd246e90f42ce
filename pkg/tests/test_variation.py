import numpy as np
import pytest

from corpus import random_path
from rough_taylor import (
    PiecewiseLinearPath,
    brute_force_pvar,
    control_omega,
    homogeneous_p_variation,
    one_variation,
    p_variation_level1,
)


def test_dp_matches_brute_force():
    rng = np.random.default_rng(211)
    for _ in range(40):
        path = random_path(rng, max_vertices=10)
        for p in (1.0, 1.5, 2.0, 2.7):
            dp = p_variation_level1(path, p)
            brute = brute_force_pvar(path, p)
            assert dp.value == pytest.approx(brute.value, abs=1e-12)
            assert dp.exact and brute.exact


def test_monotone_one_dim_is_total_displacement():
    path = PiecewiseLinearPath([0.0, 0.2, 0.7, 1.0],
                               [[0.0], [0.5], [1.1], [2.0]])
    for p in (1.0, 2.0, 3.0):
        res = p_variation_level1(path, p)
        assert res.value == pytest.approx(2.0, abs=1e-14)
        # a single increment attains it
        assert np.allclose(res.optimal_partition[[0, -1]], [0.0, 1.0])


def test_zigzag_values():
    zig = PiecewiseLinearPath([0.0, 0.5, 1.0], [[0.0], [1.0], [0.0]])
    assert p_variation_level1(zig, 2.0).value == pytest.approx(
        np.sqrt(2.0), abs=1e-14)
    assert p_variation_level1(zig, 3.0).value == pytest.approx(
        2.0 ** (1.0 / 3.0), abs=1e-14)
    assert p_variation_level1(zig, 1.0).value == pytest.approx(2.0, abs=1e-14)
    assert one_variation(zig) == pytest.approx(2.0, abs=1e-14)


def test_one_variation_additive():
    rng = np.random.default_rng(223)
    for _ in range(10):
        path = random_path(rng)
        s, t, u = np.sort(rng.uniform(path.t0, path.t1, size=3))
        assert one_variation(path, s, t) + one_variation(path, t, u) == \
            pytest.approx(one_variation(path, s, u), abs=1e-12)


def test_subinterval_and_degenerate():
    path = PiecewiseLinearPath([0.0, 1.0, 2.0], [[0.0], [1.0], [0.5]])
    res = p_variation_level1(path, 1.0, 0.5, 1.5)
    assert res.value == pytest.approx(0.75, abs=1e-14)  # 0.5 up, 0.25 down
    assert p_variation_level1(path, 2.0, 0.7, 0.7).value == 0.0


def test_homogeneous_matches_level1_for_small_p():
    rng = np.random.default_rng(227)
    for _ in range(15):
        path = random_path(rng, max_vertices=8)
        p = float(rng.uniform(1.0, 1.99))
        hom = homogeneous_p_variation(path, p)
        lvl = p_variation_level1(path, p)
        assert hom.exact
        assert hom.value == pytest.approx(lvl.value, abs=1e-12)


def test_homogeneous_floor2_is_inexact_lower_surrogate():
    rng = np.random.default_rng(229)
    path = random_path(rng, d=2, max_vertices=8)
    hom = homogeneous_p_variation(path, 2.3)
    assert not hom.exact
    # still at least the level-1 chain value on the same grid
    lvl = p_variation_level1(path, 2.3)
    assert hom.value >= lvl.value - 1e-12


def test_control_omega_superadditive_p1():
    rng = np.random.default_rng(233)
    for _ in range(15):
        path = random_path(rng, max_vertices=10)
        omega = control_omega(path, 1.0)
        s, t, u = np.sort(rng.uniform(path.t0, path.t1, size=3))
        assert omega(s, t) + omega(t, u) <= omega(s, u) + 1e-12
        assert omega(s, s) == 0.0


def test_control_omega_zero_on_diagonal_and_monotone():
    path = PiecewiseLinearPath([0.0, 0.5, 1.0], [[0.0, 0], [1.0, 0.2], [0.0, 0.4]])
    omega = control_omega(path, 1.5)
    assert omega(0.2, 0.2) == 0.0
    assert omega(0.0, 0.5) <= omega(0.0, 1.0) + 1e-15


def test_brute_force_vertex_cap():
    path = random_path(np.random.default_rng(239), min_vertices=22,
                       max_vertices=25)
    with pytest.raises(ValueError):
        brute_force_pvar(path, 2.0)


def test_p_below_one_rejected():
    path = PiecewiseLinearPath([0.0, 1.0], [[0.0], [1.0]])
    for fn in (p_variation_level1, brute_force_pvar, homogeneous_p_variation):
        with pytest.raises(ValueError):
            fn(path, 0.5)


def test_optimal_partition_attains_value():
    rng = np.random.default_rng(241)
    for _ in range(10):
        path = random_path(rng, max_vertices=9)
        p = float(rng.choice([1.0, 1.5, 2.0]))
        res = p_variation_level1(path, p)
        pts = np.vstack([path.position(u) for u in res.optimal_partition])
        total = float(np.sum(
            np.linalg.norm(np.diff(pts, axis=0), axis=1) ** p) ** (1.0 / p))
        assert total == pytest.approx(res.value, abs=1e-12)
