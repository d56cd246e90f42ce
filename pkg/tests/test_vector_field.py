import numpy as np
import pytest

from corpus import random_field, random_y0
from rough_taylor import (
    Box,
    VectorFieldJet,
    apply_multilinear,
    field_lip1_estimate,
    lip_norm_estimate,
    sup_norm_estimate,
    taylor_coefficient,
)


def flat_index(word, d):
    idx = 0
    for a in word:
        idx = idx * d + (a - 1)
    return idx


def test_linear_field_word_values():
    # order-2 coefficient at word (i, j) must be A_j A_i y: the later letter
    # acts last, the new slot is the earliest integration variable.
    A1 = np.array([[0.8, 0.3], [0.0, -0.5]])
    A2 = np.array([[0.2, -0.7], [0.4, 0.1]])
    f = VectorFieldJet.linear([A1, A2])
    y = np.array([1.0, 0.5])
    F2 = taylor_coefficient(f, 2)
    mats = {1: A1, 2: A2}
    vals = F2.values(y)
    for i in (1, 2):
        for j in (1, 2):
            expected = mats[j] @ (mats[i] @ y)
            got = vals[:, flat_index((i, j), 2)]
            assert np.allclose(got, expected, atol=1e-13)


def test_linear_field_word_values_reversed():
    A1 = np.array([[0.8, 0.3], [0.0, -0.5]])
    A2 = np.array([[0.2, -0.7], [0.4, 0.1]])
    f = VectorFieldJet.linear([A1, A2])
    y = np.array([1.0, 0.5])
    vals = taylor_coefficient(f, 2, new_slot="last").values(y)
    mats = {1: A1, 2: A2}
    for i in (1, 2):
        for j in (1, 2):
            expected = mats[i] @ (mats[j] @ y)
            got = vals[:, flat_index((i, j), 2)]
            assert np.allclose(got, expected, atol=1e-13)


def test_hierarchy_induction_identity():
    # next order at word (a, w) equals the derivative of the current order at
    # w, contracted against component a -- checked by central differences
    rng = np.random.default_rng(311)
    for _ in range(6):
        f = random_field(rng, e=2, d=2, coeff_scale=0.8)
        y = random_y0(rng, 2)
        k = int(rng.integers(1, 3))
        Fk = taylor_coefficient(f, k)
        Fk1 = taylor_coefficient(f, k + 1)
        eps = 1e-5
        fy = f(y)
        vals1 = Fk1.values(y)
        for a in (1, 2):
            direction = fy[:, a - 1]
            plus = Fk.values(y + eps * direction)
            minus = Fk.values(y - eps * direction)
            numeric = (plus - minus) / (2 * eps)
            for flat_w in range(2**k):
                word_idx = a  # new letter is the first word letter
                target = vals1[:, (word_idx - 1) * 2**k + flat_w]
                scale = max(1.0, float(np.max(np.abs(target))))
                assert np.max(np.abs(numeric[:, flat_w] - target)) < \
                    5e-9 * scale


def test_scalar_linear_hierarchy_closed_form():
    # f(y) = a y gives coefficient a^k y at every order
    a = 0.73
    f = VectorFieldJet(1, 1, [[{(1,): a}]])
    y = np.array([1.7])
    for k in range(1, 6):
        val = taylor_coefficient(f, k).values(y)
        assert val.shape == (1, 1)
        assert val[0, 0] == pytest.approx(a**k * y[0], rel=1e-13)


def test_quadratic_scalar_second_order():
    # f(y) = y^2: second coefficient field is 2 y^3
    f = VectorFieldJet(1, 1, [[{(2,): 1.0}]])
    for yv in (0.3, -1.1, 2.0):
        val = taylor_coefficient(f, 2).values(np.array([yv]))
        assert val[0, 0] == pytest.approx(2.0 * yv**3, rel=1e-13)


def test_sup_norm_linear_on_box():
    a = 0.9
    f = VectorFieldJet(1, 1, [[{(1,): a}]])
    box = Box(np.array([1.0]), np.array([2.0]))
    est = sup_norm_estimate(taylor_coefficient(f, 2), box)
    assert est.operator_max == pytest.approx(2.0 * a * a, rel=1e-12)
    assert est.frobenius_max >= est.operator_max - 1e-15


def test_lip_norm_linear_field():
    a = -0.65
    f = VectorFieldJet(1, 1, [[{(1,): a}]])
    box = Box(np.array([-1.0]), np.array([1.0]))
    # gamma = 1: only the first derivative matters, which is constant a
    assert lip_norm_estimate(f, 1.0, box) == pytest.approx(abs(a), rel=1e-12)


def test_lip1_estimate_positive():
    rng = np.random.default_rng(313)
    f = random_field(rng, e=2, d=2)
    box = Box(np.array([-0.5, -0.5]), np.array([0.5, 0.5]))
    for m in (1, 2):
        assert field_lip1_estimate(taylor_coefficient(f, m), box) >= 0.0


def test_apply_multilinear_matches_manual_contraction():
    rng = np.random.default_rng(317)
    f = random_field(rng, e=2, d=3)
    y = random_y0(rng, 2)
    F2 = taylor_coefficient(f, 2)
    tensor = rng.uniform(-1, 1, size=9)
    manual = F2.values(y) @ tensor
    assert np.allclose(apply_multilinear(F2, y, tensor), manual, atol=1e-13)


def test_eval_matches_components():
    f = VectorFieldJet(2, 2, [
        [{(1, 0): 2.0}, {(0, 2): 1.0}],
        [{(0, 0): -0.5}, {(1, 1): 3.0}],
    ])
    y = np.array([0.4, -0.7])
    out = f(y)
    assert out[0, 0] == pytest.approx(2.0 * 0.4)
    assert out[0, 1] == pytest.approx((-0.7) ** 2)
    assert out[1, 0] == pytest.approx(-0.5)
    assert out[1, 1] == pytest.approx(3.0 * 0.4 * (-0.7))


def test_degree_property():
    f = VectorFieldJet(1, 1, [[{(3,): 1.0, (0,): 2.0}]])
    assert f.degree == 3
    g = VectorFieldJet(2, 1, [[{(0, 0): 1.0}], [{(0, 0): 0.0}]])
    assert g.degree == 0


def test_json_roundtrip_and_validation():
    rng = np.random.default_rng(331)
    f = random_field(rng, e=2, d=2)
    g = VectorFieldJet.from_json(f.to_json())
    y = random_y0(rng, 2)
    assert np.allclose(f(y), g(y), atol=1e-15)

    with pytest.raises(ValueError):
        VectorFieldJet.from_json({"e": 1, "d": 1})
    with pytest.raises(ValueError):
        VectorFieldJet.from_json(
            {"e": 1, "d": 1, "components": [[{"coeffs": {"(1,2)": 1.0}}]]})
    with pytest.raises(ValueError):
        VectorFieldJet(1, 1, [[{(-1,): 1.0}]])


def test_box_validation_and_lattice():
    with pytest.raises(ValueError):
        Box(np.array([1.0]), np.array([0.5]))
    box = Box.inflate(np.array([-1.0, 0.0]), np.array([1.0, 2.0]), policy=0.1)
    assert box.lower[0] == pytest.approx(-1.1) and box.upper[1] == pytest.approx(2.2)
    lattice = box.lattice()
    assert lattice.ndim == 2 and lattice.shape[1] == 2
