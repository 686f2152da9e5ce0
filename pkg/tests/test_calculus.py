import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from vgtv import (PhiField, ScalarImage, VectorField, divergence, gradient,
                  pairing, pairing_weighted, phi_total, truncate)
from vgtv.calculus import boundary_flux_max, div_arrays, grad_arrays, inner

from conftest import FAMILY_NAMES, make_field, random_admissible_field, random_image

FINITE = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def test_gradient_of_constant_is_zero():
    v = ScalarImage(np.full((5, 7), 3.25), 0.5)
    g = gradient(v)
    assert not np.any(g.x) and not np.any(g.y)
    assert g.zero_normal_trace


def test_gradient_of_linear_ramp():
    h = 1.0
    v = ScalarImage(np.tile(np.arange(3.0), (3, 1)) * h, h)
    g = gradient(v)
    expected_x = np.ones((3, 3))
    expected_x[:, -1] = 0.0
    assert np.array_equal(g.x, expected_x)
    assert not np.any(g.y)


def test_gradient_matches_index_arithmetic(rng):
    h = 0.25
    v = random_image(rng, (4, 4), h)
    g = gradient(v)
    for i in range(4):
        for j in range(4):
            gx = (v.data[i, j + 1] - v.data[i, j]) / h if j < 3 else 0.0
            gy = (v.data[i + 1, j] - v.data[i, j]) / h if i < 3 else 0.0
            assert g.x[i, j] == gx
            assert g.y[i, j] == gy


def test_divergence_of_zero_field():
    xi = VectorField(np.zeros((4, 4)), np.zeros((4, 4)), 1.0)
    assert not np.any(divergence(xi).data)


def test_adjointness_random_pairs(rng):
    h = 1 / 8
    for _ in range(100):
        v = random_image(rng, (8, 8), h)
        xi = random_admissible_field(rng, (8, 8), h)
        gx, gy = grad_arrays(v.data, h)
        lhs = inner(gx, xi.x, h) + inner(gy, xi.y, h)
        rhs = -inner(v.data, divergence(xi).data, h)
        scale = abs(lhs) + abs(rhs) + 1e-30
        assert abs(lhs - rhs) <= 1e-12 * scale


def test_div_grad_is_five_point_neumann_laplacian(rng):
    h = 0.2
    v = random_image(rng, (6, 6), h)
    lap = divergence(gradient(v)).data
    u = v.data
    for i in range(1, 5):
        for j in range(1, 5):
            stencil = (u[i, j + 1] + u[i, j - 1] + u[i + 1, j] + u[i - 1, j]
                       - 4 * u[i, j]) / (h * h)
            assert lap[i, j] == pytest.approx(stencil, rel=1e-12, abs=1e-12)


def test_divergence_sums_to_zero(rng):
    h = 1 / 16
    xi = random_admissible_field(rng, (16, 16), h)
    d = divergence(xi).data
    assert abs(d.sum()) <= 1e-12 * np.abs(d).sum()


def test_truncate_noop_when_level_large():
    v = ScalarImage(np.array([[0.5, -0.25], [0.75, 0.0]]), 1.0)
    assert np.array_equal(truncate(v, 10.0).data, v.data)


def test_truncate_clamps():
    v = ScalarImage(np.array([[-5.0, 0.0, 5.0]]), 1.0)
    assert np.array_equal(truncate(v, 2.0).data, [[-2.0, 0.0, 2.0]])


def test_truncate_rejects_nonpositive_level():
    v = ScalarImage(np.zeros((2, 2)), 1.0)
    with pytest.raises(ValueError):
        truncate(v, 0.0)


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_truncation_never_increases_modular(rng, family):
    h = 1 / 8
    field = make_field(family, (8, 8), h)
    for _ in range(50):
        v = random_image(rng, (8, 8), h, lo=-2.0, hi=2.0)
        before = phi_total(field, gradient(v))
        for m in (0.1, 0.5, 1.0):
            after = phi_total(field, gradient(truncate(v, m)))
            assert after <= before


def test_pairing_zero_field(rng):
    v = random_image(rng, (5, 5), 1.0)
    xi = VectorField(np.zeros((5, 5)), np.zeros((5, 5)), 1.0)
    assert pairing(xi, v) == 0.0


def test_pairing_equals_minus_divergence_pairing(rng):
    h = 1 / 8
    for _ in range(20):
        v = random_image(rng, (8, 8), h)
        xi = random_admissible_field(rng, (8, 8), h)
        lhs = pairing(xi, v)
        rhs = -inner(v.data, divergence(xi).data, h)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_pairing_bounded_by_young_sum(rng, family):
    # |<xi, grad v>| <= E_phi(grad v) + sum phi*(x, |xi|) h^2 when finite
    from vgtv import conjugate_values

    h = 1 / 8
    field = make_field(family, (8, 8), h)
    for _ in range(20):
        v = random_image(rng, (8, 8), h)
        xi = random_admissible_field(rng, (8, 8), h, scale=0.9)
        conj, _, infeasible = conjugate_values(field, xi.magnitude())
        if infeasible:
            continue
        bound = phi_total(field, gradient(v)) + h * h * float(np.sum(conj))
        assert abs(pairing(xi, v)) <= bound + 1e-12


def test_pairing_weighted_matches_shifted_weight(rng):
    h = 1 / 8
    for _ in range(20):
        v = random_image(rng, (8, 8), h)
        xi = random_admissible_field(rng, (8, 8), h)
        psi = np.zeros((8, 8))
        psi[2:6, 2:6] = rng.uniform(0, 1, (4, 4))  # supported away from the boundary
        got = pairing_weighted(xi, v, ScalarImage(psi, h))
        gx, gy = grad_arrays(v.data, h)
        psix = np.zeros_like(psi)
        psix[:, :-1] = psi[:, 1:]
        psiy = np.zeros_like(psi)
        psiy[:-1, :] = psi[1:, :]
        expected = h * h * np.sum(psix * xi.x * gx + psiy * xi.y * gy)
        scale = abs(expected) + 1e-30
        assert abs(got - expected) <= 1e-12 * max(1.0, scale)


def test_boundary_flux_max_detects_violations():
    x = np.zeros((4, 4))
    y = np.zeros((4, 4))
    assert boundary_flux_max(VectorField(x, y, 1.0)) == 0.0
    x2 = x.copy()
    x2[1, -1] = 0.5
    assert boundary_flux_max(VectorField(x2, y, 1.0)) == 0.5


def test_zero_normal_trace_flag_is_validated():
    x = np.zeros((3, 3))
    y = np.zeros((3, 3))
    y2 = y.copy()
    y2[-1, 0] = 1.0
    with pytest.raises(ValueError):
        VectorField(x, y2, 1.0, zero_normal_trace=True)
    VectorField(x, y2, 1.0)  # unflagged fields may carry boundary flux


def test_scalar_image_validation():
    with pytest.raises(ValueError):
        ScalarImage(np.zeros((1, 1)), 1.0)
    with pytest.raises(ValueError):
        ScalarImage(np.array([[np.nan, 0.0]]), 1.0)
    with pytest.raises(ValueError):
        ScalarImage(np.zeros((2, 2)), 0.0)
    ScalarImage(np.zeros((2, 1)), 1.0)  # 1-D pair grids are allowed


@settings(max_examples=25, deadline=None)
@given(v=arrays(np.float64, (6, 5), elements=FINITE),
       x=arrays(np.float64, (6, 5), elements=FINITE),
       y=arrays(np.float64, (6, 5), elements=FINITE))
def test_adjointness_property(v, x, y):
    h = 0.5
    x = x.copy()
    y = y.copy()
    x[:, -1] = 0.0
    y[-1, :] = 0.0
    gx, gy = grad_arrays(v, h)
    lhs = inner(gx, x, h) + inner(gy, y, h)
    rhs = -inner(v, div_arrays(x, y, h), h)
    assert abs(lhs - rhs) <= 1e-12 * (abs(lhs) + abs(rhs) + 1.0)


@settings(max_examples=25, deadline=None)
@given(v=arrays(np.float64, (5, 5), elements=FINITE),
       m=st.floats(0.01, 50.0))
def test_truncation_is_1_lipschitz_on_gradients(v, m):
    img = ScalarImage(v, 1.0)
    g_before = gradient(img)
    g_after = gradient(truncate(img, m))
    assert np.all(g_after.magnitude() <= g_before.magnitude() + 1e-12)
