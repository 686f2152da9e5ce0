import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vgtv import (Condition, PhiField, VectorField, check_a0,
                  check_almost_monotone, check_double_phase_holder,
                  check_log_holder, check_strong_holder_a,
                  check_strong_holder_p, conjugate_eval, conjugate_values,
                  numeric_legendre, phi_eval, phi_total, recession)

from conftest import FAMILY_NAMES, make_field

INF = float("inf")


def small(name):
    return make_field(name, (4, 4), 0.25)


# -- closed forms -------------------------------------------------------------


def test_phi_eval_classical_tv_identity():
    assert phi_eval(small("classical_tv"), (2, 1), 3.0) == 3.0


def test_phi_eval_double_phase():
    field = PhiField.double_phase(np.ones((2, 2)), 2.0, 1.0)
    assert phi_eval(field, (0, 0), 2.0) == pytest.approx(4.0, abs=0)


def test_phi_eval_variable_exponent():
    field = PhiField.variable_exponent(2.0 * np.ones((2, 2)), 1.0)
    assert phi_eval(field, (1, 1), 3.0) == pytest.approx(4.5, abs=0)


def test_phi_eval_power_weighted():
    field = PhiField.power_weighted(np.full((2, 2), 0.5), 1.0)
    assert phi_eval(field, (0, 1), 3.0) == 1.5


def test_phi_eval_rejects_bad_pixel_and_t():
    field = small("classical_tv")
    with pytest.raises(IndexError):
        phi_eval(field, (9, 0), 1.0)
    with pytest.raises(ValueError):
        phi_eval(field, (0, 0), -1.0)


def test_conjugate_classical_tv_indicator():
    field = small("classical_tv")
    assert conjugate_eval(field, (0, 0), 0.7) == 0.0
    assert conjugate_eval(field, (0, 0), 1.0) == 0.0
    assert conjugate_eval(field, (0, 0), 1.3) == INF


def test_conjugate_double_phase():
    field = PhiField.double_phase(np.ones((2, 2)), 2.0, 1.0)
    assert conjugate_eval(field, (0, 0), 3.0) == pytest.approx(2.0, abs=0)
    assert conjugate_eval(field, (0, 0), 0.5) == 0.0  # positive part vanishes
    degenerate = PhiField.double_phase(np.zeros((2, 2)), 2.0, 1.0)
    assert conjugate_eval(degenerate, (0, 0), 1.5) == INF


def test_conjugate_variable_exponent():
    field = PhiField.variable_exponent(2.0 * np.ones((2, 2)), 1.0)
    assert conjugate_eval(field, (0, 0), 3.0) == pytest.approx(4.5, abs=0)
    linear = PhiField.variable_exponent(np.ones((2, 2)), 1.0)
    assert conjugate_eval(linear, (0, 0), 0.9) == 0.0
    assert conjugate_eval(linear, (0, 0), 1.1) == INF


def test_conjugate_power_weighted():
    field = PhiField.power_weighted(np.full((2, 2), 0.5), 1.0)
    assert conjugate_eval(field, (0, 0), 0.49) == 0.0
    assert conjugate_eval(field, (0, 0), 0.51) == INF


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_conjugate_vanishes_at_zero(family):
    field = small(family)
    for i in range(4):
        for j in range(4):
            assert conjugate_eval(field, (i, j), 0.0) == 0.0


def test_recession_values():
    assert recession(small("classical_tv"), (0, 0)) == 1.0
    dp = PhiField.double_phase(np.full((2, 2), 0.3), 2.0, 1.0)
    assert recession(dp, (0, 0)) == INF
    dp0 = PhiField.double_phase(np.zeros((2, 2)), 2.0, 1.0)
    assert recession(dp0, (0, 0)) == 1.0
    ve1 = PhiField.variable_exponent(np.ones((2, 2)), 1.0)
    assert recession(ve1, (0, 0)) == 1.0
    ve2 = PhiField.variable_exponent(np.full((2, 2), 1.5), 1.0)
    assert recession(ve2, (0, 0)) == INF
    pw = PhiField.power_weighted(np.full((2, 2), 0.7), 1.0)
    assert recession(pw, (0, 0)) == 0.7


# -- brute-force conjugate oracle ---------------------------------------------


def test_numeric_legendre_matches_closed_form_p2():
    field = PhiField.variable_exponent(2.0 * np.ones((2, 2)), 1.0)
    value = numeric_legendre(field, (0, 0), 3.0, t_max=10.0, n_samples=10**6)
    assert value == pytest.approx(4.5, abs=1e-5)


def test_numeric_legendre_diverges_beyond_recession():
    assert numeric_legendre(small("classical_tv"), (0, 0), 2.0, 10.0, 100) == INF


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_numeric_legendre_zero_at_zero(family):
    assert numeric_legendre(small(family), (1, 1), 0.0, 100.0, 1000) == 0.0


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_oracle_equivalence(family):
    # pinned oracle resolution: n = 1e6 samples on [0, 1e3]
    field = small(family)
    pixels = [(0, 0), (1, 3), (3, 2)]
    s_values = np.array([0.1, 0.5, 0.9, 1.2, 1.8, 3.0])
    for pixel in pixels:
        rec = recession(field, pixel)
        oracle = numeric_legendre(field, pixel, s_values, t_max=1e3, n_samples=10**6)
        for s, num in zip(s_values, oracle):
            closed = conjugate_eval(field, pixel, float(s))
            if s > rec + 1e-9:
                assert closed == INF and num == INF
            elif np.isfinite(closed) and np.isfinite(num):
                assert abs(closed - num) <= max(1e-6, 1e-6 * closed)


def test_biconjugation_recovers_phi(rng):
    # numeric Legendre of the numeric Legendre returns phi at sampled points
    checked = 0
    for family in FAMILY_NAMES:
        field = small(family)
        for _ in range(3):
            pixel = (int(rng.integers(0, 4)), int(rng.integers(0, 4)))
            t0 = float(rng.uniform(0.05, 3.0))
            rec = recession(field, pixel)
            s_hi = min(rec, 6.0)
            s_grid = np.linspace(0.0, s_hi, 1200)
            conj = numeric_legendre(field, pixel, s_grid, t_max=50.0, n_samples=100000)
            finite = np.isfinite(conj)
            bidual = np.max(s_grid[finite] * t0 - conj[finite])
            direct = phi_eval(field, pixel, t0)
            assert bidual == pytest.approx(direct, rel=2e-3, abs=2e-3)
            checked += 1
    assert checked >= 10


# -- pointwise inequalities on sample grids ------------------------------------


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_young_inequality_on_sample_grid(family):
    field = small(family)
    pixel = (2, 2)
    rec = recession(field, pixel)
    t_grid = np.linspace(0.0, 5.0, 50)
    s_grid = np.linspace(0.0, min(rec, 6.0), 50)
    for t in t_grid:
        phi_t = phi_eval(field, pixel, float(t))
        for s in s_grid:
            conj_s = conjugate_eval(field, pixel, float(s))
            assert s * t <= phi_t + conj_s + 1e-12


@pytest.mark.parametrize("family", FAMILY_NAMES)
def test_phi_monotone_and_midpoint_convex(family):
    field = small(family)
    pixel = (1, 2)
    t = np.linspace(0.0, 4.0, 41)
    vals = np.array([phi_eval(field, pixel, float(x)) for x in t])
    assert np.all(np.diff(vals) >= -1e-12)
    mid = np.array([phi_eval(field, pixel, float(x)) for x in (t[:-1] + t[1:]) / 2])
    assert np.all(mid <= (vals[:-1] + vals[1:]) / 2 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(t=st.floats(0, 20), s=st.floats(0, 20),
       fam=st.sampled_from(FAMILY_NAMES))
def test_young_inequality_property(t, s, fam):
    field = small(fam)
    conj = conjugate_eval(field, (0, 0), s)
    if np.isfinite(conj):
        assert s * t <= phi_eval(field, (0, 0), t) + conj + 1e-9 * max(1.0, s * t)


# -- modular -------------------------------------------------------------------


def test_phi_total_zero_gradient():
    field = small("double_phase")
    zero = VectorField(np.zeros((4, 4)), np.zeros((4, 4)), 0.25)
    assert phi_total(field, zero) == 0.0


def test_phi_total_classical_tv_counts_pixels():
    field = PhiField.classical_tv((3, 4), 1.0)
    ones = VectorField(np.ones((3, 4)), np.zeros((3, 4)), 1.0)
    assert phi_total(field, ones) == 12.0


def test_phi_total_double_phase_example():
    field = PhiField.double_phase(np.ones((2, 2)), 2.0, 1.0)
    grad = VectorField(np.full((2, 2), 2.0), np.zeros((2, 2)), 1.0)
    assert phi_total(field, grad) == pytest.approx(16.0, abs=0)


# -- structural condition checkers ----------------------------------------------


def test_a0_classical_tv_beta_one():
    report = check_a0(small("classical_tv"))
    assert report.holds and report.condition is Condition.A0
    assert report.witness_constant == pytest.approx(1.0, abs=1e-9)


def test_a0_variable_exponent_p2():
    field = PhiField.variable_exponent(2.0 * np.ones((3, 3)), 1.0)
    report = check_a0(field)
    assert report.holds
    # feasibility boundary solves (1/2) beta^-2 = 1, i.e. beta = sqrt(1/2)
    assert report.witness_constant == pytest.approx(np.sqrt(0.5), rel=1e-6)


def test_a0_double_phase_bounded_weight():
    field = PhiField.double_phase(np.full((3, 3), 2.0), 3.0, 1.0)
    assert check_a0(field).holds


def test_almost_monotone_classical_tv():
    report = check_almost_monotone(small("classical_tv"), 1.0, "inc")
    assert report.holds and report.witness_constant == 1.0
    assert report.condition is Condition.AINC_P


def test_almost_monotone_double_phase_decay():
    field = PhiField.double_phase(np.full((3, 3), 0.5), 2.0, 1.0)
    report = check_almost_monotone(field, 2.0, "dec")
    assert report.holds and np.isfinite(report.witness_constant)
    assert report.condition is Condition.ADEC_Q


def test_almost_monotone_detects_growth():
    field = PhiField.variable_exponent(3.0 * np.ones((3, 3)), 1.0)
    report = check_almost_monotone(field, 2.0, "dec")
    assert not report.holds  # phi/t^2 = t/3 grows without bound on the sample range


def test_log_holder_constant_field():
    report = check_log_holder(np.full((6, 6), 1.7), h=1 / 6)
    assert report.holds and report.witness_constant == 0.0


def test_log_holder_smooth_field_holds():
    h = 1 / 16
    ii, jj = np.mgrid[0:16, 0:16]
    r = np.hypot(ii - 8, jj - 8) * h
    p = 1.0 + 1.0 / np.log(np.e + 1.0 / np.maximum(r, 1e-12))
    report = check_log_holder(p, h=h)
    assert report.holds
    assert report.witness_constant < 1.0


def test_log_holder_jump_fails():
    h = 1 / 8
    p = np.ones((8, 8))
    p[:, 4:] = 2.0
    report = check_log_holder(p, h=h)
    assert not report.holds
    # adjacent jump quotient is |1 - 1/2| log(e + 1/h)
    expected = 0.5 * np.log(np.e + 8.0)
    assert report.witness_constant == pytest.approx(expected, rel=1e-12)
    (xi, xj), (yi, yj) = report.worst_pixel_pair
    assert abs(xj - yj) + abs(xi - yi) == 1


def test_strong_holder_p_vacuous_without_linear_set():
    report = check_strong_holder_p(np.full((8, 8), 2.0), h=1 / 8)
    assert report.holds and report.witness_constant == 0.0


def test_strong_holder_p_jump_fails():
    p = np.ones((8, 8))
    p[:, 4:] = 2.0
    report = check_strong_holder_p(p, h=1 / 8)
    assert not report.holds


def test_double_phase_holder_constant_is_one():
    report = check_double_phase_holder(np.full((6, 6), 0.4), q=2.0, n_dim=2, h=1 / 6)
    assert report.holds
    assert report.witness_constant == 1.0


def test_double_phase_holder_jump_constant():
    # a jump 0 -> 1 across one pixel forces C = h^(-n(q-1))
    h = 1 / 8
    a = np.zeros((8, 8))
    a[:, 4:] = 1.0
    report = check_double_phase_holder(a, q=2.0, n_dim=2, h=h)
    assert report.witness_constant == pytest.approx((1 / h) ** 2, rel=1e-12)
    assert not check_double_phase_holder(a, q=2.0, n_dim=2, h=h, cap=10.0).holds


def test_strong_holder_a_power_field_holds():
    # a = |x - x0|^(n(q-1)+1) gives ratio |x - x0| -> 0; needs h <= threshold
    n, q = 2, 2.0
    size = 128
    h = 1.0 / size
    ii, jj = np.mgrid[0:size, 0:size]
    d = np.hypot(ii - size // 2, jj - size // 2) * h
    a = d ** (n * (q - 1) + 1)
    report = check_strong_holder_a(a, q=q, n_dim=n, h=h)
    assert report.holds
    assert report.witness_constant == pytest.approx(h, rel=1e-9)


def test_strong_holder_a_jump_fails():
    a = np.zeros((8, 8))
    a[:, 4:] = 1.0
    h = 1 / 8
    report = check_strong_holder_a(a, q=2.0, n_dim=2, h=h)
    assert not report.holds
    assert report.witness_constant == pytest.approx((1 / h) ** 2, rel=1e-9)


def test_strong_holder_a_vacuous_when_positive():
    report = check_strong_holder_a(np.full((6, 6), 0.2), q=2.0, n_dim=2, h=1 / 6)
    assert report.holds


def test_condition_report_serialises():
    report = check_a0(small("classical_tv"))
    d = report.to_dict()
    assert d["condition"] == "A0" and d["holds"] is True


# -- field validation -----------------------------------------------------------


def test_phi_field_validation():
    with pytest.raises(ValueError):
        PhiField.variable_exponent(np.full((3, 3), 0.5), 1.0)  # p < 1
    with pytest.raises(ValueError):
        PhiField.double_phase(-np.ones((3, 3)), 2.0, 1.0)  # a < 0
    with pytest.raises(ValueError):
        PhiField.double_phase(np.ones((3, 3)), 1.0, 1.0)  # q must exceed 1
    with pytest.raises(ValueError):
        PhiField.power_weighted(np.zeros((3, 3)), 1.0)  # w must be positive
    with pytest.raises(ValueError):
        PhiField(
            "variable_exponent", (3, 3), 1.0, p_field=np.ones((2, 2)))  # shape clash
