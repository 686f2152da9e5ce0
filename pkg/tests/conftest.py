import numpy as np
import pytest

from vgtv import PhiField, ScalarImage, VectorField, prox_dual

FAMILY_NAMES = ("classical_tv", "variable_exponent", "double_phase", "power_weighted")


def make_field(name: str, shape, h: float) -> PhiField:
    """One representative parameter set per family, mixing linear and
    superlinear growth regions where the family allows it."""
    ii, jj = np.mgrid[0 : shape[0], 0 : shape[1]]
    if name == "classical_tv":
        return PhiField.classical_tv(shape, h)
    if name == "variable_exponent":
        denom = max(shape[0] + shape[1] - 2, 1)
        return PhiField.variable_exponent(1.0 + (ii + jj) / denom, h)
    if name == "double_phase":
        return PhiField.double_phase(np.where(jj < shape[1] // 2, 0.0, 0.5), 2.0, h)
    if name == "power_weighted":
        return PhiField.power_weighted(0.5 + 1.5 * ii / max(shape[0] - 1, 1), h)
    raise ValueError(name)


def random_image(rng, shape, h, lo=-1.0, hi=1.0) -> ScalarImage:
    return ScalarImage(rng.uniform(lo, hi, shape), h)


def random_admissible_field(rng, shape, h, scale=1.0) -> VectorField:
    x = rng.uniform(-scale, scale, shape)
    y = rng.uniform(-scale, scale, shape)
    x[:, -1] = 0.0
    y[-1, :] = 0.0
    return VectorField(x, y, h, zero_normal_trace=True)


def random_feasible_dual(rng, field: PhiField, lam: float, scale=2.0) -> VectorField:
    """Random dual iterate pushed into dom phi* by the exact dual prox."""
    z = random_admissible_field(rng, field.shape, field.h, scale=scale * lam)
    return prox_dual(field, z, sigma=1.0, lam=lam)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(params=FAMILY_NAMES)
def family_name(request):
    return request.param
