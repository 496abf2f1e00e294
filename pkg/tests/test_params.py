import math

import numpy as np
import pytest

from paradigmlab.errors import (
    AlphaNotBelowBeta,
    BetaAboveOne,
    BetaBelowOneRequiresPositiveFloor,
    BetaMustBeBelowOne,
    BetaOneRequiresC2LessThanOne,
    NegativeFloor,
    NonPositiveCoefficient,
    POutOfRange,
    ParamsError,
)
from paradigmlab.params import (
    ModelParams,
    OuCoefficients,
    derive_exponents,
    derived_constants,
    equilibrium,
    exponent_residuals,
    exponents_for,
    initial_window,
    mu_forms,
    ou_coefficients,
    scalable_tcp,
    sigma_forms,
    tcp,
    validate,
)


def test_tcp_preset_values():
    params = tcp(p=0.01)
    assert (params.c1, params.c2, params.alpha, params.beta, params.ell) == (1.0, 0.5, -1.0, 1.0, 0.0)


def test_scalable_tcp_is_beta_one_alpha_zero():
    params = scalable_tcp(p=0.01, c1=0.01, c2=0.125)
    assert params.alpha == 0.0 and params.beta == 1.0
    assert derive_exponents(params).nu == 1.0


def test_tcp_exponents_and_equilibrium(tcp_params):
    e = derive_exponents(tcp_params)
    assert e.gamma == 0.5
    assert e.nu == 1.0
    assert e.tau == 0.0
    assert equilibrium(tcp_params) == pytest.approx(math.sqrt(2.0), rel=1e-15)


def test_sqrt_exponents(sqrt_params):
    e = derive_exponents(sqrt_params)
    assert (e.gamma, e.nu, e.tau) == (2.0, 2.0, 0.5)
    assert equilibrium(sqrt_params) == 1.0
    assert equilibrium(sqrt_params, 0.19) == pytest.approx(0.81**2)


def test_nu_is_exactly_one_for_beta_one():
    for alpha in (-3.0, -1.0, -0.37, 0.0, 0.25, 0.9):
        assert exponents_for(alpha, 1.0).nu == 1.0


@pytest.mark.parametrize(
    "kwargs, exc",
    [
        ({"c1": 0.0}, NonPositiveCoefficient),
        ({"c2": -1.0}, NonPositiveCoefficient),
        ({"alpha": 1.0}, AlphaNotBelowBeta),
        ({"beta": 1.5, "alpha": 0.0}, BetaAboveOne),
        ({"ell": -1.0}, NegativeFloor),
        ({"c2": 1.0}, BetaOneRequiresC2LessThanOne),
        ({"beta": 0.5, "ell": 0.0}, BetaBelowOneRequiresPositiveFloor),
        ({"p": 0.0}, POutOfRange),
        ({"p": 1.0}, POutOfRange),
        ({"c1": math.nan}, ParamsError),
    ],
)
def test_assumption_violations(kwargs, exc):
    base = {"c1": 1.0, "c2": 0.5, "alpha": -1.0, "beta": 1.0, "ell": 0.0, "p": 0.01}
    base.update(kwargs)
    with pytest.raises(exc):
        ModelParams(**base)


def test_validate_returns_params_unchanged(tcp_params):
    assert validate(tcp_params) is tcp_params


def test_from_mapping_and_with_p():
    params = ModelParams.from_mapping({"c1": 1, "c2": 0.5, "alpha": -1, "beta": 1, "p": 0.1})
    assert params.ell == 0.0
    assert isinstance(params.c1, float)
    assert params.with_p(0.001).p == 0.001
    assert ModelParams.from_mapping(params.as_dict()) == params


def test_ou_coefficients_sqrt_case(sqrt_params):
    ou = ou_coefficients(sqrt_params)
    assert ou.mu == pytest.approx(0.5, rel=1e-12)
    assert ou.sigma == pytest.approx(1.0, rel=1e-12)
    assert ou.stationary_variance == pytest.approx(1.0, rel=1e-12)


def test_ou_coefficients_two_one_case():
    ou = ou_coefficients(ModelParams(c1=2.0, c2=1.0, alpha=0.0, beta=0.5, ell=0.01, p=0.01))
    assert ou.mu == pytest.approx(0.25, rel=1e-12)
    assert ou.sigma == pytest.approx(2.0, rel=1e-12)
    assert ou.stationary_variance == pytest.approx(8.0, rel=1e-12)


def test_ou_coefficients_golden_values():
    ou = ou_coefficients(ModelParams(c1=1.0, c2=0.5, alpha=-1.0, beta=0.5, ell=0.1, p=0.01))
    assert ou.mu == pytest.approx(0.5952753944880749, rel=1e-12)
    assert ou.sigma == pytest.approx(0.6299605249474366, rel=1e-12)


def test_ou_stationary_variance_formula():
    assert OuCoefficients(mu=0.25, sigma=2.0).stationary_variance == 8.0
    assert OuCoefficients(mu=0.5, sigma=1.0).stationary_variance == 1.0


def test_ou_coefficients_reject_beta_one(tcp_params):
    with pytest.raises(BetaMustBeBelowOne):
        ou_coefficients(tcp_params)


def test_printed_forms_agree():
    params = ModelParams(c1=2.5, c2=0.3, alpha=-2.0, beta=0.4, ell=0.1, p=0.02)
    for raw, simple in (mu_forms(params), sigma_forms(params)):
        assert raw == pytest.approx(simple, rel=1e-10)


@pytest.mark.parametrize("alpha, beta", [(-1.0, 1.0), (0.0, 0.5), (-5.0, 0.3), (0.9, 0.95), (-0.5, 0.0)])
def test_exponent_identities_vanish(alpha, beta):
    for name, value in exponent_residuals(alpha, beta).items():
        assert abs(value) < 1e-12, name


def test_initial_window_rescales_to_c_p(sqrt_params):
    w0 = initial_window(sqrt_params)
    gamma = derive_exponents(sqrt_params).gamma
    assert sqrt_params.p**gamma * w0 == pytest.approx(equilibrium(sqrt_params, sqrt_params.p), rel=1e-12)


def test_initial_window_integer_rounding(tcp_params):
    w0 = initial_window(tcp_params, integer=True)
    assert w0 == float(round(math.sqrt(2 * 0.99) / 0.1))
    assert w0 == int(w0)


def test_initial_window_respects_floor():
    params = tcp(p=0.01, ell=100.0)
    assert initial_window(params) == 100.0


def test_derived_constants_blocks(tcp_params, sqrt_params):
    beta_one = derived_constants(tcp_params)
    assert beta_one["mu"] is None and beta_one["sigma"] is None
    assert beta_one["c0"] == pytest.approx(math.sqrt(2.0))
    below = derived_constants(sqrt_params)
    assert below["stationary_variance"] == pytest.approx(1.0)
    assert below["c_p"] == pytest.approx(0.99**2)


def test_equilibrium_rejects_bad_p(tcp_params):
    with pytest.raises(POutOfRange):
        equilibrium(tcp_params, 1.0)


@pytest.mark.parametrize("params", [tcp(p=0.01), ModelParams(c1=2.0, c2=1.0, alpha=0.0, beta=0.5, ell=0.01, p=0.01)])
def test_equilibrium_decreasing_in_p_and_continuous_at_zero(params):
    ps = np.concatenate([[0.0], np.logspace(-12, -0.01, 200)])
    values = np.array([equilibrium(params, p) for p in ps])
    assert np.all(np.diff(values) < 0)
    c0 = equilibrium(params, 0.0)
    for p in (1e-6, 1e-9, 1e-12):
        assert abs(equilibrium(params, p) - c0) <= 10 * p * c0
