"""Model parameters of the generalized congestion-avoidance chain and every
constant derived from them.

A chain is fixed by ``(c1, c2, alpha, beta, ell, p)``: on success the window
grows by ``c1 * W**alpha``, on loss it shrinks by ``c2 * W**beta``, and it is
never allowed below the floor ``ell``. ``p`` is the per-packet loss
probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping

from .errors import (
    AlphaNotBelowBeta,
    BetaAboveOne,
    BetaBelowOneRequiresPositiveFloor,
    BetaMustBeBelowOne,
    BetaOneRequiresC2LessThanOne,
    NegativeFloor,
    NonPositiveCoefficient,
    ParamsError,
    POutOfRange,
)

CROSS_FORM_RTOL = 1e-10


def _check_assumptions(c1: float, c2: float, alpha: float, beta: float, ell: float, p: float) -> None:
    for name, value in (("c1", c1), ("c2", c2), ("alpha", alpha), ("beta", beta), ("ell", ell), ("p", p)):
        if not math.isfinite(value):
            raise ParamsError(f"{name} must be finite, got {value!r}")
    if c1 <= 0 or c2 <= 0:
        raise NonPositiveCoefficient(f"c1 and c2 must be positive, got c1={c1}, c2={c2}")
    if not alpha < beta:
        raise AlphaNotBelowBeta(f"alpha must be strictly below beta, got alpha={alpha}, beta={beta}")
    if beta > 1:
        raise BetaAboveOne(f"beta must not exceed 1, got {beta}")
    if ell < 0:
        raise NegativeFloor(f"window floor must be nonnegative, got ell={ell}")
    if beta == 1 and not c2 < 1:
        raise BetaOneRequiresC2LessThanOne(f"beta=1 requires c2 < 1, got c2={c2}")
    if beta < 1 and not ell > 0:
        raise BetaBelowOneRequiresPositiveFloor(f"beta<1 requires a positive floor, got ell={ell}")
    if not 0 < p < 1:
        raise POutOfRange(f"loss probability must lie in (0, 1), got p={p}")


@dataclass(frozen=True)
class ModelParams:
    c1: float
    c2: float
    alpha: float
    beta: float
    ell: float
    p: float

    def __post_init__(self) -> None:
        for name in ("c1", "c2", "alpha", "beta", "ell", "p"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _check_assumptions(self.c1, self.c2, self.alpha, self.beta, self.ell, self.p)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ModelParams":
        return cls(
            c1=data["c1"],
            c2=data["c2"],
            alpha=data["alpha"],
            beta=data["beta"],
            ell=data.get("ell", 0.0),
            p=data["p"],
        )

    def with_p(self, p: float) -> "ModelParams":
        return ModelParams(self.c1, self.c2, self.alpha, self.beta, self.ell, p)

    def as_dict(self) -> Dict[str, float]:
        return {"c1": self.c1, "c2": self.c2, "alpha": self.alpha, "beta": self.beta, "ell": self.ell, "p": self.p}


@dataclass(frozen=True)
class ScalingExponents:
    gamma: float
    nu: float
    tau: float


@dataclass(frozen=True)
class OuCoefficients:
    mu: float
    sigma: float
    stationary_variance: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise ParamsError(f"OU mean-reversion rate must be positive, got mu={self.mu}")
        if not self.sigma >= 0:
            raise ParamsError(f"OU diffusion coefficient must be nonnegative, got sigma={self.sigma}")
        object.__setattr__(self, "stationary_variance", self.sigma**2 / (2.0 * self.mu))


def validate(params: ModelParams) -> ModelParams:
    """Re-check the standing assumptions and hand the params back unchanged."""
    _check_assumptions(params.c1, params.c2, params.alpha, params.beta, params.ell, params.p)
    return params


def tcp(p: float, ell: float = 0.0) -> ModelParams:
    return ModelParams(c1=1.0, c2=0.5, alpha=-1.0, beta=1.0, ell=ell, p=p)


def scalable_tcp(p: float, c1: float = 1.0, c2: float = 0.5, ell: float = 0.0) -> ModelParams:
    return ModelParams(c1=c1, c2=c2, alpha=0.0, beta=1.0, ell=ell, p=p)


def exponents_for(alpha: float, beta: float) -> ScalingExponents:
    gamma = 1.0 / (beta - alpha)
    # (1 - alpha) / (beta - alpha) is exactly 1 when beta == 1.
    nu = (1.0 - alpha) / (beta - alpha)
    tau = (nu - 1.0) / 2.0
    return ScalingExponents(gamma=gamma, nu=nu, tau=tau)


def derive_exponents(params: ModelParams) -> ScalingExponents:
    return exponents_for(params.alpha, params.beta)


def equilibrium_value(c1: float, c2: float, alpha: float, beta: float, at_p: float = 0.0) -> float:
    if not 0 <= at_p < 1:
        raise POutOfRange(f"equilibrium is defined for p in [0, 1), got {at_p}")
    return (c1 * (1.0 - at_p) / c2) ** (1.0 / (beta - alpha))


def equilibrium(params: ModelParams, at_p: float = 0.0) -> float:
    """Invariant point c_p of the perturbed fluid ODE; ``at_p=0`` gives c0."""
    return equilibrium_value(params.c1, params.c2, params.alpha, params.beta, at_p)


def initial_window(params: ModelParams, integer: bool = False) -> float:
    """Raw window whose rescaled value is exactly c_p."""
    gamma = derive_exponents(params).gamma
    w0 = equilibrium(params, params.p) * params.p**-gamma
    if integer:
        w0 = float(max(round(w0), 1))
    return max(w0, params.ell)


def _rel_close(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b))


def mu_forms(params: ModelParams) -> tuple[float, float]:
    c1, c2, a, b = params.c1, params.c2, params.alpha, params.beta
    gamma = 1.0 / (b - a)
    ratio = c1 / c2
    unsimplified = c2 * b * ratio ** (gamma * (b - 1.0)) - c1 * a * ratio ** (gamma * (a - 1.0))
    simplified = (b - a) * c1 ** (-(1.0 - b) / (b - a)) * c2 ** ((1.0 - a) / (b - a))
    return unsimplified, simplified


def sigma_forms(params: ModelParams) -> tuple[float, float]:
    c1, c2, a, b = params.c1, params.c2, params.alpha, params.beta
    gamma = 1.0 / (b - a)
    unsimplified = c2 * (c1 / c2) ** (gamma * b)
    simplified = c1 ** (b / (b - a)) * c2 ** (-a / (b - a))
    return unsimplified, simplified


def ou_coefficients(params: ModelParams) -> OuCoefficients:
    if not params.beta < 1:
        raise BetaMustBeBelowOne(f"the OU limit exists only for beta < 1, got beta={params.beta}")
    mu_raw, mu = mu_forms(params)
    if not _rel_close(mu_raw, mu, CROSS_FORM_RTOL):
        raise RuntimeError(f"mu cross-form disagreement: {mu_raw!r} vs {mu!r} for {params}")
    sigma_raw, sigma = sigma_forms(params)
    if not _rel_close(sigma_raw, sigma, CROSS_FORM_RTOL):
        raise RuntimeError(f"sigma cross-form disagreement: {sigma_raw!r} vs {sigma!r} for {params}")
    return OuCoefficients(mu=mu, sigma=sigma)


def exponent_residuals(alpha: float, beta: float) -> Dict[str, float]:
    """Residuals of the exponent identities used in the generator estimates.

    Every value is zero for valid ``(alpha, beta)`` up to rounding.
    """
    e = exponents_for(alpha, beta)
    g, nu, tau = e.gamma, e.nu, e.tau
    out = {
        "increment_balance": -nu + g - g * alpha,
        "decrement_balance": -nu + 1 + g - g * beta,
        "increment_second_order": (-nu + 2 * g - 2 * tau - 2 * g * alpha) - 1,
        "decrement_second_order": -nu + 1 + 2 * g - 2 * tau - 2 * g * beta,
        "nu_minus_tau": (nu - tau) - (nu + 1) / 2,
    }
    for r in (2, 3, 4):
        out[f"decrement_order_{r}"] = (-nu + 1 + r * g - r * tau - r * g * beta) - tau * (r - 2)
        out[f"increment_order_{r}"] = (-nu + r * g - r * tau - r * g * alpha) - (r - 1 + tau * (r - 2))
    return out


def derived_constants(params: ModelParams) -> Dict[str, float | None]:
    """Everything ``paradigm-lab params`` prints for one parameter set."""
    e = derive_exponents(params)
    out: Dict[str, float | None] = {
        "gamma": e.gamma,
        "nu": e.nu,
        "tau": e.tau,
        "c_p": equilibrium(params, params.p),
        "c0": equilibrium(params, 0.0),
        "w0_equilibrium": initial_window(params),
        "mu": None,
        "sigma": None,
        "stationary_variance": None,
    }
    if params.beta < 1:
        ou = ou_coefficients(params)
        out.update(mu=ou.mu, sigma=ou.sigma, stationary_variance=ou.stationary_variance)
    return out
