"""Limit processes of the rescaled chain as p -> 0.

beta = 1: a piecewise-deterministic process that follows dz = c1 z^alpha dt
between the events of a unit-rate Poisson process and is multiplied by
(1 - c2) at each event. It is simulated exactly, event by event.

beta < 1: the fluid path zeta (an ODE), the Gaussian fluctuation process xi
around it, and the Ornstein-Uhlenbeck process xi reduces to when zeta sits at
its equilibrium.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Protocol, Tuple

import numpy as np

from . import kernels
from .chain import PathSample, time_grid
from .errors import (
    BetaMustBeBelowOne,
    BetaMustBeOne,
    GridTooCoarse,
    InvalidArgument,
    NonPositiveState,
)
from .metrics import LIMIT_JUMPS
from .params import ModelParams, OuCoefficients, equilibrium, equilibrium_value
from .rng import RngStream
from .stats import EmpiricalDistribution, NormalLaw

logger = logging.getLogger(__name__)

DEFAULT_SOLVER_DT = 1e-3
DEFAULT_EQUILIBRIUM_TOL = 1e-6


class DriftCoefficients(Protocol):
    c1: float
    c2: float
    alpha: float
    beta: float


@dataclass(frozen=True, eq=False)
class PoissonLimitPath:
    jump_times: np.ndarray
    values_before_jump: np.ndarray
    path: PathSample


@dataclass(frozen=True, eq=False)
class OdeSolution:
    path: PathSample
    equilibrium_reached: bool
    target: float
    error_estimate: float | None = None


# -- beta = 1 ----------------------------------------------------------------


def flow_map(z0: float, c1: float, alpha: float, dt: float) -> float:
    """Exact solution of dz = c1 z^alpha dt after time ``dt`` from ``z0``."""
    if not z0 > 0:
        raise InvalidArgument(f"flow_map needs z0 > 0, got {z0}")
    if not dt >= 0:
        raise InvalidArgument(f"flow_map needs dt >= 0, got {dt}")
    if not alpha < 1:
        raise InvalidArgument(f"flow_map needs alpha < 1, got {alpha}")
    if dt == 0:
        return z0
    k = 1.0 - alpha
    return (c1 * k * dt + z0**k) ** (1.0 / k)


def _require_beta_one(params: ModelParams) -> None:
    if params.beta != 1:
        raise BetaMustBeOne(f"the Poisson-driven limit needs beta = 1, got beta={params.beta}")


def _poisson_walk(
    params: ModelParams,
    z0: float,
    sample_times: np.ndarray,
    gen: np.random.Generator,
    keep_jumps: bool,
) -> Tuple[np.ndarray, List[float], List[float]]:
    c1, alpha, shrink = params.c1, params.alpha, 1.0 - params.c2
    n = sample_times.size
    values = np.empty(n)
    jump_times: List[float] = []
    before: List[float] = []
    t, z, k, jumps = 0.0, float(z0), 0, 0
    while True:
        t_next = t + gen.standard_exponential()
        # right-continuous: a sample at exactly t_next sees the post-jump value
        while k < n and sample_times[k] < t_next:
            values[k] = flow_map(z, c1, alpha, sample_times[k] - t)
            k += 1
        if k >= n:
            break
        z_minus = flow_map(z, c1, alpha, t_next - t)
        if keep_jumps:
            jump_times.append(t_next)
            before.append(z_minus)
        z = shrink * z_minus
        t = t_next
        jumps += 1
    LIMIT_JUMPS.inc(jumps)
    return values, jump_times, before


def simulate_poisson_limit(
    params: ModelParams, z0: float, horizon: float, grid_dt: float, rng: RngStream
) -> PoissonLimitPath:
    _require_beta_one(params)
    if not z0 > 0:
        raise InvalidArgument(f"the Poisson-driven limit starts from z0 > 0, got {z0}")
    times = time_grid(horizon, grid_dt)
    values, jump_times, before = _poisson_walk(params, z0, times, rng.generator(), keep_jumps=True)
    return PoissonLimitPath(
        jump_times=np.asarray(jump_times, dtype=float),
        values_before_jump=np.asarray(before, dtype=float),
        path=PathSample(times, values, {"jumps": float(len(jump_times))}),
    )


def poisson_hitting_time(
    params: ModelParams, z0: float, target: float, horizon: float, rng: RngStream
) -> float:
    """First time the beta=1 limit equals ``target``; ``inf`` if not before ``horizon``.

    Downward moves happen only at events, so the level is reached along the
    increasing flow and the crossing time is solved in closed form.
    """
    _require_beta_one(params)
    if not z0 > 0 or not target > 0:
        raise InvalidArgument(f"z0 and target must be positive, got {z0} and {target}")
    c1, alpha, shrink = params.c1, params.alpha, 1.0 - params.c2
    k = 1.0 - alpha
    gen = rng.generator()
    t, z, jumps = 0.0, float(z0), 0
    try:
        while t <= horizon:
            if z == target:
                return t
            gap = gen.standard_exponential()
            if z < target:
                needed = (target**k - z**k) / (c1 * k)
                if needed <= gap:
                    hit = t + needed
                    return hit if hit <= horizon else math.inf
            z = shrink * flow_map(z, c1, alpha, gap)
            t += gap
            jumps += 1
        return math.inf
    finally:
        LIMIT_JUMPS.inc(jumps)


def poisson_stationary_sample(
    params: ModelParams,
    z0: float,
    burn_in_time: float,
    n_samples: int,
    spacing: float,
    rng: RngStream,
) -> EmpiricalDistribution:
    """Values of one long beta=1 limit path at burn_in_time + j*spacing."""
    _require_beta_one(params)
    if not z0 > 0:
        raise InvalidArgument(f"z0 must be positive, got {z0}")
    if burn_in_time < 0 or not spacing > 0 or n_samples < 2:
        raise InvalidArgument("need burn_in_time >= 0, spacing > 0 and n_samples >= 2")
    times = burn_in_time + spacing * np.arange(n_samples, dtype=float)
    values, _, _ = _poisson_walk(params, z0, times, rng.generator(), keep_jumps=False)
    return EmpiricalDistribution.from_samples(values)


# -- beta < 1: fluid path ----------------------------------------------------


def rk4(f: Callable, y0: float | np.ndarray, times: np.ndarray) -> np.ndarray:
    """Classical RK4 for an autonomous, strictly positive scalar ODE on ``times``.

    ``y0`` may be an array of independent initial values when ``f`` is
    elementwise; the result then has one column per value.
    """

    def positive(y, at: float):
        if not np.all(y > 0):
            raise NonPositiveState(f"ODE state reached {np.min(y)!r} near t={at}; reduce dt")
        return y

    y = np.asarray(y0, dtype=float)
    ys = np.empty((times.size,) + y.shape)
    ys[0] = positive(y, 0.0)
    for i in range(times.size - 1):
        t, h = times[i], times[i + 1] - times[i]
        k1 = f(y)
        k2 = f(positive(y + 0.5 * h * k1, t))
        k3 = f(positive(y + 0.5 * h * k2, t))
        k4 = f(positive(y + h * k3, t))
        y = positive(y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), t + h)
        ys[i + 1] = y
    return ys


def _zeta_rhs(coeffs: DriftCoefficients, p_factor: float) -> Callable[[float], float]:
    c1 = coeffs.c1 * (1.0 - p_factor)
    c2, alpha, beta = coeffs.c2, coeffs.alpha, coeffs.beta
    return lambda z: c1 * z**alpha - c2 * z**beta


def solve_zeta(
    coeffs: DriftCoefficients,
    zeta0: float,
    p_factor: float,
    horizon: float,
    dt: float = DEFAULT_SOLVER_DT,
    *,
    tolerance: float = DEFAULT_EQUILIBRIUM_TOL,
    estimate_error: bool = False,
) -> OdeSolution:
    """Fixed-step RK4 for zeta' = c1 (1 - p_factor) zeta^alpha - c2 zeta^beta.

    ``p_factor = 0`` gives the fluid limit zeta, ``p_factor = p`` its perturbed
    version zeta_p. With ``estimate_error`` the run is repeated at dt/2 and the
    Richardson estimate of the error at the horizon is attached.
    """
    if not zeta0 > 0:
        raise InvalidArgument(f"zeta0 must be positive, got {zeta0}")
    if not 0 <= p_factor < 1:
        raise InvalidArgument(f"p_factor must lie in [0, 1), got {p_factor}")
    rhs = _zeta_rhs(coeffs, p_factor)
    times = time_grid(horizon, dt)
    ys = rk4(rhs, float(zeta0), times)
    target = equilibrium_value(coeffs.c1, coeffs.c2, coeffs.alpha, coeffs.beta, p_factor)
    error = None
    if estimate_error:
        fine = rk4(rhs, float(zeta0), time_grid(horizon, dt / 2.0))
        error = abs(ys[-1] - fine[-1]) * 16.0 / 15.0
    return OdeSolution(
        path=PathSample(times, ys),
        equilibrium_reached=bool(abs(ys[-1] - target) < tolerance),
        target=target,
        error_estimate=error,
    )


def equilibrium_solution(params: ModelParams, p_factor: float, horizon: float, dt: float = DEFAULT_SOLVER_DT) -> OdeSolution:
    """The invariant solution zeta_p == c_{p_factor}, without integrating."""
    c = equilibrium(params, p_factor)
    return OdeSolution(path=PathSample.constant(time_grid(horizon, dt), c), equilibrium_reached=True, target=c)


# -- beta < 1: fluctuations --------------------------------------------------


def simulate_xi(
    zeta_path: OdeSolution,
    params: ModelParams,
    xi0: float,
    horizon: float,
    dt: float,
    rng: RngStream,
) -> PathSample:
    """Euler-Maruyama for d xi = (c1 a zeta^(a-1) - c2 b zeta^(b-1)) xi dt - c2 zeta^b dB.

    zeta is read from ``zeta_path`` by nearest-left lookup.
    """
    if not params.beta < 1:
        raise BetaMustBeBelowOne(f"the fluctuation SDE is defined for beta < 1, got beta={params.beta}")
    times = time_grid(horizon, dt)
    zt = zeta_path.path.times
    if zt.size > 1 and float(np.max(np.diff(zt))) > dt * (1.0 + 1e-9):
        raise GridTooCoarse(f"zeta grid step {float(np.max(np.diff(zt)))} is coarser than dt={dt}")
    if zt[-1] < horizon - 1e-9 * max(1.0, horizon):
        raise GridTooCoarse(f"zeta path ends at {zt[-1]}, before the horizon {horizon}")
    if times.size == 1:
        return PathSample(times, [float(xi0)])

    h = np.diff(times)
    z = zeta_path.path.sample_left(times[:-1])
    a, b = params.alpha, params.beta
    drift = params.c1 * a * z ** (a - 1.0) - params.c2 * b * z ** (b - 1.0)
    diffusion = -params.c2 * z**b
    normals = rng.generator().standard_normal(h.size)
    xs = kernels.affine_recursion(float(xi0), 1.0 + drift * h, diffusion * np.sqrt(h), normals)
    return PathSample(times, xs)


def simulate_ou(coeffs: OuCoefficients, xi0: float, horizon: float, dt: float, rng: RngStream) -> PathSample:
    """Exact transition sampling of d xi = -mu xi dt + sigma dW on the grid."""
    times = time_grid(horizon, dt)
    if times.size == 1:
        return PathSample(times, [float(xi0)])
    h = np.diff(times)
    mu, sigma = coeffs.mu, coeffs.sigma
    decay = np.exp(-mu * h)
    scale = sigma * np.sqrt(-np.expm1(-2.0 * mu * h) / (2.0 * mu))
    normals = rng.generator().standard_normal(h.size)
    return PathSample(times, kernels.affine_recursion(float(xi0), decay, scale, normals))


def ou_stationary_law(coeffs: OuCoefficients) -> NormalLaw:
    return NormalLaw(mean=0.0, variance=coeffs.stationary_variance)


def ou_marginal_law(coeffs: OuCoefficients, xi0: float, t: float) -> NormalLaw:
    """Law of xi(t) given xi(0) = xi0."""
    if not t >= 0:
        raise InvalidArgument(f"t must be nonnegative, got {t}")
    return NormalLaw(
        mean=xi0 * math.exp(-coeffs.mu * t),
        variance=coeffs.stationary_variance * -math.expm1(-2.0 * coeffs.mu * t),
    )
