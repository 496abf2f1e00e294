"""The discrete congestion-window chain and its rescaled embeddings.

One step of the chain is

    W' = max(W + c1 * W**alpha, ell)   on success,
    W' = max(W - c2 * W**beta,  ell)   on loss (probability p).

Whenever the floor clamps, the shortfall ``ell - (pre-clamp value)`` is added
to the reflection mass (the chain's local time at the floor).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Mapping

import numpy as np

from . import kernels
from .config import settings
from .errors import GridMismatch, HorizonTooLarge, InvalidArgument, NonFiniteWindow
from .metrics import CHAIN_REFLECTIONS, CHAIN_STEPS
from .params import ModelParams, derive_exponents
from .rng import RngStream
from .stats import EmpiricalDistribution

logger = logging.getLogger(__name__)

_EMPTY = np.empty(0)


@dataclass(frozen=True)
class ChainState:
    w: float
    step_index: int = 0
    reflection_count: int = 0
    reflection_mass: float = 0.0


@dataclass(frozen=True, eq=False)
class PathSample:
    """A trajectory sampled on a strictly increasing time grid."""

    times: np.ndarray
    values: np.ndarray
    diagnostics: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float).copy()
        values = np.asarray(self.values, dtype=float).copy()
        if times.ndim != 1 or values.ndim != 1 or times.shape != values.shape:
            raise InvalidArgument(f"times and values must be 1-d of equal length, got {times.shape} and {values.shape}")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise InvalidArgument("times must be strictly increasing")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def terminal(self) -> float:
        return float(self.values[-1])

    @classmethod
    def constant(cls, times: np.ndarray, value: float) -> "PathSample":
        return cls(times, np.full(np.shape(times), float(value)))

    def sample_left(self, times: np.ndarray) -> np.ndarray:
        """Values at ``times`` by nearest-left lookup (right-continuous step reading)."""
        t = np.asarray(times, dtype=float)
        span = max(1.0, float(self.times[-1]))
        # tolerate representation error when grids are built from different step sizes
        idx = np.searchsorted(self.times, t + 1e-9 * span, side="right") - 1
        if np.any(idx < 0):
            raise InvalidArgument("requested times precede the start of the path")
        return self.values[idx]

    def same_grid(self, other: "PathSample") -> bool:
        return self.times.shape == other.times.shape and bool(np.array_equal(self.times, other.times))


@dataclass(frozen=True, eq=False)
class ChainTrajectory:
    """Every window value of one run (``windows[0]`` is the start) plus the final state."""

    windows: np.ndarray
    final: ChainState
    losses: int


def time_grid(horizon: float, dt: float) -> np.ndarray:
    """0, dt, 2dt, ... up to and including ``horizon``."""
    if not horizon >= 0 or not math.isfinite(horizon):
        raise InvalidArgument(f"horizon must be finite and nonnegative, got {horizon}")
    if not dt > 0:
        raise InvalidArgument(f"grid step must be positive, got {dt}")
    n = int(math.floor(horizon / dt + 1e-9))
    times = np.arange(n + 1, dtype=float) * dt
    if horizon - times[-1] > 1e-12 * max(1.0, horizon):
        times = np.append(times, horizon)
    else:
        times[-1] = horizon
    return times


def step(state: ChainState, params: ModelParams, loss: bool) -> ChainState:
    w = state.w
    if loss:
        pre = w - params.c2 * w**params.beta
    else:
        pre = w + params.c1 * w**params.alpha
    if not abs(pre) <= kernels.WINDOW_OVERFLOW:
        raise NonFiniteWindow(f"window left the finite range at step {state.step_index + 1}: {pre!r}")
    if pre < params.ell:
        return ChainState(
            w=params.ell,
            step_index=state.step_index + 1,
            reflection_count=state.reflection_count + 1,
            reflection_mass=state.reflection_mass + (params.ell - pre),
        )
    return replace(state, w=pre, step_index=state.step_index + 1)


def _check_start(params: ModelParams, w0: float) -> float:
    w0 = float(w0)
    if not math.isfinite(w0) or w0 < params.ell:
        raise InvalidArgument(f"initial window must be finite and at least ell={params.ell}, got {w0}")
    if w0 <= 0:
        raise InvalidArgument("initial window must be positive")
    return w0


class _ChainRunner:
    """Advances one chain, drawing its loss uniforms in blocks from a stream."""

    def __init__(self, params: ModelParams, w0: float, rng: RngStream, chunk: int | None = None) -> None:
        self.params = params
        self.gen = rng.generator()
        self.chunk = max(1, int(chunk or settings.chunk))
        self.w = _check_start(params, w0)
        self.steps = 0
        self.reflections = 0
        self.reflection_mass = 0.0
        self.losses = 0

    def advance(self, n: int, thin: int = 0, out: np.ndarray | None = None) -> int:
        """Take ``n`` steps; with ``thin > 0`` every thin-th window goes to ``out``."""
        p = self.params
        recorded_total = 0
        remaining = int(n)
        start_steps = self.steps
        while remaining > 0:
            k = min(remaining, self.chunk)
            u = self.gen.random(k)
            sink = _EMPTY if out is None else out[recorded_total:]
            offset = self.steps - start_steps
            w, refl, mass, losses, recorded, bad = kernels.advance_chain(
                self.w, u, p.p, p.c1, p.c2, p.alpha, p.beta, p.ell, thin, offset, sink
            )
            if bad >= 0:
                raise NonFiniteWindow(
                    f"window left the finite range at step {self.steps + bad + 1} (last finite value {w!r})"
                )
            self.w = w
            self.steps += k
            self.reflections += refl
            self.reflection_mass += mass
            self.losses += losses
            recorded_total += recorded
            remaining -= k
        CHAIN_STEPS.inc(n)
        return recorded_total

    def state(self) -> ChainState:
        return ChainState(self.w, self.steps, self.reflections, self.reflection_mass)

    def flush_metrics(self) -> None:
        if self.reflections:
            CHAIN_REFLECTIONS.inc(self.reflections)


def simulate_path(params: ModelParams, w0: float, n_steps: int, rng: RngStream) -> ChainTrajectory:
    if n_steps < 0:
        raise InvalidArgument(f"n_steps must be nonnegative, got {n_steps}")
    runner = _ChainRunner(params, w0, rng)
    windows = np.empty(n_steps + 1)
    windows[0] = runner.w
    runner.advance(n_steps, thin=1, out=windows[1:])
    runner.flush_metrics()
    return ChainTrajectory(windows=windows, final=runner.state(), losses=runner.losses)


def _steps_at(t: np.ndarray | float, time_scale: float) -> np.ndarray:
    # guard against t * p^-nu landing a hair below an integer
    x = np.asarray(t, dtype=float) * time_scale
    return np.floor(x + 1e-12 * np.maximum(1.0, x)).astype(np.int64)


def _step_plan(params: ModelParams, horizon: float, step_budget: int | None) -> tuple[float, float, int]:
    e = derive_exponents(params)
    space_scale = params.p**e.gamma
    time_scale = params.p**-e.nu
    total = int(_steps_at(horizon, time_scale))
    budget = settings.step_budget if step_budget is None else step_budget
    if total > budget:
        raise HorizonTooLarge(
            f"horizon {horizon} needs {total} chain steps at p={params.p}, budget is {budget}"
        )
    return space_scale, time_scale, total


def rescaled_path(
    params: ModelParams,
    w0: float,
    horizon: float,
    grid_dt: float,
    rng: RngStream,
    *,
    step_budget: int | None = None,
) -> PathSample:
    """Z_p(t) = p^gamma * W_floor(t p^-nu) on the grid 0, grid_dt, ..., horizon.

    Only grid snapshots are kept. ``diagnostics`` carries the raw reflection
    count, the rescaled local time p^gamma * sum(Lambda) and the rescaled loss
    count p^(nu-1) * sum(chi) at the horizon.
    """
    if not horizon > 0:
        raise InvalidArgument(f"horizon must be positive, got {horizon}")
    space_scale, time_scale, total = _step_plan(params, horizon, step_budget)
    times = time_grid(horizon, grid_dt)
    marks = _steps_at(times, time_scale)
    marks[-1] = total

    runner = _ChainRunner(params, w0, rng)
    values = np.empty(times.size)
    for k, mark in enumerate(marks):
        runner.advance(int(mark) - runner.steps)
        values[k] = space_scale * runner.w
    runner.flush_metrics()

    nu = derive_exponents(params).nu
    diagnostics: Dict[str, float] = {
        "steps": float(runner.steps),
        "reflection_count": float(runner.reflections),
        "local_time": space_scale * runner.reflection_mass,
        "loss_measure": params.p ** (nu - 1.0) * runner.losses,
    }
    return PathSample(times, values, diagnostics)


def rescaled_terminal(
    params: ModelParams,
    w0: float,
    horizon: float,
    rng: RngStream,
    *,
    step_budget: int | None = None,
) -> tuple[float, ChainState]:
    """Z_p(horizon) without any grid; the workhorse of replicate-heavy scenarios."""
    if not horizon >= 0:
        raise InvalidArgument(f"horizon must be nonnegative, got {horizon}")
    space_scale, _, total = _step_plan(params, horizon, step_budget)
    runner = _ChainRunner(params, w0, rng)
    runner.advance(total)
    runner.flush_metrics()
    return space_scale * runner.w, runner.state()


def fluctuation_path(params: ModelParams, zeta_p_path: PathSample, z_p_path: PathSample) -> PathSample:
    """xi_p(t) = p^-tau (Z_p(t) - zeta_p(t)) on the shared grid."""
    if not zeta_p_path.same_grid(z_p_path):
        raise GridMismatch("Z_p and zeta_p must be sampled on the same time grid")
    tau = derive_exponents(params).tau
    values = params.p**-tau * (z_p_path.values - zeta_p_path.values)
    return PathSample(z_p_path.times, values, dict(z_p_path.diagnostics))


def stationary_sample(
    params: ModelParams,
    w0: float,
    burn_in: int,
    n_samples: int,
    thin: int,
    rng: RngStream,
) -> EmpiricalDistribution:
    """Raw windows W_{burn_in + j*thin}, j = 0..n_samples-1.

    Values are unscaled; callers apply p^gamma or the fluctuation centering.
    """
    if burn_in < 0:
        raise InvalidArgument(f"burn_in must be nonnegative, got {burn_in}")
    if thin < 1:
        raise InvalidArgument(f"thin must be at least 1, got {thin}")
    if n_samples < 2:
        raise InvalidArgument(f"n_samples must be at least 2, got {n_samples}")
    runner = _ChainRunner(params, w0, rng)
    runner.advance(burn_in)
    out = np.empty(n_samples)
    out[0] = runner.w
    recorded = runner.advance((n_samples - 1) * thin, thin=thin, out=out[1:])
    runner.flush_metrics()
    assert recorded == n_samples - 1
    logger.debug(
        "stationary_sample p=%s burn_in=%d thin=%d n=%d reflections=%d",
        params.p, burn_in, thin, n_samples, runner.reflections,
    )
    return EmpiricalDistribution.from_samples(out)
