import math

import numpy as np
import pytest

from paradigmlab import chain as chain_mod
from paradigmlab.chain import (
    ChainState,
    PathSample,
    fluctuation_path,
    rescaled_path,
    rescaled_terminal,
    simulate_path,
    stationary_sample,
    step,
    time_grid,
)
from paradigmlab.config import settings
from paradigmlab.errors import GridMismatch, HorizonTooLarge, InvalidArgument, NonFiniteWindow
from paradigmlab.params import ModelParams, derive_exponents, initial_window, tcp
from paradigmlab.rng import RngStream


def _fold(params, w0, uniforms):
    state = ChainState(w0)
    out = [w0]
    for u in uniforms:
        state = step(state, params, bool(u < params.p))
        out.append(state.w)
    return np.array(out), state


def test_step_success_and_loss(tcp_params):
    up = step(ChainState(4.0), tcp_params, loss=False)
    assert up.w == 4.25 and up.step_index == 1
    down = step(ChainState(4.0), tcp_params, loss=True)
    assert down.w == 2.0 and down.reflection_count == 0


def test_step_reflects_at_floor():
    params = tcp(p=0.01, ell=1.0)
    s = step(ChainState(1.0), params, loss=True)
    assert s.w == 1.0
    assert s.reflection_count == 1
    assert s.reflection_mass == 0.5


def test_beta_below_one_loss_can_clamp(sqrt_params):
    s = step(ChainState(0.25), sqrt_params, loss=True)
    assert s.w == sqrt_params.ell
    assert s.reflection_mass == pytest.approx(0.01 + 0.25)


def test_step_overflow_raises():
    params = ModelParams(c1=1e300, c2=0.5, alpha=0.0, beta=1.0, ell=0.0, p=0.5)
    with pytest.raises(NonFiniteWindow):
        step(ChainState(1e300), params, loss=False)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_simulate_path_matches_python_fold(seed):
    params = ModelParams(c1=1.0, c2=0.5, alpha=-1.0, beta=1.0, ell=1.0, p=0.3)
    uniforms = RngStream(seed, 9).generator().random(20)
    expected, final = _fold(params, 2.0, uniforms)
    traj = simulate_path(params, 2.0, 20, RngStream(seed, 9))
    assert np.array_equal(traj.windows, expected)
    assert traj.final == final
    assert traj.losses == int(np.sum(uniforms < params.p))


def test_simulate_path_no_loss_trajectory():
    params = tcp(p=1e-9)
    rng = RngStream(0)
    assert np.all(rng.generator().random(3) >= params.p)
    traj = simulate_path(params, 1.0, 3, rng)
    assert list(traj.windows) == pytest.approx([1.0, 2.0, 2.5, 2.9], rel=1e-15)
    assert traj.losses == 0


def test_simulate_path_long_run_repeats_bit_exactly():
    params = tcp(p=0.01)
    a = simulate_path(params, 100.0, 10**6, RngStream(123, 4))
    b = simulate_path(params, 100.0, 10**6, RngStream(123, 4))
    assert a.final == b.final
    assert np.array_equal(a.windows, b.windows)


@pytest.mark.parametrize(
    "params",
    [
        tcp(p=0.01),
        ModelParams(c1=1.0, c2=1.0, alpha=0.0, beta=0.5, ell=0.01, p=0.01),
        ModelParams(c1=0.3, c2=0.5, alpha=0.8, beta=1.0, ell=0.0, p=0.01),
    ],
)
def test_windows_grow_strictly_without_losses(params):
    state = ChainState(0.5)
    for _ in range(500):
        nxt = step(state, params, loss=False)
        assert nxt.w > state.w
        state = nxt
    assert state.reflection_count == 0


def test_floor_is_dormant_from_equilibrium():
    params = tcp(p=1e-3, ell=1.0)
    w0 = initial_window(params)
    for r in range(50):
        _, state = rescaled_terminal(params, w0, horizon=10.0, rng=RngStream(40, r))
        assert state.step_index == 10_000
        assert state.reflection_count == 0


def test_simulate_path_block_size_does_not_matter(monkeypatch, sqrt_params):
    rng = RngStream(3, 1)
    big = simulate_path(sqrt_params, 50.0, 5000, rng)
    monkeypatch.setattr(settings, "chunk", 7)
    small = simulate_path(sqrt_params, 50.0, 5000, rng)
    assert np.array_equal(big.windows, small.windows)
    assert big.final == small.final


def test_simulate_path_zero_steps(tcp_params):
    traj = simulate_path(tcp_params, 3.0, 0, RngStream(0))
    assert list(traj.windows) == [3.0]
    assert traj.final == ChainState(3.0)


def test_start_below_floor_rejected():
    with pytest.raises(InvalidArgument):
        simulate_path(tcp(p=0.01, ell=2.0), 1.0, 5, RngStream(0))


def test_time_grid_includes_horizon():
    assert list(time_grid(1.0, 0.3)) == pytest.approx([0.0, 0.3, 0.6, 0.9, 1.0])
    grid = time_grid(1.0, 0.1)
    assert grid.size == 11 and grid[-1] == 1.0
    assert list(time_grid(0.0, 0.1)) == [0.0]


def test_path_sample_validation():
    with pytest.raises(InvalidArgument):
        PathSample(np.array([0.0, 0.0]), np.array([1.0, 2.0]))
    with pytest.raises(InvalidArgument):
        PathSample(np.array([0.0, 1.0]), np.array([1.0]))
    path = PathSample(np.array([0.0, 1.0, 2.0]), np.array([5.0, 6.0, 7.0]))
    assert list(path.sample_left(np.array([0.0, 0.5, 1.0, 2.5]))) == [5.0, 5.0, 6.0, 7.0]
    with pytest.raises(InvalidArgument):
        path.sample_left(np.array([-1.0]))


def test_rescaled_path_start_and_diagnostics(tcp_params):
    w0 = 14.0
    path = rescaled_path(tcp_params, w0, horizon=2.0, grid_dt=0.5, rng=RngStream(1))
    assert list(path.times) == [0.0, 0.5, 1.0, 1.5, 2.0]
    assert path.values[0] == pytest.approx(0.1 * w0)
    assert path.diagnostics["steps"] == 200.0
    assert path.diagnostics["reflection_count"] == 0.0
    assert path.diagnostics["local_time"] == 0.0
    # loss_measure is p^(nu-1) * losses = losses for beta = 1
    assert path.diagnostics["loss_measure"] == float(int(path.diagnostics["loss_measure"]))
    assert np.all(path.values > 0)


def test_rescaled_path_terminal_matches_rescaled_terminal(sqrt_params):
    path = rescaled_path(sqrt_params, 100.0, horizon=0.5, grid_dt=0.1, rng=RngStream(4, 2))
    z, state = rescaled_terminal(sqrt_params, 100.0, horizon=0.5, rng=RngStream(4, 2))
    assert path.terminal == z
    assert state.step_index == int(path.diagnostics["steps"]) == 5000


def test_rescaled_path_grid_marks_follow_time_scale(sqrt_params):
    # p^-nu = 1e4 steps per unit time; t = 0.3 must map to step 3000, not 2999
    assert int(chain_mod._steps_at(0.3, sqrt_params.p ** -derive_exponents(sqrt_params).nu)) == 3000


def test_horizon_budget(tcp_params):
    with pytest.raises(HorizonTooLarge):
        rescaled_terminal(tcp_params, 10.0, horizon=5.0, rng=RngStream(0), step_budget=100)
    with pytest.raises(InvalidArgument):
        rescaled_path(tcp_params, 10.0, horizon=0.0, grid_dt=0.1, rng=RngStream(0))


def test_fluctuation_path(sqrt_params):
    times = np.array([0.0, 1.0, 2.0])
    z = PathSample(times, np.array([1.0, 1.1, 0.9]))
    zeta = PathSample.constant(times, 1.0)
    xi = fluctuation_path(sqrt_params, zeta, z)
    assert list(xi.values) == pytest.approx([0.0, 1.0, -1.0])
    with pytest.raises(GridMismatch):
        fluctuation_path(sqrt_params, PathSample.constant(np.array([0.0, 1.0]), 1.0), z)


def test_stationary_sample_shape_and_determinism(sqrt_params):
    a = stationary_sample(sqrt_params, 1e4, burn_in=1000, n_samples=50, thin=10, rng=RngStream(8))
    b = stationary_sample(sqrt_params, 1e4, burn_in=1000, n_samples=50, thin=10, rng=RngStream(8))
    assert a.n == 50
    assert np.array_equal(a.sorted_samples, b.sorted_samples)
    assert np.all(a.sorted_samples >= sqrt_params.ell)


def test_stationary_sample_records_thinned_trajectory(tcp_params):
    traj = simulate_path(tcp_params, 10.0, 30, RngStream(2, 5))
    sample = stationary_sample(tcp_params, 10.0, burn_in=10, n_samples=5, thin=5, rng=RngStream(2, 5))
    assert np.array_equal(sample.sorted_samples, np.sort(traj.windows[10:31:5]))


def test_stationary_sample_arguments(tcp_params):
    with pytest.raises(InvalidArgument):
        stationary_sample(tcp_params, 10.0, burn_in=0, n_samples=1, thin=1, rng=RngStream(0))
    with pytest.raises(InvalidArgument):
        stationary_sample(tcp_params, 10.0, burn_in=0, n_samples=5, thin=0, rng=RngStream(0))


def test_tcp_rescaled_start_near_c0(tcp_params):
    w0 = math.sqrt(2.0) / 0.1
    path = rescaled_path(tcp_params, w0, horizon=0.1, grid_dt=0.1, rng=RngStream(0))
    assert path.values[0] == pytest.approx(math.sqrt(2.0))
