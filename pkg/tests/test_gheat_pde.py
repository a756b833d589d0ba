'''
Tests for the explicit G-heat solver and the G-expectation evaluators built on it.
'''
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.stats import norm

from gcapacity.analysis.borel_set import BorelSetSpec, Interval
from gcapacity.analysis.capacity import CapacityParams, capacity_point, indicator_approximation, u_n
from gcapacity.errors import (ConfigurationError, DomainError, NumericalBlowupError,
                              UnsupportedSizeError, ValidationError)
from gcapacity.pde.gheat_pde import (G, GridConfig, PayoffSpec, g_expectation_1step,
                                     g_expectation_multistep, parse_payoff, residual_check, solve,
                                     solve_batch, tent, value_at, value_at_zero)


def _random_payoff(rng):
    """A bounded Lipschitz function a·tanh(bx + c) + d·cos(ex)."""
    a, d = rng.uniform(-2.0, 2.0, size=2)
    b, e = rng.uniform(0.2, 3.0, size=2)
    c = rng.uniform(-1.0, 1.0)
    return lambda x: a * np.tanh(b * x + c) + d * np.cos(e * x)


def test_G_is_the_one_sided_generator():
    p = CapacityParams(sigma_bar=2.0, sigma_under=1.0)
    np.testing.assert_allclose(G([-1.0, 0.0, 3.0], p), [-0.5, 0.0, 6.0])
    np.testing.assert_allclose(G([-1.0, 3.0], CapacityParams(1.0)), [0.0, 1.5])


@pytest.mark.parametrize("kwargs", [
    {"x_min": 0.0, "x_max": 1.0, "dx": 0.1},
    {"x_min": -1.0, "x_max": 1.0, "dx": 0.0},
    {"x_min": -1.0, "x_max": 1.0, "dx": 0.3},
    {"x_min": -1.0, "x_max": 1.0, "dx": 0.1, "boundary": "neumann"},
    {"x_min": -1.0, "x_max": 1.0, "dx": 0.1, "boundary": "dirichlet_fixed"},
    {"x_min": -1.0, "x_max": 1.0, "dx": 0.1, "safety_factor": 1.5},
])
def test_grid_validation(kwargs):
    with pytest.raises(ConfigurationError):
        GridConfig(**kwargs)


def test_grid_has_zero_as_node():
    g = GridConfig.symmetric(1.03, 0.05)
    x = g.nodes()
    assert g.n_nodes == len(x) == 43
    assert np.min(np.abs(x)) < 1e-12
    assert x[0] <= -1.03 and x[-1] >= 1.03


def test_time_step_respects_cfl(unit_params):
    g = GridConfig.symmetric(2.0, 0.1)
    dt, n_steps = g.time_step(unit_params, 1.0)
    assert dt <= 0.9 * 0.01
    np.testing.assert_allclose(dt * n_steps, 1.0)

    too_large = GridConfig.symmetric(2.0, 0.1, dt=0.02)
    with pytest.raises(ConfigurationError, match="CFL"):
        solve(lambda x: np.zeros_like(x), 1.0, unit_params, too_large)


def test_constants_are_preserved_exactly(unit_params, coarse_grid):
    solution = solve(parse_payoff("constant:3"), 1.0, unit_params, coarse_grid)
    assert np.all(solution.values == 3.0)
    assert solution.value_at() == 3.0


def test_negative_absolute_value_is_stationary(unit_params, coarse_grid):
    assert abs(g_expectation_1step(parse_payoff("neg-abs"), 0.0, 1.0, unit_params, coarse_grid)) <= 5e-3


def test_capped_square_matches_gaussian_expectation(unit_params):
    """The cap lies far out, so Ê[min(B², 25)] is E[min((σ̄W)², 25)] up to a tiny correction."""
    expected, _ = quad(lambda x: min(x * x, 25.0) * norm.pdf(x), -20.0, 20.0,
                       points=(-5.0, 5.0))
    g = GridConfig.padded(5.0, unit_params, 1.0, dx=0.02)
    observed = g_expectation_1step(parse_payoff("square-cap:25"), 0.0, 1.0, unit_params, g)
    np.testing.assert_allclose(observed, expected, rtol=0, atol=5e-3)


def test_clipped_identity_has_zero_expectation(unit_params):
    observed = g_expectation_1step(parse_payoff("clip:10"), 0.0, 1.0, unit_params, support_radius=10.0)
    assert abs(observed) <= 5e-3


def test_bump_dominates_every_constant_volatility(unit_params, coarse_grid):
    """Ê[exp(−B²)] >= E[exp(−(σW)²)] = 1/√(1 + 2σ²) for every σ in [0, σ̄]."""
    observed = g_expectation_1step(lambda x: np.exp(-x ** 2), 0.0, 1.0, unit_params, coarse_grid)
    for sigma in (0.0, 0.25, 0.5, 1.0):
        assert observed >= 1.0 / math.sqrt(1.0 + 2.0 * sigma ** 2) - 1e-12


def test_one_step_needs_increasing_times(unit_params):
    with pytest.raises(ValidationError):
        g_expectation_1step(parse_payoff("neg-abs"), 1.0, 1.0, unit_params)


def test_non_finite_initial_data(unit_params, coarse_grid):
    with pytest.raises(NumericalBlowupError):
        solve(lambda x: np.where(x > 0, np.nan, 0.0), 1.0, unit_params, coarse_grid)


def test_fixed_boundary_values(unit_params):
    g = GridConfig.symmetric(2.0, 0.05, boundary="dirichlet_fixed", boundary_values=(1.0, 1.0))
    solution = solve(lambda x: np.zeros_like(x), 0.5, unit_params, g)
    assert solution.final[0] == solution.final[-1] == 1.0
    assert 0.0 <= solution.value_at() <= 1.0


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), scale=st.floats(0.0, 3.0), shift=st.floats(-2.0, 2.0))
def test_sublinear_expectation_axioms(seed, scale, shift):
    p = CapacityParams(sigma_bar=1.0)
    g = GridConfig.symmetric(6.0, 0.05)
    x = g.nodes()
    rng = np.random.default_rng(seed)
    first, second = _random_payoff(rng)(x), _random_payoff(rng)(x)

    rows = np.stack([first, second, first + second, scale * first, first + shift,
                     first + np.abs(second), np.full_like(x, shift)])
    v = value_at_zero(solve_batch(rows, 0.5, p, g), g)

    assert v[2] <= v[0] + v[1] + 1e-9
    np.testing.assert_allclose(v[3], scale * v[0], rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(v[4], v[0] + shift, rtol=0, atol=1e-9)
    assert v[0] <= v[5] + 1e-9
    assert v[6] == shift
    # σ̲ = 0: the expectation dominates the payoff at the starting point
    assert v[0] >= first[len(x) // 2] - 1e-12


def test_discrete_comparison(unit_params, coarse_grid):
    x = coarse_grid.nodes()
    lower = np.minimum(np.abs(x), 2.0)
    upper = lower + 0.1 * np.exp(-x ** 2)
    finals = solve_batch(np.stack([lower, upper]), 1.0, unit_params, coarse_grid)
    assert np.all(finals[0] <= finals[1] + 1e-10)


def test_threaded_batch_equals_sequential(unit_params, coarse_grid):
    x = coarse_grid.nodes()
    rows = np.stack([tent(0.5 * k, 2.0)(x) for k in range(6)])
    sequential = solve_batch(rows, 1.0, unit_params, coarse_grid)
    threaded = solve_batch(rows, 1.0, unit_params, coarse_grid, max_workers=3)
    np.testing.assert_array_equal(threaded, sequential)


def test_grid_refinement_converges(unit_params):
    """Successive changes of a ramp payoff's value shrink as dx is halved."""
    ramp = parse_payoff("ramp:-1,1,5")
    values = [g_expectation_1step(ramp, 0.0, 1.0, unit_params,
                                  GridConfig.symmetric(8.0, dx)) for dx in (0.04, 0.02, 0.01)]
    assert abs(values[2] - values[1]) <= abs(values[1] - values[0]) + 1e-12


@pytest.mark.parametrize("n", [1, 10])
def test_pde_reproduces_u_n(n, unit_params):
    g = GridConfig.symmetric(8.0, 0.02)
    x = g.nodes()
    finals = solve_batch(u_n(n, 0.0, x, -1.0, 1.0, unit_params)[None, :], 1.0, unit_params, g)
    np.testing.assert_allclose(value_at_zero(finals, g)[0], u_n(n, 1.0, 0.0, -1.0, 1.0, unit_params),
                               rtol=0, atol=1e-2)


@pytest.mark.slow
@pytest.mark.parametrize("n", [1, 10, 100])
def test_pde_reproduces_u_n_at_acceptance_resolution(n, unit_params):
    g = GridConfig(x_min=-8.0, x_max=8.0, dx=5e-3)
    x = g.nodes()
    finals = solve_batch(u_n(n, 0.0, x, -1.0, 1.0, unit_params)[None, :], 1.0, unit_params, g)
    np.testing.assert_allclose(value_at_zero(finals, g)[0], u_n(n, 1.0, 0.0, -1.0, 1.0, unit_params),
                               rtol=0, atol=5e-3)


def test_tents_decrease_to_point_capacity(unit_params):
    g = GridConfig.padded(2.0, unit_params, 1.0, dx=0.01)
    x = g.nodes()
    values = value_at_zero(solve_batch(np.stack([tent(1.0, n)(x) for n in (1, 4, 16, 64)]),
                                       1.0, unit_params, g), g)
    assert np.all(np.diff(values) < 0)
    assert values[-1] > capacity_point(1.0, unit_params) - 1e-2


def test_solution_exports(unit_params, coarse_grid, tmp_path):
    solution = solve(parse_payoff("tent:0,1"), 0.5, unit_params, coarse_grid)
    assert solution.times[0] == 0.0
    np.testing.assert_allclose(solution.times[-1], 0.5)

    text = solution.to_csv(tmp_path / "grid.csv")
    assert text.splitlines()[0] == "t,x,u"
    assert len(text.splitlines()) == 1 + solution.values.size
    assert (tmp_path / "grid.csv").read_text() == text
    np.testing.assert_array_equal(np.loadtxt(tmp_path / "grid.csv", delimiter=",", skiprows=1)[:, 2],
                                  solution.values.ravel())

    summary = solution.summary()
    assert summary["grid"]["dx"] == 0.05
    np.testing.assert_allclose(summary["u_at_zero"][-1], solution.value_at())


def test_value_at_interpolates(coarse_grid):
    values = coarse_grid.nodes() * 2.0
    np.testing.assert_allclose(value_at(values, coarse_grid, 0.125), 0.25)
    with pytest.raises(DomainError):
        value_at(values, coarse_grid, 7.0)


def test_multistep_single_increment_equals_one_step(unit_params):
    g = GridConfig.padded(2.0, unit_params, 1.0, dx=0.05)
    payoff = parse_payoff("square-cap:4")
    spec = PayoffSpec(time_points=(1.0,), fn=payoff, lip_bound=4.0, sup_bound=4.0)
    np.testing.assert_allclose(g_expectation_multistep(spec, unit_params, g),
                               g_expectation_1step(payoff, 0.0, 1.0, unit_params, g),
                               rtol=0, atol=1e-14)


def test_multistep_second_increment_only(unit_params):
    g = GridConfig.padded(2.0, unit_params, 1.0, dx=0.05)
    chi = parse_payoff("square-cap:4")
    spec = PayoffSpec(time_points=(0.5, 1.0), fn=lambda x1, y: chi(y), lip_bound=4.0, sup_bound=4.0)
    np.testing.assert_allclose(g_expectation_multistep(spec, unit_params, g),
                               g_expectation_1step(chi, 0.5, 1.0, unit_params, g),
                               rtol=0, atol=1e-12)


def test_multistep_additive_payoff_separates(unit_params):
    """Ê[ψ(B_{t1}) + χ(B_{t2} − B_{t1})] = Ê[ψ(B_{t1})] + Ê[χ(B_{t2} − B_{t1})]."""
    g = GridConfig.padded(2.0, unit_params, 1.0, dx=0.05)
    chi = parse_payoff("square-cap:4")
    spec = PayoffSpec(time_points=(0.5, 1.0), fn=lambda x1, y: np.cos(x1) + chi(y),
                      lip_bound=5.0, sup_bound=5.0)
    expected = (g_expectation_1step(np.cos, 0.0, 0.5, unit_params, g)
                + g_expectation_1step(chi, 0.5, 1.0, unit_params, g))
    observed = g_expectation_multistep(spec, unit_params, g, conditioning_stride=2)
    np.testing.assert_allclose(observed, expected, rtol=0, atol=1e-2)


def test_multistep_three_increments(unit_params):
    spec = PayoffSpec(time_points=(1 / 3, 2 / 3, 1.0),
                      fn=lambda x1, x2, x3: np.cos(x1) + np.cos(x2) + np.cos(x3),
                      lip_bound=2.0, sup_bound=3.0)
    np.testing.assert_allclose(g_expectation_multistep(spec, unit_params), 3.0, rtol=0, atol=5e-2)


def test_multistep_rejects_four_increments(unit_params):
    spec = PayoffSpec(time_points=(0.25, 0.5, 0.75, 1.0), fn=lambda *xs: np.cos(xs[0]),
                      lip_bound=1.0, sup_bound=1.0)
    with pytest.raises(UnsupportedSizeError):
        g_expectation_multistep(spec, unit_params)


@pytest.mark.parametrize("kwargs", [
    {"time_points": (), "lip_bound": 1.0, "sup_bound": 1.0},
    {"time_points": (1.0, 0.5), "lip_bound": 1.0, "sup_bound": 1.0},
    {"time_points": (1.0,), "lip_bound": 1.0, "sup_bound": 0.5},
    {"time_points": (1.0,), "lip_bound": 0.1, "sup_bound": 1.0},
])
def test_payoff_spec_validation(kwargs):
    with pytest.raises(ValidationError):
        PayoffSpec(fn=np.cos, **kwargs)


@pytest.mark.parametrize("n", [1, 10, 100])
def test_u_n_solves_the_equation_off_the_barriers(n, unit_params):
    def u(t, x):
        return u_n(n, t, x, -1.0, 1.0, unit_params)

    assert residual_check(u, (0.2, 1.0, -0.9, 0.9), unit_params, kinks=(-1.0, 1.0)) <= 1e-4
    assert residual_check(u, (0.2, 1.0, 1.1, 3.0), unit_params, kinks=(-1.0, 1.0)) <= 1e-4


def test_residual_of_a_non_solution_is_large(unit_params):
    def u(t, x):
        return np.exp(-t) * np.ones_like(x)

    assert residual_check(u, (0.1, 1.0, -1.0, 1.0), unit_params) > 0.3


@pytest.mark.parametrize("region", [(0.1, 1.0, -0.9, 1.0), (0.0005, 1.0, -0.9, 0.9),
                                    (1.0, 0.5, -0.9, 0.9)])
def test_residual_region_validation(region, unit_params):
    with pytest.raises(DomainError):
        residual_check(lambda t, x: t + x, region, unit_params, kinks=(-1.0, 1.0))


def test_named_payoffs():
    x = np.array([-12.0, -1.0, 0.0, 0.5, 6.0])
    np.testing.assert_allclose(parse_payoff("clip")(x), [-10.0, -1.0, 0.0, 0.5, 6.0])
    np.testing.assert_allclose(parse_payoff("tent:0.5,2")(x), [0.0, 0.0, 0.0, 1.0, 0.0])

    outer = BorelSetSpec(intervals=(Interval(-np.inf, -1.0, False, True), Interval(1.0, np.inf, True, False)))
    np.testing.assert_allclose(parse_payoff("ramp:-1,1,4")(x), indicator_approximation(outer, 4.0)(x))


@pytest.mark.parametrize("text", ["cubic", "tent:1", "square-cap:a"])
def test_unknown_payoffs(text):
    with pytest.raises(ValidationError):
        parse_payoff(text)
