'''
This module contains the explicit finite-difference solver of the G-heat equation
∂_t u = G(∂²_xx u), G(a) = ½(σ̄²a⁺ − σ̲²a⁻), and the G-expectation evaluators built
on it: the one-increment evaluator Ê[φ(B_t − B_s)] = u(t − s, 0) and the backward
recursion for payoffs of up to three increments.

The scheme u^{k+1}_j = u^k_j + dt·G(D²u^k_j) is monotone when dt <= dx²/σ̄², which
makes it converge to the viscosity solution and keeps the discrete comparison,
constant preservation and sublinearity properties of Ê.
'''
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import interp1d

from ..analysis.capacity import CapacityParams, indicator_approximation
from ..analysis.borel_set import BorelSetSpec, Interval
from ..errors import (ConfigurationError, DomainError, InternalConsistencyError,
                      NumericalBlowupError, UnsupportedSizeError, ValidationError)
from ..utils import write_csv, write_json

logger = logging.getLogger(__name__)

BOUNDARIES = ("dirichlet_initial", "dirichlet_fixed")

# standard deviations of padding around the payoff support
PADDING_SIGMAS = 6.0

# largest number of increments the multistep evaluator accepts
MAX_INCREMENTS = 3

# steps between finiteness checks while marching
_BLOWUP_CHECK_EVERY = 256


def G(a, p: CapacityParams):
    """The nonlinearity G(a) = ½(σ̄²a⁺ − σ̲²a⁻), vectorized."""
    a = np.asarray(a, dtype=float)
    return 0.5 * (p.sigma_bar ** 2 * np.maximum(a, 0.0) - p.sigma_under ** 2 * np.maximum(-a, 0.0))


@dataclass(frozen=True)
class GridConfig:
    """
    Spatial lattice and time step of the explicit scheme.

    Parameters
    ----------
    x_min, x_max : float
        Domain ends, x_min < 0 < x_max; (x_max − x_min)/dx must be an integer.
    dx : float
        Spatial step > 0.
    dt : float, optional
        Time step; None picks safety_factor·dx²/σ̄². Reduced so the horizon is a
        whole number of steps.
    boundary : str, optional
        "dirichlet_initial" freezes the initial end values, "dirichlet_fixed"
        uses `boundary_values`.
    boundary_values : tuple of float, optional
        (left, right) values for "dirichlet_fixed".
    safety_factor : float, optional
        Fraction of the stability limit dx²/σ̄² used for dt, in (0, 1].
    store_every : int, optional
        Keep every `store_every`-th time level in the solution (None keeps about 100).
    """
    x_min: float
    x_max: float
    dx: float
    dt: float | None = None
    boundary: str = "dirichlet_initial"
    boundary_values: tuple | None = None
    safety_factor: float = 0.9
    store_every: int | None = None

    def __post_init__(self):
        self._assertions()

    def _assertions(self):
        """Checks the domain, the steps and the boundary specification."""
        values = (self.x_min, self.x_max, self.dx)
        if not all(math.isfinite(v) for v in values):
            raise ConfigurationError(f"Grid extents must be finite, got {values}")

        message = f"The domain must contain 0 in its interior, got [{self.x_min}, {self.x_max}]"
        if not self.x_min < 0 < self.x_max:
            raise ConfigurationError(message)

        message = f"dx must be positive, got {self.dx}"
        if self.dx <= 0:
            raise ConfigurationError(message)

        cells = (self.x_max - self.x_min) / self.dx
        message = f"(x_max - x_min)/dx = {cells} is not an integer"
        if abs(cells - round(cells)) > 1e-6 or round(cells) < 2:
            raise ConfigurationError(message)

        message = f"dt must be positive when given, got {self.dt}"
        if self.dt is not None and not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(message)

        message = f"safety_factor must lie in (0, 1], got {self.safety_factor}"
        if not 0 < self.safety_factor <= 1:
            raise ConfigurationError(message)

        message = f"Unknown boundary '{self.boundary}', expected one of {BOUNDARIES}"
        if self.boundary not in BOUNDARIES:
            raise ConfigurationError(message)

        message = "dirichlet_fixed needs boundary_values=(left, right)"
        if self.boundary == "dirichlet_fixed" and (self.boundary_values is None
                                                   or len(self.boundary_values) != 2):
            raise ConfigurationError(message)

        message = f"store_every must be a positive integer, got {self.store_every}"
        if self.store_every is not None and self.store_every < 1:
            raise ConfigurationError(message)

    @classmethod
    def symmetric(cls, half_width: float, dx: float, **kwargs) -> "GridConfig":
        """Grid on [−m·dx, m·dx] with m = ceil(half_width/dx); 0 is a node."""
        m = max(1, math.ceil(half_width / dx - 1e-9))
        return cls(x_min=-m * dx, x_max=m * dx, dx=dx, **kwargs)

    @classmethod
    def padded(cls, support_radius: float, p: CapacityParams, horizon: float,
               dx: float = 1e-2, **kwargs) -> "GridConfig":
        """Symmetric grid reaching |x| >= support_radius + 6σ̄√horizon."""
        half_width = support_radius + PADDING_SIGMAS * p.sigma_bar * math.sqrt(max(horizon, 0.0))
        return cls.symmetric(max(half_width, 2 * dx), dx, **kwargs)

    @property
    def n_nodes(self) -> int:
        return int(round((self.x_max - self.x_min) / self.dx)) + 1

    def nodes(self) -> np.ndarray:
        """Grid nodes x_min + j·dx."""
        return self.x_min + self.dx * np.arange(self.n_nodes)

    def time_step(self, p: CapacityParams, horizon: float) -> tuple[float, int]:
        """
        Returns the time step actually used and the number of steps.

        Raises
        ------
        ConfigurationError
            If the requested dt breaks the stability limit safety_factor·dx²/σ̄².
        """
        limit = self.safety_factor * self.dx ** 2 / p.sigma_bar ** 2
        dt = limit if self.dt is None else self.dt
        if dt > limit * (1 + 1e-12):
            message = (f"CFL violation: dt={dt:.3e} exceeds safety_factor*dx^2/sigma_bar^2="
                       f"{limit:.3e} (dx={self.dx}, sigma_bar={p.sigma_bar})")
            raise ConfigurationError(message)
        if horizon <= 0:
            return dt, 0
        n_steps = max(1, math.ceil(horizon / dt - 1e-9))
        return horizon / n_steps, n_steps

    def __repr__(self):
        return (f"GridConfig([{self.x_min}, {self.x_max}], dx={self.dx}, dt={self.dt}, "
                f"boundary={self.boundary})")


@dataclass
class GridSolution:
    """
    Numerical solution of the G-heat equation on a space-time lattice.

    Attributes
    ----------
    config : GridConfig
        The grid used.
    times : numpy.ndarray
        Stored time levels (always including 0 and the horizon).
    values : numpy.ndarray
        u(times[k], x_j), shape (len(times), n_nodes).
    x : numpy.ndarray
        Grid nodes.
    dt : float
        Time step actually used.
    """
    config: GridConfig
    times: np.ndarray
    values: np.ndarray
    x: np.ndarray = field(repr=False)
    dt: float = 0.0

    @property
    def final(self) -> np.ndarray:
        """u(horizon, ·)."""
        return self.values[-1]

    def value_at(self, x0: float = 0.0, level: int = -1) -> float:
        """u at a stored time level, linearly interpolated at x0."""
        return float(value_at(self.values[level], self.config, x0))

    def summary(self) -> dict:
        """JSON summary: u(t, 0) per stored time level."""
        return {
            "grid": {"x_min": self.config.x_min, "x_max": self.config.x_max,
                     "dx": self.config.dx, "dt": self.dt,
                     "boundary": self.config.boundary},
            "times": self.times,
            "u_at_zero": value_at(self.values, self.config, 0.0),
        }

    def table(self) -> dict:
        """Long-format columns (t, x, u) covering every stored level."""
        n_levels, n_nodes = self.values.shape
        return {
            "t": np.repeat(self.times, n_nodes),
            "x": np.tile(self.x, n_levels),
            "u": self.values.reshape(-1),
        }

    def to_csv(self, out_file=None) -> str:
        return write_csv(self.table(), out_file)

    def to_json(self, out_file=None) -> str:
        return write_json(self.summary(), out_file)

    def __repr__(self):
        return (f"GridSolution(horizon={self.times[-1]}, levels={len(self.times)}, "
                f"nodes={len(self.x)}, u(T,0)={self.value_at():.6g})")


def value_at(values, g: GridConfig, x0: float = 0.0):
    """Linear interpolation of grid values at x0 along the last axis (exact at nodes)."""
    values = np.asarray(values, dtype=float)
    position = (x0 - g.x_min) / g.dx
    j = int(math.floor(position))
    if not 0 <= j < g.n_nodes:
        raise DomainError(f"x0={x0} lies outside the grid [{g.x_min}, {g.x_max}]")
    weight = position - j
    if j == g.n_nodes - 1 or abs(weight) < 1e-12:
        return values[..., j]
    if abs(weight - 1) < 1e-12:
        return values[..., j + 1]
    return (1 - weight) * values[..., j] + weight * values[..., j + 1]


def value_at_zero(values, g: GridConfig):
    """`value_at` for x0 = 0."""
    return value_at(values, g, 0.0)


def _march(u0: np.ndarray, n_steps: int, dt: float, g: GridConfig, p: CapacityParams,
           store_every: int | None = None):
    """
    Explicit time stepping on the last axis of `u0`.

    Returns
    -------
    tuple
        (final values, stored levels list, stored step indices list).
    """
    u = np.array(u0, dtype=float, copy=True)
    if not np.all(np.isfinite(u)):
        raise NumericalBlowupError("initial data contains non-finite values", step=0)

    if g.boundary == "dirichlet_fixed":
        u[..., 0], u[..., -1] = g.boundary_values

    up = 0.5 * p.sigma_bar ** 2 * dt / g.dx ** 2
    down = 0.5 * p.sigma_under ** 2 * dt / g.dx ** 2

    stored, stored_steps = [], []
    if store_every is not None:
        stored.append(u.copy())
        stored_steps.append(0)

    for step in range(1, n_steps + 1):
        d2 = u[..., 2:] - 2.0 * u[..., 1:-1] + u[..., :-2]
        if down > 0:
            u[..., 1:-1] += up * np.maximum(d2, 0.0) - down * np.maximum(-d2, 0.0)
        else:
            u[..., 1:-1] += up * np.maximum(d2, 0.0)

        if step % _BLOWUP_CHECK_EVERY == 0 or step == n_steps:
            if not np.all(np.isfinite(u)):
                message = f"non-finite values after step {step} of {n_steps}"
                logger.error(message)
                raise NumericalBlowupError(message, step=step)

        if store_every is not None and (step % store_every == 0 or step == n_steps):
            stored.append(u.copy())
            stored_steps.append(step)

    return u, stored, stored_steps


def _check_comparison(u0: np.ndarray, u: np.ndarray, g: GridConfig):
    """The monotone scheme keeps values within the range of the data."""
    lo, hi = float(np.min(u0)), float(np.max(u0))
    if g.boundary == "dirichlet_fixed":
        lo, hi = min(lo, *g.boundary_values), max(hi, *g.boundary_values)
    slack = 1e-9 * max(1.0, abs(lo), abs(hi))
    if np.min(u) < lo - slack or np.max(u) > hi + slack:
        message = f"solution left the data range [{lo}, {hi}]"
        raise InternalConsistencyError(message)


def _sample(initial, x: np.ndarray) -> np.ndarray:
    """Initial data as an array on the nodes (callables are evaluated)."""
    values = initial(x) if callable(initial) else initial
    values = np.asarray(values, dtype=float)
    if values.shape[-1:] != x.shape:
        raise ValidationError(f"initial data has shape {values.shape}, expected (..., {len(x)})")
    return values


def solve(initial, horizon: float, p: CapacityParams, g: GridConfig) -> GridSolution:
    """Solves ∂_t u = G(∂²_xx u), u(0, ·) = initial, up to `horizon`.

    Parameters
    ----------
    initial : callable or numpy.ndarray
        Vectorized function of x, or its samples on `g.nodes()`.
    horizon : float
        Final time >= 0; rounded to a whole number of (possibly reduced) steps.
    p : CapacityParams
        Volatility bounds (any σ̲ in [0, σ̄]).
    g : GridConfig
        Grid and time step.

    Returns
    -------
    GridSolution
        Stored levels including u(horizon, ·).

    Raises
    ------
    ConfigurationError
        On a CFL violation.
    NumericalBlowupError
        If non-finite values appear.

    Examples
    --------
    >>> g = GridConfig.symmetric(4.0, 0.05)
    >>> sol = solve(lambda x: np.full_like(x, 3.0), 1.0, CapacityParams(1.0), g)
    >>> sol.value_at()
    3.0
    """
    if not (math.isfinite(horizon) and horizon >= 0):
        raise ValidationError(f"horizon must be a finite number >= 0, got {horizon}")

    x = g.nodes()
    u0 = _sample(initial, x)
    if u0.ndim != 1:
        raise ValidationError("solve takes one initial profile; use solve_batch for stacks")

    dt, n_steps = g.time_step(p, horizon)
    store_every = g.store_every or max(1, n_steps // 100)
    logger.debug("solve: %d steps of dt=%.3e on %d nodes", n_steps, dt, len(x))

    u, stored, steps = _march(u0, n_steps, dt, g, p, store_every=store_every)
    _check_comparison(u0, u, g)
    return GridSolution(config=g, times=np.asarray(steps, dtype=float) * dt,
                        values=np.stack(stored), x=x, dt=dt)


def solve_batch(initials, horizon: float, p: CapacityParams, g: GridConfig,
                max_workers: int | None = None) -> np.ndarray:
    """Solves independent initial profiles (rows of `initials`) up to a common horizon.

    Rows are split into chunks marched by a thread pool when `max_workers` > 1;
    the result equals the sequential one exactly.

    Returns
    -------
    numpy.ndarray
        u(horizon, ·) for each row, same shape as `initials`.
    """
    x = g.nodes()
    u0 = _sample(initials, x)
    dt, n_steps = g.time_step(p, horizon)
    rows = u0.reshape(-1, len(x))

    if not max_workers or max_workers <= 1 or len(rows) < 2:
        finals = _march(rows, n_steps, dt, g, p)[0]
    else:
        chunks = np.array_split(np.arange(len(rows)), min(max_workers, len(rows)))
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            parts = list(pool.map(lambda idx: _march(rows[idx], n_steps, dt, g, p)[0], chunks))
        finals = np.concatenate(parts, axis=0)

    _check_comparison(rows, finals, g)
    return finals.reshape(u0.shape)


def g_expectation_1step(payoff: Callable, s: float, t: float, p: CapacityParams,
                        g: GridConfig | None = None, support_radius: float = 2.0) -> float:
    """Ê[payoff(B_t − B_s)] = u(t − s, 0) with u solving the G-heat equation from `payoff`.

    Parameters
    ----------
    payoff : callable
        Bounded Lipschitz function of one increment, vectorized.
    s, t : float
        Times with 0 <= s < t.
    p : CapacityParams
        Volatility bounds.
    g : GridConfig, optional
        Grid; by default `GridConfig.padded(support_radius, p, t - s)`.
    support_radius : float, optional
        Radius around 0 where the payoff varies, used for the default grid.
    """
    if not (0 <= s < t):
        raise ValidationError(f"Need 0 <= s < t, got s={s}, t={t}")
    if g is None:
        g = GridConfig.padded(support_radius, p, t - s)
    return solve(payoff, t - s, p, g).value_at(0.0)


@dataclass(frozen=True)
class PayoffSpec:
    """
    A payoff φ(B_{t1}, B_{t2} − B_{t1}, …, B_{tn} − B_{t(n−1)}) of finitely many increments.

    Parameters
    ----------
    time_points : tuple of float
        0 < t1 < … < tn.
    fn : callable
        fn(x1, …, xn) -> array, vectorized with numpy broadcasting.
    lip_bound : float
        Declared Lipschitz constant (Euclidean norm).
    sup_bound : float
        Declared bound on |fn|.
    check_samples : int, optional
        Number of random points used to spot-check the declared bounds.
    """
    time_points: tuple
    fn: Callable
    lip_bound: float
    sup_bound: float
    check_samples: int = 256

    def __post_init__(self):
        object.__setattr__(self, "time_points", tuple(float(t) for t in self.time_points))
        self._assertions()

    @property
    def n(self) -> int:
        return len(self.time_points)

    def _assertions(self):
        """Validates the time points and spot-checks the declared bounds."""
        times = self.time_points
        message = f"time_points must be 0 < t1 < ... < tn with n >= 1, got {times}"
        if not times or times[0] <= 0 or any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError(message)

        message = "lip_bound and sup_bound must be finite and >= 0"
        if not all(math.isfinite(v) and v >= 0 for v in (self.lip_bound, self.sup_bound)):
            raise ValidationError(message)

        rng = np.random.default_rng(20_240_917)
        points = rng.uniform(-10.0, 10.0, size=(self.check_samples, self.n))
        shifts = rng.normal(0.0, 0.5, size=(self.check_samples, self.n))
        first = np.broadcast_to(self.fn(*points.T), (self.check_samples,))
        second = np.broadcast_to(self.fn(*(points + shifts).T), (self.check_samples,))

        message = f"payoff exceeds its declared sup_bound {self.sup_bound}"
        if np.max(np.abs(first)) > self.sup_bound * (1 + 1e-9) + 1e-12:
            raise ValidationError(message)

        allowed = self.lip_bound * np.linalg.norm(shifts, axis=1) * (1 + 1e-9) + 1e-12
        message = f"payoff violates its declared lip_bound {self.lip_bound}"
        if np.any(np.abs(first - second) > allowed):
            raise ValidationError(message)


def _conditioning_nodes(x: np.ndarray, stride: int) -> np.ndarray:
    """Every `stride`-th grid node, always including both ends."""
    nodes = x[::stride]
    if nodes[-1] != x[-1]:
        nodes = np.append(nodes, x[-1])
    return nodes


def g_expectation_multistep(spec: PayoffSpec, p: CapacityParams, g: GridConfig | None = None,
                            conditioning_stride: int | None = None, support_radius: float = 2.0,
                            max_workers: int | None = None) -> float:
    """Ê[φ(B_{t1}, B_{t2} − B_{t1}, …)] by the backward recursion φ_{n−1}, …, φ_1, φ_0.

    φ_{k−1}(x_1, …, x_{k−1}) = Ê[φ_k(x_1, …, x_{k−1}, B_{t_k} − B_{t_{k−1}})] is tabulated on
    a tensor grid of conditioning nodes (every `conditioning_stride`-th spatial node);
    each table row is one 1-d PDE solve and rows are marched together. Between
    conditioning nodes φ_{k−1} is interpolated piecewise linearly.

    Parameters
    ----------
    spec : PayoffSpec
        Payoff and its time points.
    p : CapacityParams
        Volatility bounds.
    g : GridConfig, optional
        Grid; by default a padded grid with dx = 0.05.
    conditioning_stride : int, optional
        Spatial nodes per conditioning node; None uses 4, coarsened for three
        increments so that a table has at most 64 nodes per axis.
    support_radius : float, optional
        Radius around 0 where the payoff varies, used for the default grid.
    max_workers : int, optional
        Thread count for the batched solves.

    Raises
    ------
    UnsupportedSizeError
        If the payoff has more than three increments.
    """
    if spec.n > MAX_INCREMENTS:
        message = f"multistep evaluator supports at most {MAX_INCREMENTS} increments, got {spec.n}"
        raise UnsupportedSizeError(message)

    if g is None:
        g = GridConfig.padded(support_radius, p, spec.time_points[-1], dx=5e-2)

    x = g.nodes()
    if conditioning_stride is None:
        conditioning_stride = 4 if spec.n < 3 else max(4, math.ceil(len(x) / 64))
    if conditioning_stride < 1:
        raise ConfigurationError(f"conditioning_stride must be >= 1, got {conditioning_stride}")
    cond = _conditioning_nodes(x, conditioning_stride)
    horizons = np.diff((0.0,) + spec.time_points)
    table = None

    for level in range(spec.n, 0, -1):
        m = level - 1  # number of conditioning variables left
        if level == spec.n:
            args = [cond.reshape((1,) * i + (-1,) + (1,) * (m - i)) for i in range(m)]
            args.append(x.reshape((1,) * m + (-1,)))
            data = np.broadcast_to(spec.fn(*args), (len(cond),) * m + (len(x),))
        else:
            data = interp1d(cond, table, axis=-1, assume_sorted=True)(x)

        finals = solve_batch(np.reshape(data, (-1, len(x))), float(horizons[level - 1]), p, g,
                             max_workers=max_workers)
        table = value_at_zero(finals, g).reshape((len(cond),) * m)
        logger.debug("multistep level %d: %d conditional solves", level, finals.shape[0])

    return float(table)


def residual_check(u_fn: Callable, region: tuple, p: CapacityParams, kinks=(),
                   h: float = 1e-3, n_t: int = 9, n_x: int = 41) -> float:
    """Max of |∂_t u − G(∂²_xx u)| over a sample grid, by central differences.

    Parameters
    ----------
    u_fn : callable
        u_fn(t, x) -> array, vectorized with broadcasting; twice differentiable on
        the region.
    region : tuple
        (t_lo, t_hi, x_lo, x_hi).
    p : CapacityParams
        Volatility bounds defining G.
    kinks : sequence of float
        x positions where u is not smooth (e.g. the barriers b, l).
    h : float
        Differencing step.
    n_t, n_x : int
        Sample counts per axis.

    Raises
    ------
    DomainError
        If the region (widened by h) touches a kink line or reaches t < 0.
    """
    t_lo, t_hi, x_lo, x_hi = (float(v) for v in region)
    if not (t_lo < t_hi and x_lo < x_hi and h > 0):
        raise DomainError(f"Region must be a nonempty rectangle, got {region}")
    if t_lo - h < 0:
        raise DomainError(f"Region starts too close to t = 0 for step h={h}")
    for kink in kinks:
        if x_lo - h <= kink <= x_hi + h:
            raise DomainError(f"Region [{x_lo}, {x_hi}] touches the kink line x = {kink}")

    t = np.linspace(t_lo, t_hi, n_t)[:, None]
    x = np.linspace(x_lo, x_hi, n_x)[None, :]
    centre = np.asarray(u_fn(t, x), dtype=float)
    du_dt = (np.asarray(u_fn(t + h, x)) - np.asarray(u_fn(t - h, x))) / (2 * h)
    d2u_dx2 = (np.asarray(u_fn(t, x + h)) - 2 * centre + np.asarray(u_fn(t, x - h))) / h ** 2
    residual = float(np.max(np.abs(du_dt - G(d2u_dx2, p))))
    logger.debug("residual over %s: %.3e", region, residual)
    return residual


def tent(x0: float, n: float):
    """h_n(x) = [1 − n|x − x0|]⁺, the tent of half-width 1/n at x0."""
    if not (math.isfinite(x0) and math.isfinite(n) and n > 0):
        raise ValidationError(f"tent needs finite x0 and n > 0, got x0={x0}, n={n}")

    def h_n(x):
        return np.maximum(0.0, 1.0 - n * np.abs(np.asarray(x, dtype=float) - x0))

    return h_n


def _constant(c):
    return lambda x: np.full(np.shape(x), float(c))


def _neg_abs():
    return lambda x: -np.abs(np.asarray(x, dtype=float))


def _square_cap(c=25.0):
    return lambda x: np.minimum(np.asarray(x, dtype=float) ** 2, float(c))


def _clip(c=10.0):
    return lambda x: np.clip(np.asarray(x, dtype=float), -float(c), float(c))


def _ramp(b, l, k):
    outer = BorelSetSpec(intervals=(Interval(-math.inf, float(b), False, True),
                                    Interval(float(l), math.inf, True, False)))
    return indicator_approximation(outer, float(k))


# named payoffs accepted on the command line, "name:arg1,arg2"
PAYOFFS = {
    "constant": _constant,
    "neg-abs": _neg_abs,
    "square-cap": _square_cap,
    "clip": _clip,
    "tent": tent,
    "ramp": _ramp,
}


def parse_payoff(text: str) -> Callable:
    """Builds a named payoff from "name" or "name:arg1,arg2,...".

    Examples
    --------
    >>> parse_payoff("square-cap:25")(np.array([3.0, 6.0]))
    array([ 9., 25.])
    """
    name, _, raw_args = text.partition(":")
    if name not in PAYOFFS:
        raise ValidationError(f"Unknown payoff '{name}', expected one of {sorted(PAYOFFS)}")
    try:
        args = [float(token) for token in raw_args.split(",")] if raw_args else []
        return PAYOFFS[name](*args)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"Bad arguments for payoff '{name}': {raw_args!r} ({e})") from e
