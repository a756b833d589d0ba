'''
Monte Carlo over controlled martingales X^v_t = ∫₀^t v_s dW_s with v_s ∈ [σ̲, σ̄].

Two strategies are built in: a constant volatility, whose terminal law is sampled
exactly, and the bang-bang barrier strategy (σ̄ until the exit of (b, l), 0 after)
whose hitting probability attains the two-point capacity. Paths are simulated in
fixed-size chunks, each driven by its own Philox stream spawned from the master
seed, so results do not depend on how chunks are scheduled over threads.
'''
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.stats import norm

from ..analysis.capacity import CapacityParams
from ..errors import ConfigurationError, DomainError, ValidationError

logger = logging.getLogger(__name__)

# dt above (min(|b|, l)/σ̄)² / COARSE_STEP_RATIO is flagged as coarse
COARSE_STEP_RATIO = 100.0

# normals drawn at once per chunk when advancing bang-bang paths, and the
# longest block of steps (bounds the work spent past a path's exit)
BLOCK_ELEMENTS = 2 ** 21
MAX_BLOCK_STEPS = 256

# bridge crossings are drawn only for steps with an end within this many step
# deviations of a barrier; beyond it the crossing probability is below 3e-18
BRIDGE_REACH = 4.5


@dataclass(frozen=True)
class McConfig:
    """
    Monte Carlo settings.

    Parameters
    ----------
    n_paths : int
        Number of paths >= 1.
    dt : float
        Euler step > 0 (reduced so the horizon is a whole number of steps).
    seed : int
        Master seed; every chunk stream is spawned from it.
    bridge_correction : bool, optional
        Register crossings between grid times with the Brownian-bridge probability.
    chunk_size : int, optional
        Paths per independent random stream.
    max_workers : int, optional
        Threads used to run chunks, one per CPU when None and inline when 1;
        does not change the results.
    """
    n_paths: int = 100_000
    dt: float = 1e-3
    seed: int = 20_240_917
    bridge_correction: bool = True
    chunk_size: int = 65_536
    max_workers: int | None = None

    def __post_init__(self):
        self._assertions()

    def _assertions(self):
        """Validates the path count, the step and the seed."""
        message = f"n_paths must be an integer >= 1, got {self.n_paths!r}"
        if isinstance(self.n_paths, bool) or not isinstance(self.n_paths, (int, np.integer)) \
                or self.n_paths < 1:
            raise ConfigurationError(message)

        message = f"dt must be a finite number > 0, got {self.dt!r}"
        if not (isinstance(self.dt, (int, float)) and math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(message)

        message = f"seed must be a non-negative 64-bit integer, got {self.seed!r}"
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError(message)

        message = f"chunk_size must be >= 1, got {self.chunk_size!r}"
        if self.chunk_size < 1:
            raise ConfigurationError(message)

        message = f"max_workers must be None or >= 1, got {self.max_workers!r}"
        if self.max_workers is not None and self.max_workers < 1:
            raise ConfigurationError(message)


class StrategyKind(str, Enum):
    CONSTANT = "constant"
    BANG_BANG_BARRIER = "bang_bang_barrier"


@dataclass(frozen=True)
class Strategy:
    """A volatility control: constant σ, or σ̄ until the exit of (b, l) and 0 afterwards."""
    kind: StrategyKind
    sigma: float | None = None
    b: float | None = None
    l: float | None = None

    @classmethod
    def constant(cls, sigma: float) -> "Strategy":
        return cls(StrategyKind.CONSTANT, sigma=float(sigma))

    @classmethod
    def bang_bang_barrier(cls, b: float, l: float) -> "Strategy":
        return cls(StrategyKind.BANG_BANG_BARRIER, b=float(b), l=float(l))

    def validate(self, p: CapacityParams):
        """
        Checks the strategy stays within [σ̲, σ̄].

        Raises
        ------
        ValidationError
            For a constant σ outside [σ̲, σ̄], or a bang-bang strategy when σ̲ > 0
            (its post-exit volatility 0 is then not admissible).
        DomainError
            If the barriers do not satisfy b < 0 < l.
        """
        if self.kind is StrategyKind.CONSTANT:
            message = (f"constant volatility {self.sigma} lies outside "
                       f"[{p.sigma_under}, {p.sigma_bar}]")
            if self.sigma is None or not p.sigma_under <= self.sigma <= p.sigma_bar:
                raise ValidationError(message)
            return

        message = f"bang-bang barriers need b < 0 < l, got b={self.b}, l={self.l}"
        if not (math.isfinite(self.b) and math.isfinite(self.l) and self.b < 0 < self.l):
            raise DomainError(message)

        message = "bang-bang strategy switches to volatility 0, which needs sigma_under = 0"
        if p.sigma_under != 0:
            raise ValidationError(message)

    def to_dict(self) -> dict:
        if self.kind is StrategyKind.CONSTANT:
            return {"kind": self.kind.value, "sigma": self.sigma}
        return {"kind": self.kind.value, "b": self.b, "l": self.l}


@dataclass(frozen=True)
class McEstimate:
    """
    A Monte Carlo mean with its standard error.

    Attributes
    ----------
    mean : float
        Sample mean.
    std_error : float
        Sample standard deviation / √n_paths.
    n_paths : int
        Number of paths.
    seed : int
        Master seed used.
    dt : float
        Euler step actually used (0 when the terminal law was sampled exactly).
    strategy : dict
        The strategy description.
    coarse_step : bool
        True when dt was large relative to the barrier distance.
    """
    mean: float
    std_error: float
    n_paths: int
    seed: int
    dt: float
    strategy: dict = field(default_factory=dict)
    coarse_step: bool = False

    def within(self, target: float, n_se: float = 3.0, allowance: float = 0.0) -> bool:
        """|mean − target| <= n_se·std_error + allowance."""
        return abs(self.mean - target) <= n_se * self.std_error + allowance

    def to_record(self) -> dict:
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "n_paths": self.n_paths,
            "seed": self.seed,
            "dt": self.dt,
            "strategy": self.strategy,
            "coarse_step": self.coarse_step,
        }

    def __repr__(self):
        return f"McEstimate({self.mean:.6f} ± {self.std_error:.2e}, n={self.n_paths})"


def _run_chunks(cfg: McConfig, worker: Callable) -> np.ndarray:
    """Runs `worker(rng, size)` per chunk and concatenates results in chunk order."""
    n_chunks = math.ceil(cfg.n_paths / cfg.chunk_size)
    sizes = [cfg.chunk_size] * (n_chunks - 1) + [cfg.n_paths - cfg.chunk_size * (n_chunks - 1)]
    streams = np.random.SeedSequence(cfg.seed).spawn(n_chunks)

    def run(task):
        stream, size = task
        return worker(np.random.Generator(np.random.Philox(stream)), size)

    tasks = list(zip(streams, sizes))
    workers = cfg.max_workers if cfg.max_workers is not None else (os.cpu_count() or 1)
    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, tasks))
    else:
        parts = [run(task) for task in tasks]
    return np.concatenate(parts)


def _steps(horizon: float, dt: float) -> tuple[int, float]:
    n_steps = max(1, math.ceil(horizon / dt - 1e-9))
    return n_steps, horizon / n_steps


def _bang_bang_terminal(rng: np.random.Generator, size: int, b: float, l: float, sigma: float,
                        horizon: float, dt: float, bridge: bool) -> np.ndarray:
    """Terminal values of σ̄W frozen at the first barrier it reaches.

    Surviving paths advance in blocks of steps drawn at once. Positions are kept in
    units of one step's standard deviation, where the bridge crossing probability
    of a step from y0 to y1 is exp(−2(l − y0)(l − y1)).
    """
    n_steps, step = _steps(horizon, dt)
    scale = sigma * math.sqrt(step)
    lo, hi = b / scale, l / scale

    terminal = np.empty(size)
    x = np.zeros(size)
    index = np.arange(size)
    done = 0

    while done < n_steps and index.size:
        m = index.size
        k = min(n_steps - done, MAX_BLOCK_STEPS, max(1, BLOCK_ELEMENTS // m))
        path = rng.standard_normal((k, m))
        np.cumsum(path, axis=0, out=path)
        path += x

        up = path >= hi
        down = path <= lo
        if bridge:
            _bridge_crossings(rng, path, x, lo, hi, up, down)

        exited = up | down
        first = np.argmax(exited, axis=0)
        columns = np.arange(m)
        hit = exited[first, columns]

        cols = columns[hit]
        terminal[index[cols]] = np.where(up[first[cols], cols], l, b)
        x = path[-1, ~hit]
        index = index[~hit]
        done += k

    terminal[index] = x * scale
    return terminal


def _bridge_crossings(rng: np.random.Generator, path: np.ndarray, x: np.ndarray, lo: float,
                      hi: float, up: np.ndarray, down: np.ndarray):
    """Marks steps that stay inside (lo, hi) but cross a barrier in between.

    Only steps with an end within BRIDGE_REACH of a barrier are drawn; `up` and
    `down` are updated in place. One uniform per candidate step decides both
    whether and where it crossed.
    """
    near = (path > hi - BRIDGE_REACH) | (path < lo + BRIDGE_REACH)
    start_near = (x > hi - BRIDGE_REACH) | (x < lo + BRIDGE_REACH)
    candidate = near.copy()
    candidate[1:] |= near[:-1]
    candidate[0] |= start_near
    candidate &= ~(up | down)

    rows, cols = np.nonzero(candidate)
    if rows.size == 0:
        return
    end = path[rows, cols]
    start = np.where(rows > 0, path[rows - 1, cols], x[cols])

    p_up = np.exp(-2.0 * np.maximum((hi - start) * (hi - end), 0.0))
    p_down = np.exp(-2.0 * np.maximum((start - lo) * (end - lo), 0.0))
    u = rng.random(rows.size)

    crossed_up = u < p_up
    crossed_down = ~crossed_up & (u < p_up + p_down)
    up[rows[crossed_up], cols[crossed_up]] = True
    down[rows[crossed_down], cols[crossed_down]] = True


def _terminal_values(strategy: Strategy, horizon: float, p: CapacityParams, cfg: McConfig):
    """Terminal values X^v_T for every path, and the Euler step used (0 when exact)."""
    if strategy.kind is StrategyKind.CONSTANT:
        sd = strategy.sigma * math.sqrt(horizon)

        def worker(rng, size):
            return sd * rng.standard_normal(size)

        return _run_chunks(cfg, worker), 0.0

    _, step = _steps(horizon, cfg.dt)

    def worker(rng, size):
        return _bang_bang_terminal(rng, size, strategy.b, strategy.l, p.sigma_bar, horizon,
                                   cfg.dt, cfg.bridge_correction)

    return _run_chunks(cfg, worker), step


def _estimate(samples: np.ndarray, cfg: McConfig, dt: float, strategy: Strategy,
              coarse_step: bool = False) -> McEstimate:
    n = samples.size
    mean = float(np.mean(samples))
    std_error = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McEstimate(mean=mean, std_error=std_error, n_paths=n, seed=cfg.seed, dt=dt,
                      strategy=strategy.to_dict(), coarse_step=coarse_step)


def _is_coarse(dt: float, b: float, l: float, sigma_bar: float) -> bool:
    return dt > (min(abs(b), l) / sigma_bar) ** 2 / COARSE_STEP_RATIO


def simulate_payoff(strategy: Strategy, payoff: Callable, horizon: float, p: CapacityParams,
                    cfg: McConfig) -> McEstimate:
    """E[payoff(X^v_T)] under one strategy, a lower bound for the G-expectation.

    Parameters
    ----------
    strategy : Strategy
        The control; validated against `p`.
    payoff : callable
        Vectorized function of the terminal value.
    horizon : float
        T > 0.
    p : CapacityParams
        Volatility bounds.
    cfg : McConfig
        Path count, step, seed.

    Returns
    -------
    McEstimate
        Constant strategies sample X_T ~ N(0, σ²T) exactly and report dt = 0.
    """
    if not (math.isfinite(horizon) and horizon > 0):
        raise ValidationError(f"horizon must be a finite number > 0, got {horizon}")
    strategy.validate(p)

    terminal, step = _terminal_values(strategy, horizon, p, cfg)
    samples = np.asarray(payoff(terminal), dtype=float)
    coarse = (strategy.kind is StrategyKind.BANG_BANG_BARRIER
              and _is_coarse(step, strategy.b, strategy.l, p.sigma_bar))
    return _estimate(np.broadcast_to(samples, terminal.shape), cfg, step, strategy, coarse)


def simulate_hitting_probability(b: float, l: float, p: CapacityParams, cfg: McConfig) -> McEstimate:
    """P(σ̄W leaves (b, l) before p.horizon_T) under the bang-bang barrier strategy.

    Bang-bang paths are frozen exactly at the barrier they reach, so the hitting
    event equals {X_T ∈ {b, l}}.

    Raises
    ------
    DomainError
        Unless b < 0 < l.
    ValidationError
        If σ̲ > 0.
    """
    strategy = Strategy.bang_bang_barrier(b, l)
    strategy.validate(p)

    _, step = _steps(p.horizon_T, cfg.dt)
    coarse = _is_coarse(step, b, l, p.sigma_bar)
    if coarse:
        logger.warning("dt=%.2e is coarse for barriers (%g, %g) and sigma_bar=%g; "
                       "expect discretization bias", step, b, l, p.sigma_bar)

    terminal, step = _terminal_values(strategy, p.horizon_T, p, cfg)
    hits = ((terminal == b) | (terminal == l)).astype(float)
    estimate = _estimate(hits, cfg, step, strategy, coarse)
    logger.info("bang-bang hitting probability (%g, %g): %r", b, l, estimate)
    return estimate


def band_indicator(centers, eps: float) -> Callable:
    """Indicator of the union of [c − eps, c + eps] over the given centers."""
    centers = np.asarray(centers, dtype=float).reshape(-1, 1)

    def indicator(x):
        x = np.asarray(x, dtype=float)
        return np.any(np.abs(x.reshape(1, -1) - centers) <= eps, axis=0).reshape(x.shape).astype(float)

    return indicator


def constant_band_probability(sigma: float, horizon: float, centers, eps: float) -> float:
    """Exact P(X_T within eps of one of `centers`) for X_T ~ N(0, σ²·horizon).

    Overlapping bands are merged before the Gaussian masses are added.
    """
    if not (math.isfinite(eps) and eps >= 0):
        raise ValidationError(f"eps must be a finite number >= 0, got {eps}")
    bands = sorted((c - eps, c + eps) for c in np.asarray(centers, dtype=float).ravel())
    merged = []
    for lo, hi in bands:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    sd = sigma * math.sqrt(horizon)
    if sd == 0:
        return float(any(lo <= 0 <= hi for lo, hi in merged))
    return float(sum(norm.cdf(hi, scale=sd) - norm.cdf(lo, scale=sd) for lo, hi in merged))
