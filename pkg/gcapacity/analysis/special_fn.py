'''
Special functions and series kernels of the degenerate G-heat equation.

Φ(x) = 2/√(2π) ∫_x^∞ exp(−r²/2) dr is the two-sided Gaussian tail; every capacity
in the degenerate case is either Φ of a scaled distance or an alternating
reflection series of Φ terms. This module holds Φ and its derivatives, the
double-barrier reflection series (exit probability of σ̄W from an interval), its
time derivative (the exit-time density) and the eigenfunction expansion of the
survival probability that serves as an independent check of the series.

All functions are pure; they accept numpy arrays where noted and return floats
for scalar input.
'''
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

from ..errors import DomainError, InternalConsistencyError, SeriesConvergenceError, ValidationError

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)

# 2/√(2π): Φ'(0) up to sign
TWO_OVER_SQRT_2PI = 2.0 / math.sqrt(2.0 * math.pi)

# first and largest block of indices evaluated at once by the series engine
_FIRST_BLOCK = 8
_MAX_BLOCK = 4096


@dataclass(frozen=True)
class SeriesConfig:
    """
    Truncation settings of the infinite reflection sums.

    Parameters
    ----------
    tol : float, optional
        Absolute truncation tolerance, by default 1e-12.
    max_terms : int, optional
        Cap on the index magnitude |i| of the symmetric window, by default 10**6.
    """
    tol: float = 1e-12
    max_terms: int = 1_000_000

    def __post_init__(self):
        self._assertions()

    def _assertions(self):
        """Validates the tolerance and the cap."""
        message = f"Series tolerance must be a positive finite number, got {self.tol}"
        if not (isinstance(self.tol, (int, float)) and math.isfinite(self.tol) and self.tol > 0):
            raise ValidationError(message)

        message = f"max_terms must be an integer >= 1, got {self.max_terms}"
        if isinstance(self.max_terms, bool) or not isinstance(self.max_terms, (int, np.integer)) \
                or self.max_terms < 1:
            raise ValidationError(message)


@dataclass(frozen=True)
class SeriesResult:
    """
    A truncated series together with its truncation diagnostics.

    Attributes
    ----------
    value : float or numpy.ndarray
        The (clamped) partial sum.
    n_terms : int
        Largest index magnitude |i| included in the symmetric window.
    remainder_bound : float
        Bound on the neglected tail at the stopping index.
    """
    value: float | np.ndarray
    n_terms: int
    remainder_bound: float


def _phi(x):
    """Φ without input checks; Φ(x) = erfc(x/√2)."""
    return erfc(np.asarray(x, dtype=float) / SQRT2)


def _finite(x, name: str = "x") -> np.ndarray:
    """Returns `x` as a float array, rejecting NaN and infinities."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return arr


def _scalar_or_array(arr):
    arr = np.asarray(arr)
    return float(arr) if arr.ndim == 0 else arr


def phi(x):
    """Two-sided Gaussian tail Φ(x) = 2/√(2π) ∫_x^∞ exp(−r²/2) dr.

    Parameters
    ----------
    x : float or array_like
        Finite argument(s).

    Returns
    -------
    float or numpy.ndarray
        Values in [0, 2]; Φ(0) = 1, Φ(x) + Φ(−x) = 2.

    Raises
    ------
    DomainError
        If any argument is NaN or infinite.

    Examples
    --------
    >>> phi(0.0)
    1.0
    >>> round(phi(1.0), 12)
    0.317310507863
    """
    return _scalar_or_array(_phi(_finite(x)))


def phi_prime(x):
    """Φ'(x) = −2/√(2π) exp(−x²/2)."""
    arr = _finite(x)
    return _scalar_or_array(-TWO_OVER_SQRT_2PI * np.exp(-0.5 * arr * arr))


def phi_second(x):
    """Φ''(x) = −x Φ'(x)."""
    arr = _finite(x)
    return _scalar_or_array(arr * TWO_OVER_SQRT_2PI * np.exp(-0.5 * arr * arr))


def _reflection_sum(term, near, far, width, cutoff, cfg: SeriesConfig, what: str):
    """
    Sums Σ_i [term(2i·w + near, s_i) + term(2i·w + far, s_i)] over a symmetric window.

    The sign s_i follows sgn(i) = I[i >= 0] − I[i < 0], so i = 0 enters with +1.
    Indices are processed in growing blocks; the sum stops at the first |i| = k for
    which the ±k term pair and `cutoff(k)` are both below `cfg.tol` for every
    element of the broadcast inputs.

    Parameters
    ----------
    term : callable
        term(a, sign) -> array, vectorized over `a`.
    near, far, width : numpy.ndarray
        Broadcast-compatible offsets and the interval width l − b.
    cutoff : callable
        cutoff(k) -> array, bound on the tail beyond index magnitude k.
    cfg : SeriesConfig
        Tolerance and index cap.
    what : str
        Label used in error messages.

    Returns
    -------
    tuple
        (partial sum array, stopping index, remainder bound).
    """
    near, far, width = np.broadcast_arrays(near, far, width)
    total = np.zeros(near.shape)
    if total.size == 0:
        return total, 0, 0.0

    element_axes = tuple(range(1, near.ndim + 1))
    k_start, block, last_bound = 0, _FIRST_BLOCK, math.inf

    while k_start <= cfg.max_terms:
        ks = np.arange(k_start, min(k_start + block, cfg.max_terms + 1), dtype=float)
        k = ks.reshape((-1,) + (1,) * near.ndim)

        shift = 2.0 * k * width
        plus = term(shift + near, 1.0) + term(shift + far, 1.0)
        minus = term(-shift + near, -1.0) + term(-shift + far, -1.0)
        pair = plus + np.where(k >= 1, minus, 0.0)

        bound = np.broadcast_to(cutoff(k), pair.shape)
        pair_max = np.abs(pair).max(axis=element_axes) if element_axes else np.abs(pair)
        bound_max = bound.max(axis=element_axes) if element_axes else bound
        done = (pair_max < cfg.tol) & (bound_max < cfg.tol)

        if done.any():
            j = int(np.argmax(done))
            total += pair[:j + 1].sum(axis=0)
            return total, int(ks[j]), float(bound_max[j])

        total += pair.sum(axis=0)
        last_bound = float(bound_max[-1])
        k_start += len(ks)
        block = min(2 * block, _MAX_BLOCK)

    message = (f"{what}: no convergence within {cfg.max_terms} index pairs "
               f"(remainder bound {last_bound:.3e} > tol {cfg.tol:.1e})")
    logger.error(message)
    raise SeriesConvergenceError(message, partial_sum=float(np.max(total)),
                                 remainder_bound=last_bound, n_terms=cfg.max_terms)


def _clamp_probability(values, tol: float, what: str):
    """Clips to [0, 1] when the overshoot is below `tol`; raises otherwise."""
    values = np.asarray(values, dtype=float)
    overshoot = float(np.max(np.maximum(values - 1.0, -values), initial=0.0))
    if overshoot > tol:
        message = f"{what}: value leaves [0, 1] by {overshoot:.3e} (tol {tol:.1e})"
        raise InternalConsistencyError(message)
    return np.clip(values, 0.0, 1.0)


def _check_barriers(b: float, l: float, sigma_bar: float):
    """Validates barrier and volatility arguments shared by the series functions."""
    for name, value in (("b", b), ("l", l), ("sigma_bar", sigma_bar)):
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value}")
    if not b < l:
        raise DomainError(f"Lower barrier b={b} must lie below upper barrier l={l}")
    if sigma_bar <= 0:
        raise DomainError(f"sigma_bar must be positive, got {sigma_bar}")


def exit_probability_series(t, x, b: float, l: float, sigma_bar: float,
                            cfg: SeriesConfig = SeriesConfig()) -> SeriesResult:
    """Probability that σ̄W started at x leaves (b, l) before time t (reflection series).

    Evaluates Σ_i sgn(i)[Φ(|2i(l−b) + x − b| / (σ̄√t)) + Φ(|2i(l−b) + l − x| / (σ̄√t))],
    the interior branch of the u_n family and, at x = 0, the two-point capacity.

    Parameters
    ----------
    t : float or array_like
        Effective time(s) > 0.
    x : float or array_like
        Starting point(s) in the open interval (b, l); broadcast against `t`.
    b, l : float
        Barriers, b < l.
    sigma_bar : float
        Volatility > 0.
    cfg : SeriesConfig, optional
        Truncation settings.

    Returns
    -------
    SeriesResult
        Value(s) in [0, 1] with the truncation index.

    Raises
    ------
    DomainError
        If an argument lies outside its domain.
    SeriesConvergenceError
        If `cfg.max_terms` is reached before the tolerance.
    """
    _check_barriers(b, l, sigma_bar)
    t_arr = _finite(t, "t")
    x_arr = _finite(x, "x")
    if np.any(t_arr <= 0):
        raise DomainError(f"Effective time must be positive, got {t!r}")
    if np.any((x_arr <= b) | (x_arr >= l)):
        raise DomainError(f"Starting point must lie in the open interval ({b}, {l})")

    width = l - b
    scale = sigma_bar * np.sqrt(t_arr)
    near, far = x_arr - b, l - x_arr
    near, far, scale = np.broadcast_arrays(near, far, scale)
    reach = np.maximum(near, far)

    def term(a, sign):
        return sign * _phi(np.abs(a) / scale)

    def cutoff(k):
        return 4.0 * _phi(((2.0 * k - 1.0) * width - reach) / scale)

    total, n_terms, bound = _reflection_sum(term, near, far, width, cutoff, cfg,
                                            what="exit probability series")
    value = _clamp_probability(total, cfg.tol, "exit probability series")
    return SeriesResult(value=_scalar_or_array(value), n_terms=n_terms, remainder_bound=bound)


def two_barrier_series_detail(b: float, l: float, t: float, sigma_bar: float,
                              cfg: SeriesConfig = SeriesConfig()) -> SeriesResult:
    """Two-point capacity c({B_t ∈ {b, l}}) with its truncation diagnostics.

    Σ_i sgn(i)[Φ(|2i(l−b) − b| / (σ̄√t)) + Φ(|2i(l−b) + l| / (σ̄√t))] with
    sgn(0) = +1, so the i = 0 pair Φ(−b/σ̄√t) + Φ(l/σ̄√t) enters positively.

    Raises
    ------
    DomainError
        If b >= 0, l <= 0, t <= 0 or sigma_bar <= 0.
    SeriesConvergenceError
        If the cap is reached before the tolerance.
    """
    if not (math.isfinite(b) and math.isfinite(l)) or b >= 0 or l <= 0:
        raise DomainError(f"Two-barrier series needs b < 0 < l, got b={b}, l={l}")
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"Effective time must be positive and finite, got {t}")
    result = exit_probability_series(t, 0.0, b, l, sigma_bar, cfg)
    logger.debug("two-barrier series b=%g l=%g t=%g sigma_bar=%g -> %.15g (|i| <= %d)",
                 b, l, t, sigma_bar, result.value, result.n_terms)
    return result


def two_barrier_series(b: float, l: float, t: float, sigma_bar: float,
                       cfg: SeriesConfig = SeriesConfig()) -> float:
    """Value of `two_barrier_series_detail`; a probability in [0, 1]."""
    return float(two_barrier_series_detail(b, l, t, sigma_bar, cfg).value)


def hitting_density(s, x: float, b: float, l: float, sigma_bar: float,
                    cfg: SeriesConfig = SeriesConfig()):
    """Density at time s of the first exit of x + σ̄W from (b, l).

    (2πσ̄²s³)^(−1/2) Σ_i [(2i(l−b) − b + x) e^{−(2i(l−b)−b+x)²/(2σ̄²s)}
                        + (2i(l−b) + l − x) e^{−(2i(l−b)+l−x)²/(2σ̄²s)}],
    the time derivative of `exit_probability_series`. Vectorized over `s`.

    Raises
    ------
    DomainError
        If x is not inside (b, l) or some s <= 0.
    """
    _check_barriers(b, l, sigma_bar)
    s_arr = _finite(s, "s")
    if np.any(s_arr <= 0):
        raise DomainError(f"Density time must be positive, got {s!r}")
    if not (math.isfinite(x) and b < x < l):
        raise DomainError(f"Starting point x={x} must lie in the open interval ({b}, {l})")

    width = l - b
    variance = sigma_bar ** 2 * s_arr
    # the prefactor (2πσ̄²s³)^(−1/2) overflows for tiny s; keep it inside the exponent
    log_norm = -math.log(sigma_bar) - 0.5 * math.log(2.0 * math.pi) - 1.5 * np.log(s_arr)
    near = np.full(s_arr.shape, x - b)
    far = np.full(s_arr.shape, l - x)
    reach = max(x - b, l - x)

    def term(a, sign):
        return a * np.exp(log_norm - a * a / (2.0 * variance))

    def cutoff(k):
        a_min = (2.0 * k - 1.0) * width - reach
        # a·exp(−a²/2v) decreases only beyond a = √v
        decreasing = a_min > np.sqrt(variance)
        tail = 4.0 * a_min * np.exp(log_norm - a_min * a_min / (2.0 * variance))
        return np.where(decreasing, tail, np.inf)

    with np.errstate(divide="ignore", over="ignore"):
        total, _, _ = _reflection_sum(term, near, far, width, cutoff, cfg,
                                      what="hitting-time density series")

    if np.any(total < -cfg.tol):
        message = f"hitting-time density is negative ({float(np.min(total)):.3e})"
        raise InternalConsistencyError(message)
    return _scalar_or_array(np.maximum(total, 0.0))


def survival_spectral(t, x, b: float, l: float, sigma_bar: float,
                      cfg: SeriesConfig = SeriesConfig()):
    """P(x + σ̄W stays in (b, l) up to time t) from the eigenfunction expansion.

    (4/π) Σ_{k>=0} sin((2k+1)π(x−b)/w) exp(−(2k+1)²π²σ̄²t / (2w²)) / (2k+1), w = l − b.
    Converges fast when σ̄²t is not small compared with w²; vectorized over (t, x).

    Raises
    ------
    DomainError
        If an argument lies outside its domain.
    SeriesConvergenceError
        If the cap is reached before the tolerance.
    """
    _check_barriers(b, l, sigma_bar)
    t_arr = _finite(t, "t")
    x_arr = _finite(x, "x")
    if np.any(t_arr <= 0):
        raise DomainError(f"Time must be positive, got {t!r}")
    if np.any((x_arr < b) | (x_arr > l)):
        raise DomainError(f"Starting point must lie in [{b}, {l}]")

    width = l - b
    t_arr, x_arr = np.broadcast_arrays(t_arr, x_arr)
    rate = (math.pi * sigma_bar / width) ** 2 / 2.0 * t_arr
    angle = math.pi * (x_arr - b) / width
    total = np.zeros(t_arr.shape)

    for k in range(cfg.max_terms + 1):
        m = 2 * k + 1
        envelope = 4.0 / math.pi / m * np.exp(-m * m * rate)
        total += envelope * np.sin(m * angle)
        # consecutive envelopes shrink at least by a factor exp(−8·rate)
        if total.size == 0 or 2.0 * float(np.max(envelope)) < cfg.tol:
            return _scalar_or_array(_clamp_probability(total, cfg.tol, "spectral survival"))

    message = f"spectral survival: no convergence within {cfg.max_terms} terms"
    raise SeriesConvergenceError(message, partial_sum=float(np.max(total)),
                                 remainder_bound=float(np.max(envelope)), n_terms=cfg.max_terms)


def exit_probability_spectral(t, x, b: float, l: float, sigma_bar: float,
                              cfg: SeriesConfig = SeriesConfig()):
    """1 − `survival_spectral`; the spectral counterpart of `exit_probability_series`."""
    survival = np.asarray(survival_spectral(t, x, b, l, sigma_bar, cfg))
    return _scalar_or_array(1.0 - survival)


def exit_probability_quadrature(t: float, x: float, b: float, l: float, sigma_bar: float,
                                cfg: SeriesConfig = SeriesConfig(), epsabs: float = 1e-13) -> float:
    """∫₀^t hitting_density(s, x) ds by adaptive Gauss-Kronrod quadrature.

    Equals `exit_probability_series(t, x, ...)` up to quadrature and truncation error;
    the density vanishes faster than any power as s -> 0, so the integrand is smooth.
    """
    if not (math.isfinite(t) and t > 0):
        raise DomainError(f"Integration horizon must be positive and finite, got {t}")
    value, abserr = quad(hitting_density, 0.0, t, args=(x, b, l, sigma_bar, cfg),
                         epsabs=epsabs, epsrel=1e-12, limit=200)
    logger.debug("density quadrature on (0, %g] at x=%g: %.15g (+- %.1e)", t, x, value, abserr)
    return float(value)


def hitting_time_mass(x: float, b: float, l: float, sigma_bar: float,
                      cfg: SeriesConfig = SeriesConfig(), split: float | None = None) -> float:
    """Total mass of the exit-time density: quadrature on (0, split] plus the spectral tail.

    ∫_split^∞ density = survival_spectral(split), so the result is 1 when the
    density is a proper probability density. `split` defaults to (l − b)²/σ̄².
    """
    if split is None:
        split = ((l - b) / sigma_bar) ** 2
    head = exit_probability_quadrature(split, x, b, l, sigma_bar, cfg)
    return head + float(survival_spectral(split, x, b, l, sigma_bar, cfg))
