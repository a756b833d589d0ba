'''
Closed-form G-capacities c({B_T ∈ A}) in the degenerate case σ̲ = 0.

A set with ρ(A) = 0 has capacity 1, a set on one side of the origin has capacity
Φ(ρ(A)/(σ̄√T)), and a set on both sides has the capacity of the two-point set
{−ρ(A⁻), ρ(A⁺)}, given by the double-barrier reflection series. The module also
exposes the explicit family u_n whose limit at (T, 0) is the two-point capacity,
and the continuous approximations φ_k ↓ I_A used to reach capacities through the
G-heat equation.
'''
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, UnsupportedRegimeError, ValidationError
from .borel_set import BorelSetSpec, CaseTag, Interval, SetClassification, classify
from .special_fn import SeriesConfig, _phi, exit_probability_series, phi, two_barrier_series_detail

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CapacityParams:
    """
    Volatility bounds, horizon and series settings.

    Parameters
    ----------
    sigma_bar : float
        Upper volatility σ̄ > 0.
    sigma_under : float, optional
        Lower volatility σ̲ ∈ [0, σ̄], by default 0 (the degenerate case).
    horizon_T : float, optional
        Time horizon T > 0, by default 1.
    series : SeriesConfig, optional
        Truncation settings for the reflection sums.
    """
    sigma_bar: float
    sigma_under: float = 0.0
    horizon_T: float = 1.0
    series: SeriesConfig = field(default_factory=SeriesConfig)

    def __post_init__(self):
        self._assertions()

    def _assertions(self):
        """Checks 0 <= σ̲ <= σ̄, σ̄ > 0 and T > 0."""
        values = (self.sigma_bar, self.sigma_under, self.horizon_T)
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in values):
            raise ValidationError(f"Capacity parameters must be finite numbers, got {values}")

        message = f"sigma_bar must be positive, got {self.sigma_bar}"
        if self.sigma_bar <= 0:
            raise ValidationError(message)

        message = f"sigma_under must lie in [0, sigma_bar={self.sigma_bar}], got {self.sigma_under}"
        if not 0 <= self.sigma_under <= self.sigma_bar:
            raise ValidationError(message)

        message = f"horizon_T must be positive, got {self.horizon_T}"
        if self.horizon_T <= 0:
            raise ValidationError(message)

    @property
    def scale(self) -> float:
        """σ̄√T, the natural length scale at the horizon."""
        return self.sigma_bar * math.sqrt(self.horizon_T)

    def require_degenerate(self):
        """Raises `UnsupportedRegimeError` unless σ̲ = 0."""
        if self.sigma_under != 0:
            message = (f"Closed-form capacities need sigma_under = 0, got {self.sigma_under}; "
                       "use the PDE solver for the non-degenerate equation")
            raise UnsupportedRegimeError(message)


@dataclass(frozen=True)
class CapacityResult:
    """
    A capacity with the data that produced it.

    Attributes
    ----------
    value : float
        c({B_T ∈ A}) in [0, 1].
    classification : SetClassification
        ρ values and case tag of the set.
    n_terms : int
        Truncation index of the series (0 when no series was needed).
    empty_set : bool
        True when A = ∅ and the value 0 is a convention.
    """
    value: float
    classification: SetClassification
    n_terms: int = 0
    empty_set: bool = False

    def to_dict(self) -> dict:
        return {
            "capacity": self.value,
            "classification": self.classification.to_dict(),
            "truncation_index": self.n_terms,
            "empty_set": self.empty_set,
        }


def capacity_report(spec: BorelSetSpec, p: CapacityParams) -> CapacityResult:
    """Capacity of {B_T ∈ A} together with its classification and truncation index.

    Parameters
    ----------
    spec : BorelSetSpec
        The set A (normalized internally).
    p : CapacityParams
        Parameters; σ̲ must be 0.

    Returns
    -------
    CapacityResult
        1 when ρ(A) = 0; Φ(ρ(A)/(σ̄√T)) for one-sided sets; the two-point series at
        (−ρ(A⁻), ρ(A⁺)) for two-sided sets; 0 with `empty_set` for A = ∅.

    Raises
    ------
    UnsupportedRegimeError
        If σ̲ != 0.
    SeriesConvergenceError
        If the two-sided series does not converge within the cap.
    """
    p.require_degenerate()
    classification = classify(spec)

    if classification.case_tag is CaseTag.EMPTY:
        logger.warning("capacity of the empty event requested; returning 0")
        return CapacityResult(0.0, classification, empty_set=True)

    if classification.case_tag is CaseTag.FULL_IF_RHO_ZERO:
        return CapacityResult(1.0, classification)

    if classification.case_tag is CaseTag.ONE_SIDED:
        return CapacityResult(phi(classification.rho / p.scale), classification)

    # every two-sided set has the capacity of {−ρ(A⁻), ρ(A⁺)}
    series = two_barrier_series_detail(-classification.rho_minus, classification.rho_plus,
                                       p.horizon_T, p.sigma_bar, p.series)
    return CapacityResult(float(series.value), classification, n_terms=series.n_terms)


def capacity_of(spec: BorelSetSpec, p: CapacityParams) -> float:
    """c({B_T ∈ A}) for a finite union of intervals and points; see `capacity_report`."""
    return capacity_report(spec, p).value


def capacity_point(a: float, p: CapacityParams) -> float:
    """c({B_T = a}) = Φ(|a|/(σ̄√T))."""
    p.require_degenerate()
    if not math.isfinite(a):
        raise DomainError(f"Point must be finite, got {a}")
    return phi(abs(a) / p.scale)


def capacity_ray(a: float, direction: str, p: CapacityParams) -> float:
    """c({B_T >= |a|}) for direction ">=" and c({B_T <= −|a|}) for "<="; both equal Φ(|a|/(σ̄√T)).

    Parameters
    ----------
    a : float
        Finite threshold; only |a| matters.
    direction : str
        ">=" (or "ge") for the right ray, "<=" (or "le") for the left ray.
    p : CapacityParams
        Parameters; σ̲ must be 0.
    """
    if direction not in (">=", "ge", "<=", "le"):
        raise ValidationError(f"direction must be '>=' or '<=', got {direction!r}")
    p.require_degenerate()
    if not math.isfinite(a):
        raise DomainError(f"Ray threshold must be finite, got {a}")
    return phi(abs(a) / p.scale)


def ray_spec(a: float, direction: str) -> BorelSetSpec:
    """The set [|a|, ∞) or (−∞, −|a|] as a `BorelSetSpec`."""
    if direction in (">=", "ge"):
        return BorelSetSpec(intervals=(Interval(abs(a), math.inf, True, False),))
    if direction in ("<=", "le"):
        return BorelSetSpec(intervals=(Interval(-math.inf, -abs(a), False, True),))
    raise ValidationError(f"direction must be '>=' or '<=', got {direction!r}")


def u_n(n: int, t, x, b: float, l: float, p: CapacityParams):
    """The explicit solution u_n(t, x) of the degenerate G-heat equation.

    With τ = 1/n + t:
    inside (b, l) the reflection series Σ_i sgn(i)[Φ(|2i(l−b)+x−b|/(σ̄√τ)) + Φ(|2i(l−b)+l−x|/(σ̄√τ))],
    on (−∞, b] ∪ [l, ∞) the single term Φ((|b−x| ∧ |l−x|)/(σ̄√τ)).
    u_n(0, ·) decreases to I_{b, l} as n grows and u_n(T, 0) tends to c({B_T ∈ {b, l}}).

    Parameters
    ----------
    n : int
        Index n >= 1.
    t : float or array_like
        Time(s) >= 0.
    x : float or array_like
        Space point(s); broadcast against `t`.
    b, l : float
        Barriers with b < 0 < l.
    p : CapacityParams
        Parameters; σ̲ must be 0.

    Returns
    -------
    float or numpy.ndarray
        Values in [0, 1].
    """
    p.require_degenerate()
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ValidationError(f"n must be an integer >= 1, got {n!r}")
    if not (math.isfinite(b) and math.isfinite(l)) or b >= 0 or l <= 0:
        raise DomainError(f"u_n needs b < 0 < l, got b={b}, l={l}")

    t_arr = np.asarray(t, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if not (np.all(np.isfinite(t_arr)) and np.all(np.isfinite(x_arr))):
        raise DomainError("u_n arguments must be finite")
    if np.any(t_arr < 0):
        raise DomainError(f"u_n time must be >= 0, got {t!r}")

    tau, x_arr = np.broadcast_arrays(1.0 / n + t_arr, x_arr)
    values = np.empty(tau.shape)

    inside = (x_arr > b) & (x_arr < l)
    outside = ~inside
    if np.any(outside):
        gap = np.minimum(np.abs(b - x_arr[outside]), np.abs(l - x_arr[outside]))
        values[outside] = _phi(gap / (p.sigma_bar * np.sqrt(tau[outside])))
    if np.any(inside):
        series = exit_probability_series(tau[inside], x_arr[inside], b, l, p.sigma_bar, p.series)
        values[inside] = series.value

    return float(values) if values.ndim == 0 else values


def indicator_approximation(spec: BorelSetSpec, k: float):
    """Continuous φ_k(x) = max(0, 1 − k·dist(x, A)), decreasing to the indicator of the closure of A.

    Parameters
    ----------
    spec : BorelSetSpec
        The set A.
    k : float
        Steepness k > 0; φ_k is k-Lipschitz and bounded by 1.

    Returns
    -------
    callable
        Vectorized function of x.
    """
    if not (math.isfinite(k) and k > 0):
        raise ValidationError(f"Steepness k must be positive, got {k}")

    def phi_k(x):
        return np.maximum(0.0, 1.0 - k * spec.distance(x))

    return phi_k


def monotone_capacity_sequence(spec: BorelSetSpec, p: CapacityParams, g=None,
                               k_list=(1, 2, 4, 8, 16, 32, 64), max_workers=None) -> np.ndarray:
    """PDE values Ê[φ_k(B_T)] for the approximations φ_k ↓ I_A, one per k.

    The sequence is nonincreasing in k and tends to the capacity of the closure
    of A. Works for any σ̲ the PDE solver accepts.

    Parameters
    ----------
    spec : BorelSetSpec
        The set A.
    p : CapacityParams
        Parameters.
    g : GridConfig, optional
        Grid; defaults to `GridConfig.padded` around the finite part of A.
    k_list : sequence of float
        Increasing steepness values.
    max_workers : int, optional
        Thread count for the batched solve.

    Returns
    -------
    numpy.ndarray
        u(T, 0) for each k, in the order of `k_list`.
    """
    # imported here: the PDE layer depends on this module for its capacity checks
    from ..pde.gheat_pde import GridConfig, solve_batch, value_at_zero

    if g is None:
        ends = [abs(v) for piece in spec.intervals for v in (piece.lo, piece.hi) if math.isfinite(v)]
        ends += [abs(v) for v in spec.points]
        g = GridConfig.padded(max(ends, default=0.0), p, p.horizon_T)

    x = g.nodes()
    initials = np.stack([indicator_approximation(spec, k)(x) for k in k_list])
    finals = solve_batch(initials, p.horizon_T, p, g, max_workers=max_workers)
    values = value_at_zero(finals, g)
    logger.info("monotone approximation of %r: %s", spec, np.array2string(values, precision=6))
    return values
