'''
Finite unions of intervals and isolated points, the sets A for which the
capacity c({B_T ∈ A}) is computed. The capacity depends on A only through
ρ(A) = inf{|x| : x ∈ A}, ρ(A⁺) = inf{x ∈ A : x ≥ 0} and ρ(A⁻) = inf{−x ∈ A : x ≤ 0},
so endpoint openness is tracked but never changes a ρ value.
'''
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import ValidationError
from ..utils import format_real, parse_real

logger = logging.getLogger(__name__)


class CaseTag(str, Enum):
    """Which branch of the capacity trichotomy a set falls into."""
    FULL_IF_RHO_ZERO = "FULL_IF_RHO_ZERO"
    ONE_SIDED = "ONE_SIDED"
    TWO_SIDED = "TWO_SIDED"
    EMPTY = "EMPTY"


class Side(str, Enum):
    """Position of the set relative to the origin."""
    NONNEG = "nonneg"
    NONPOS = "nonpos"
    MIXED = "mixed"
    NONE = "none"


@dataclass(frozen=True)
class Interval:
    """
    An interval with possibly unbounded or open endpoints.

    Parameters
    ----------
    lo, hi : float
        Endpoints; `-inf` / `inf` for unbounded sides. lo <= hi.
    lo_closed, hi_closed : bool
        Whether the endpoint belongs to the interval. Infinite endpoints are
        never members and should be given as open.
    """
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self):
        self._assertions()

    def _assertions(self):
        """Rejects NaN, reversed and empty intervals."""
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValidationError(f"Interval endpoints must not be NaN: {self}")

        message = f"Interval lower endpoint {self.lo} exceeds upper endpoint {self.hi}"
        if self.lo > self.hi:
            raise ValidationError(message)

        message = f"Degenerate interval [{self.lo}, {self.hi}] must be closed on both ends"
        if self.lo == self.hi and not (self.lo_closed and self.hi_closed and math.isfinite(self.lo)):
            raise ValidationError(message)

    @property
    def lo_member(self) -> bool:
        """True when the lower endpoint is a finite member."""
        return self.lo_closed and math.isfinite(self.lo)

    @property
    def hi_member(self) -> bool:
        """True when the upper endpoint is a finite member."""
        return self.hi_closed and math.isfinite(self.hi)

    def contains(self, x):
        """Vectorized membership test."""
        x = np.asarray(x, dtype=float)
        above = (x >= self.lo) if self.lo_member else (x > self.lo)
        below = (x <= self.hi) if self.hi_member else (x < self.hi)
        return above & below

    def __repr__(self):
        left = "[" if self.lo_member else "("
        right = "]" if self.hi_member else ")"
        return f"{left}{self.lo}, {self.hi}{right}"


@dataclass(frozen=True)
class BorelSetSpec:
    """
    A finite union of intervals and isolated points.

    Parameters
    ----------
    intervals : tuple of Interval
        The interval pieces.
    points : tuple of float
        Isolated points.

    Examples
    --------
    >>> A = BorelSetSpec(intervals=(Interval(0.0, 2.0), Interval(1.0, 3.0)))
    >>> normalize(A).intervals
    ([0.0, 3.0],)
    """
    intervals: tuple = field(default_factory=tuple)
    points: tuple = field(default_factory=tuple)

    def __post_init__(self):
        # accept lists for convenience, store tuples so the value stays hashable
        object.__setattr__(self, "intervals", tuple(self.intervals))
        object.__setattr__(self, "points", tuple(float(p) for p in self.points))
        self._assertions()

    def _assertions(self):
        """Checks the element types and rejects non-finite points."""
        for piece in self.intervals:
            if not isinstance(piece, Interval):
                raise ValidationError(f"Expected Interval instances, got {piece!r}")

        message = f"Isolated points must be finite, got {self.points}"
        if not all(math.isfinite(p) for p in self.points):
            raise ValidationError(message)

    @property
    def is_empty(self) -> bool:
        return not self.intervals and not self.points

    def contains(self, x):
        """Vectorized membership test x ∈ A."""
        x = np.asarray(x, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        for piece in self.intervals:
            inside |= piece.contains(x)
        for p in self.points:
            inside |= x == p
        return inside

    def distance(self, x):
        """Vectorized distance from x to the closure of A (inf for the empty set)."""
        x = np.asarray(x, dtype=float)
        dist = np.full(x.shape, np.inf)
        for piece in self.intervals:
            gap = np.maximum(piece.lo - x, x - piece.hi)
            dist = np.minimum(dist, np.maximum(gap, 0.0))
        for p in self.points:
            dist = np.minimum(dist, np.abs(x - p))
        return dist

    def __repr__(self):
        pieces = [repr(piece) for piece in self.intervals] + [f"{{{p}}}" for p in self.points]
        return "BorelSetSpec(" + (" ∪ ".join(pieces) if pieces else "∅") + ")"


@dataclass(frozen=True)
class SetClassification:
    """
    The ρ functionals of a set and its branch of the capacity trichotomy.

    Attributes
    ----------
    case_tag : CaseTag
        FULL_IF_RHO_ZERO, ONE_SIDED, TWO_SIDED or EMPTY.
    rho : float
        inf{|x| : x ∈ A} (inf for the empty set).
    rho_plus : float
        inf{x ∈ A : x >= 0}, +inf when no such point exists.
    rho_minus : float
        inf{−x : x ∈ A, x <= 0}, +inf when no such point exists.
    side : Side
        nonneg, nonpos, mixed or none.
    """
    case_tag: CaseTag
    rho: float
    rho_plus: float
    rho_minus: float
    side: Side

    def to_dict(self) -> dict:
        return {
            "case_tag": self.case_tag.value,
            "rho": format_real(self.rho),
            "rho_plus": format_real(self.rho_plus),
            "rho_minus": format_real(self.rho_minus),
            "side": self.side.value,
        }


def _touching(left: Interval, right: Interval) -> bool:
    """True when two sorted intervals overlap or share a member endpoint."""
    if right.lo < left.hi:
        return True
    return right.lo == left.hi and (left.hi_member or right.lo_member)


def _merge(left: Interval, right: Interval) -> Interval:
    """Union of two touching intervals."""
    lo = min(left.lo, right.lo)
    hi = max(left.hi, right.hi)
    lo_closed = any(piece.lo_member for piece in (left, right) if piece.lo == lo)
    hi_closed = any(piece.hi_member for piece in (left, right) if piece.hi == hi)
    return Interval(lo, hi, lo_closed, hi_closed)


def _canonical(piece: Interval) -> Interval:
    """Infinite endpoints are never members; store them as open."""
    return Interval(piece.lo, piece.hi, piece.lo_member, piece.hi_member)


def normalize(spec: BorelSetSpec) -> BorelSetSpec:
    """Sorted, pairwise disjoint representation of a set; idempotent.

    Overlapping or touching intervals are merged, a point that closes an open
    endpoint is absorbed into the interval, points inside intervals are dropped,
    degenerate intervals [a, a] become points and duplicates are removed.

    Parameters
    ----------
    spec : BorelSetSpec
        Any structurally valid set.

    Returns
    -------
    BorelSetSpec
        The normal form.
    """
    pieces = []
    points = set(spec.points)
    for piece in spec.intervals:
        if piece.lo == piece.hi:
            points.add(piece.lo)
        else:
            pieces.append(_canonical(piece))

    # absorb points sitting on open endpoints before merging
    closed = []
    for piece in pieces:
        lo_closed = piece.lo_member or piece.lo in points
        hi_closed = piece.hi_member or piece.hi in points
        closed.append(Interval(piece.lo, piece.hi, lo_closed, hi_closed))

    closed.sort(key=lambda piece: (piece.lo, not piece.lo_member, piece.hi))
    merged = []
    for piece in closed:
        if merged and _touching(merged[-1], piece):
            merged[-1] = _merge(merged[-1], piece)
        else:
            merged.append(piece)

    isolated = sorted(p for p in points if not any(piece.contains(p) for piece in merged))
    return BorelSetSpec(intervals=tuple(merged), points=tuple(isolated))


def union(first: BorelSetSpec, second: BorelSetSpec) -> BorelSetSpec:
    """Normalized union of two sets."""
    return normalize(BorelSetSpec(intervals=first.intervals + second.intervals,
                                  points=first.points + second.points))


def _rho_plus(spec: BorelSetSpec) -> float:
    """inf{x ∈ A : x >= 0}; open endpoints count toward the infimum."""
    best = math.inf
    for piece in spec.intervals:
        if piece.hi > 0:
            best = min(best, max(piece.lo, 0.0))
        elif piece.hi == 0 and piece.hi_member:
            best = 0.0
    for p in spec.points:
        if p >= 0:
            best = min(best, p)
    return best


def _rho_minus(spec: BorelSetSpec) -> float:
    """inf{−x : x ∈ A, x <= 0}; open endpoints count toward the infimum."""
    best = math.inf
    for piece in spec.intervals:
        if piece.lo < 0:
            best = min(best, -min(piece.hi, 0.0))
        elif piece.lo == 0 and piece.lo_member:
            best = 0.0
    for p in spec.points:
        if p <= 0:
            best = min(best, -p)
    return best


def classify(spec: BorelSetSpec) -> SetClassification:
    """Computes ρ(A), ρ(A⁺), ρ(A⁻) and the branch of the capacity trichotomy.

    Parameters
    ----------
    spec : BorelSetSpec
        The set; normalized internally.

    Returns
    -------
    SetClassification
        EMPTY for the empty set; FULL_IF_RHO_ZERO when ρ(A) = 0; ONE_SIDED when
        A ⊂ [0, ∞) or A ⊂ (−∞, 0]; TWO_SIDED otherwise.

    Examples
    --------
    >>> classify(BorelSetSpec(intervals=(Interval(0.5, 3.0),))).case_tag
    <CaseTag.ONE_SIDED: 'ONE_SIDED'>
    """
    spec = normalize(spec)
    if spec.is_empty:
        return SetClassification(CaseTag.EMPTY, math.inf, math.inf, math.inf, Side.NONE)

    rho_plus = _rho_plus(spec)
    rho_minus = _rho_minus(spec)

    has_pos = any(piece.hi > 0 for piece in spec.intervals) or any(p > 0 for p in spec.points)
    has_neg = any(piece.lo < 0 for piece in spec.intervals) or any(p < 0 for p in spec.points)
    rho = min(rho_plus, rho_minus)

    if has_pos and has_neg:
        side = Side.MIXED
    elif has_neg:
        side = Side.NONPOS
    else:
        side = Side.NONNEG

    if rho == 0:
        case_tag = CaseTag.FULL_IF_RHO_ZERO
    elif side is Side.MIXED:
        case_tag = CaseTag.TWO_SIDED
    else:
        case_tag = CaseTag.ONE_SIDED

    classification = SetClassification(case_tag, rho, rho_plus, rho_minus, side)
    logger.debug("classified %r as %s", spec, classification)
    return classification


def parse_set_json(document) -> BorelSetSpec:
    """Decodes the JSON set encoding used by the command line.

    Parameters
    ----------
    document : dict
        {"intervals": [[lo, hi, "closed|open", "closed|open"], ...], "points": [x, ...]}
        with "-inf"/"inf" sentinels for unbounded endpoints. Both keys are optional.

    Returns
    -------
    BorelSetSpec
        The decoded (not yet normalized) set.

    Raises
    ------
    ValidationError
        On unknown keys, malformed entries or NaN endpoints.
    """
    if not isinstance(document, dict):
        raise ValidationError(f"A set must be a JSON object, got {type(document).__name__}")

    unknown = set(document) - {"intervals", "points"}
    if unknown:
        raise ValidationError(f"Unknown keys in set JSON: {sorted(unknown)}")

    flags = {"closed": True, "open": False}
    intervals = []
    for entry in document.get("intervals", []):
        if not isinstance(entry, (list, tuple)) or len(entry) not in (2, 4):
            message = f"Interval entry must be [lo, hi] or [lo, hi, 'closed|open', 'closed|open'], got {entry!r}"
            raise ValidationError(message)
        lo, hi = parse_real(entry[0]), parse_real(entry[1])
        kinds = entry[2:] if len(entry) == 4 else ("closed", "closed")
        if any(kind not in flags for kind in kinds):
            raise ValidationError(f"Endpoint kinds must be 'closed' or 'open', got {kinds!r}")
        intervals.append(Interval(lo, hi, flags[kinds[0]] and math.isfinite(lo),
                                  flags[kinds[1]] and math.isfinite(hi)))

    points = []
    for token in document.get("points", []):
        value = parse_real(token)
        if not math.isfinite(value):
            raise ValidationError(f"Isolated points must be finite, got {token!r}")
        points.append(value)

    return BorelSetSpec(intervals=tuple(intervals), points=tuple(points))


def set_to_json(spec: BorelSetSpec) -> dict:
    """Encodes a set in the JSON form read by `parse_set_json`."""
    kind = {True: "closed", False: "open"}
    return {
        "intervals": [[format_real(piece.lo), format_real(piece.hi),
                       kind[piece.lo_member], kind[piece.hi_member]] for piece in spec.intervals],
        "points": list(spec.points),
    }
