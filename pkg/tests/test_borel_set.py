'''
Tests for set normalization, the ρ functionals and the JSON set encoding.
'''
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gcapacity.analysis.borel_set import (BorelSetSpec, CaseTag, Interval, Side, classify,
                                          normalize, parse_set_json, set_to_json, union)
from gcapacity.errors import ValidationError

INF = math.inf

lattice = st.integers(-100, 100).map(lambda k: k / 20)


@st.composite
def intervals(draw):
    lo, hi = sorted((draw(lattice), draw(lattice)))
    if lo == hi:
        return Interval(lo, hi)
    if draw(st.booleans()):
        lo = -INF if draw(st.booleans()) else lo
    return Interval(lo, hi, draw(st.booleans()), draw(st.booleans()))


borel_sets = st.builds(lambda pieces, points: BorelSetSpec(intervals=pieces, points=points),
                       st.lists(intervals(), max_size=3), st.lists(lattice, max_size=2))


def test_normalize_merges_and_absorbs():
    spec = BorelSetSpec(intervals=(Interval(1.0, 3.0), Interval(0.0, 2.0),
                                   Interval(3.0, 4.0, False, True), Interval(5.0, 6.0, False, False)),
                        points=(2.5, 5.0, 7.0, 7.0))
    normal = normalize(spec)
    assert normal.intervals == (Interval(0.0, 4.0), Interval(5.0, 6.0, True, False))
    assert normal.points == (7.0,)


def test_normalize_keeps_gap_at_shared_open_endpoint():
    spec = BorelSetSpec(intervals=(Interval(0.0, 1.0, True, False), Interval(1.0, 2.0, False, True)))
    assert len(normalize(spec).intervals) == 2

    closed_gap = BorelSetSpec(intervals=spec.intervals, points=(1.0,))
    assert normalize(closed_gap).intervals == (Interval(0.0, 2.0),)


def test_degenerate_interval_becomes_point():
    normal = normalize(BorelSetSpec(intervals=(Interval(1.5, 1.5),)))
    assert normal.intervals == ()
    assert normal.points == (1.5,)


def test_infinite_endpoints_are_stored_open():
    normal = normalize(BorelSetSpec(intervals=(Interval(-INF, -1.0, True, True),)))
    assert normal.intervals[0] == Interval(-INF, -1.0, False, True)


@pytest.mark.parametrize("spec, case_tag, rho, rho_plus, rho_minus, side", [
    (BorelSetSpec(points=(0.0,)), CaseTag.FULL_IF_RHO_ZERO, 0.0, 0.0, 0.0, Side.NONNEG),
    (BorelSetSpec(intervals=(Interval(0.0, 1.0, False, False),)),
     CaseTag.FULL_IF_RHO_ZERO, 0.0, 0.0, INF, Side.NONNEG),
    (BorelSetSpec(intervals=(Interval(0.5, 3.0),)), CaseTag.ONE_SIDED, 0.5, 0.5, INF, Side.NONNEG),
    (BorelSetSpec(intervals=(Interval(-INF, -2.0, False, False),)),
     CaseTag.ONE_SIDED, 2.0, INF, 2.0, Side.NONPOS),
    (BorelSetSpec(points=(-1.0, 1.0)), CaseTag.TWO_SIDED, 1.0, 1.0, 1.0, Side.MIXED),
    (BorelSetSpec(intervals=(Interval(-INF, -1.0, False, True), Interval(2.0, INF, True, False))),
     CaseTag.TWO_SIDED, 1.0, 2.0, 1.0, Side.MIXED),
    (BorelSetSpec(intervals=(Interval(-1.0, 2.0),)), CaseTag.FULL_IF_RHO_ZERO, 0.0, 0.0, 0.0, Side.MIXED),
    (BorelSetSpec(), CaseTag.EMPTY, INF, INF, INF, Side.NONE),
])
def test_classify_examples(spec, case_tag, rho, rho_plus, rho_minus, side):
    result = classify(spec)
    assert result.case_tag is case_tag
    assert (result.rho, result.rho_plus, result.rho_minus) == (rho, rho_plus, rho_minus)
    assert result.side is side


def test_classification_serializes_infinities():
    document = classify(BorelSetSpec(intervals=(Interval(0.5, 3.0),))).to_dict()
    assert document == {"case_tag": "ONE_SIDED", "rho": 0.5, "rho_plus": 0.5,
                        "rho_minus": "inf", "side": "nonneg"}


def test_membership_and_distance():
    spec = BorelSetSpec(intervals=(Interval(0.0, 1.0, True, False),), points=(3.0,))
    x = np.array([-0.5, 0.0, 0.5, 1.0, 2.0, 3.0])
    np.testing.assert_array_equal(spec.contains(x), [False, True, True, False, False, True])
    np.testing.assert_allclose(spec.distance(x), [0.5, 0.0, 0.0, 0.0, 1.0, 0.0])
    assert np.all(np.isinf(BorelSetSpec().distance(x)))


@pytest.mark.parametrize("build", [
    lambda: Interval(2.0, 1.0),
    lambda: Interval(math.nan, 1.0),
    lambda: Interval(1.0, 1.0, False, True),
    lambda: BorelSetSpec(points=(math.inf,)),
    lambda: BorelSetSpec(intervals=((0.0, 1.0),)),
])
def test_structural_validation(build):
    with pytest.raises(ValidationError):
        build()


def test_parse_set_json():
    spec = parse_set_json({"intervals": [["-inf", -1, "open", "closed"], [2, "inf"]],
                           "points": [0.5]})
    assert spec.intervals[0] == Interval(-INF, -1.0, False, True)
    assert spec.intervals[1] == Interval(2.0, INF, True, False)
    assert spec.points == (0.5,)
    assert parse_set_json({}).is_empty
    assert parse_set_json(set_to_json(spec)) == spec


@pytest.mark.parametrize("document", [
    [],
    {"interval": [[0, 1]]},
    {"intervals": [[0]]},
    {"intervals": [[0, 1, "half", "closed"]]},
    {"intervals": [["nan", 1]]},
    {"points": ["inf"]},
    {"points": [True]},
])
def test_parse_set_json_rejects(document):
    with pytest.raises(ValidationError):
        parse_set_json(document)


@settings(max_examples=200, deadline=None)
@given(spec=borel_sets)
def test_normalize_is_idempotent_and_preserves_classification(spec):
    normal = normalize(spec)
    assert normalize(normal) == normal
    assert classify(normal) == classify(spec)

    points = np.linspace(-6.0, 6.0, 241)
    np.testing.assert_array_equal(normal.contains(points), spec.contains(points))


@settings(max_examples=200, deadline=None)
@given(first=borel_sets, second=borel_sets)
def test_rho_shrinks_under_union(first, second):
    joined = classify(union(first, second))
    alone = classify(first)
    assert joined.rho <= alone.rho
    assert joined.rho_plus <= alone.rho_plus
    assert joined.rho_minus <= alone.rho_minus
    assert joined.rho == min(joined.rho_plus, joined.rho_minus)
