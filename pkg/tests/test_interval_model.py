from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcfdyn.annulus_engine import parse_spec
from pcfdyn.codes import Code, Periodic, Preperiodic, WanderingUpToHorizon, champernowne_binary, classify_code
from pcfdyn.errors import Escaped, PreconditionError, ValidationError
from pcfdyn.examples import load_example
from pcfdyn.interval_model import (
    IntervalSystem,
    SubInterval,
    classify_point,
    code_interval,
    expansion,
    from_annular_spec,
    intervals_csv,
    itinerary,
    point_of_code,
    preimage_depth,
    semiconjugacy_check,
)

from .strategies import exact_specs


@pytest.fixture
def thirds():
    return IntervalSystem.from_dict(load_example("middle_thirds"))


def hand_pullback(n):
    """Depth-n intervals of the two middle-thirds branches, by direct inverse images."""
    inv = (lambda y: y / 3, lambda y: 1 - y / 3)
    level = [(F(0), F(1))]
    for _ in range(n):
        nxt = []
        for a, b in level:
            for g in inv:
                lo, hi = sorted((g(a), g(b)))
                nxt.append((lo, hi))
        level = nxt
    return sorted(level)


# -- construction ------------------------------------------------------------


def test_z3_shadow_is_middle_thirds():
    sys_ = from_annular_spec(parse_spec(load_example("z3_spec")))
    assert [(s.left, s.right, s.slope) for s in sys_.subintervals] == [
        (F(0), F(1, 3), F(3)),
        (F(2, 3), F(1), F(-3)),
    ]


def test_single_full_subinterval_is_degenerate():
    spec = parse_spec({"components": 1, "subannuli": [
        {"parent": 0, "target": 0, "degree": 1, "orientation": 1, "shares": [0, 1]}]})
    sys_ = from_annular_spec(spec)
    assert sys_.degenerate
    assert abs(sys_.subintervals[0].slope) == 1


def test_two_swapped_annuli_give_slope_two():
    spec = parse_spec({"components": 2, "subannuli": [
        {"parent": 0, "target": 1, "degree": 2, "orientation": 1, "shares": [0]},
        {"parent": 0, "target": 1, "degree": 2, "orientation": -1, "shares": [1]},
        {"parent": 1, "target": 0, "degree": 2, "orientation": 1, "shares": [0]},
        {"parent": 1, "target": 0, "degree": 2, "orientation": -1, "shares": [1]},
    ]})
    sys_ = from_annular_spec(spec)
    assert sorted(abs(s.slope) for s in sys_.subintervals) == [3, 3, 3, 3]  # equal slots: 1/3 each
    half = IntervalSystem(2, (
        SubInterval(0, 1, F(0), F(1, 2), 1), SubInterval(0, 1, F(1, 2), F(1), -1),
        SubInterval(1, 0, F(2), F(5, 2), 1), SubInterval(1, 0, F(5, 2), F(3), -1),
    ))
    assert [abs(s.slope) for s in half.subintervals] == [2, 2, 2, 2]


def test_inexact_spec_cannot_be_shadowed():
    spec = parse_spec({"components": 1, "subannuli": [
        {"parent": 0, "target": 0, "degree": 2, "shares": []},
        {"parent": 0, "target": 0, "degree": 2, "shares": []}]})
    with pytest.raises(PreconditionError):
        from_annular_spec(spec)


@pytest.mark.parametrize("subs", [
    [SubInterval(0, 0, F(0), F(1, 2), 1), SubInterval(0, 0, F(1, 3), F(1), 1)],  # overlap
    [SubInterval(0, 0, F(1, 3), F(2, 3), 1)],  # misses both ends
    [SubInterval(0, 1, F(0), F(1), 1)],  # dangling target
])
def test_invalid_systems_rejected(subs):
    with pytest.raises(ValidationError):
        IntervalSystem(1, tuple(subs))


# -- depth-n intervals -------------------------------------------------------


def test_depth_two_by_hand(thirds):
    got = [(i.left, i.right) for i in preimage_depth(thirds, 2)]
    assert sorted(got) == hand_pullback(2) == [(0, F(1, 9)), (F(2, 9), F(1, 3)), (F(2, 3), F(7, 9)), (F(8, 9), 1)]


def test_depth_zero_is_the_unit_interval(thirds):
    ints = preimage_depth(thirds, 0)
    assert [(i.left, i.right) for i in ints] == [(0, 1)]


def test_depth_ten(thirds):
    ints = preimage_depth(thirds, 10)
    assert len(ints) == 1024
    assert {i.length for i in ints} == {F(1, 3**10)}
    assert sorted((i.left, i.right) for i in ints) == hand_pullback(10)


def test_csv_rows(thirds):
    rows = intervals_csv(preimage_depth(thirds, 3)).strip().splitlines()
    assert rows[0] == "code,left,right"
    assert len(rows) == 9


# -- expansion ---------------------------------------------------------------


def test_middle_thirds_expansion(thirds):
    e = expansion(thirds)
    # a single step already stretches by 1 / |I^1_i| = 3
    assert (e.N, e.lam, e.C) == (1, pytest.approx(3.0), pytest.approx(1 / 3))


def test_unit_slope_branch_needs_two_steps():
    # I_0 maps onto I_1 isometrically, I_1 splits in two halves mapping back
    sys_ = IntervalSystem(2, (
        SubInterval(0, 1, F(0), F(1), 1),
        SubInterval(1, 0, F(2), F(5, 2), 1),
        SubInterval(1, 0, F(5, 2), F(3), -1),
    ))
    e = expansion(sys_)
    assert e.N == 2 and e.min_derivative == 2
    assert e.lam == pytest.approx(2 ** 0.5)


def test_degenerate_system_refused():
    sys_ = IntervalSystem(1, (SubInterval(0, 0, F(0), F(1), 1),))
    with pytest.raises(PreconditionError):
        expansion(sys_)


# -- itineraries -------------------------------------------------------------


def test_three_quarters_is_fixed(thirds):
    x = F(3, 4)
    assert 3 - 3 * x == x  # the decreasing branch fixes 3/4
    assert itinerary(thirds, x, 6) == (1,) * 6
    assert classify_point(thirds, x) == Periodic(1)


def test_one_quarter_is_preperiodic(thirds):
    assert 3 * F(1, 4) == F(3, 4)
    assert itinerary(thirds, F(1, 4), 5) == (0, 1, 1, 1, 1)
    assert classify_point(thirds, F(1, 4)) == Preperiodic(1, 1)


def test_gap_point_escapes(thirds):
    with pytest.raises(Escaped) as exc:
        itinerary(thirds, F(1, 2), 3)
    assert exc.value.step == 1


def test_round_trip(thirds):
    for x in (F(3, 4), F(1, 4), F(1, 10), F(9, 10)):
        J = point_of_code(thirds, itinerary(thirds, x, 8), 8)
        assert J.left <= x <= J.right


# -- codes -------------------------------------------------------------------


def test_code_classes():
    assert classify_code(Code.periodic([1])) == Periodic(1)
    assert classify_code(Code.periodic([1], prefix=[0])) == Preperiodic(1, 1)
    assert classify_code(Code.from_obj("0(1)")) == Preperiodic(1, 1)


@pytest.mark.parametrize("h", [32, 64, 128, 256, 512])
def test_champernowne_never_looks_periodic(h):
    assert classify_code(champernowne_binary(), horizon=h) == WanderingUpToHorizon(h)


def test_champernowne_prefix():
    assert champernowne_binary().take(14) == (0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 0, 0, 0, 0)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=5), st.lists(st.integers(0, 3), max_size=4),
       st.integers(0, 12))
def test_shift_agrees_with_indexing(cycle, prefix, k):
    c = Code.periodic(cycle, prefix)
    assert c.shift(k).take(10) == tuple(c[i] for i in range(k, k + 10))
    n = c.normalized()
    assert n.take(40) == c.take(40)


# -- semiconjugacy -----------------------------------------------------------


def test_middle_thirds_semiconjugacy_all_codes(thirds):
    spec = parse_spec(load_example("z3_spec"))
    res = semiconjugacy_check(thirds, spec, 6)
    assert res.ok and res.checked == sum(2**k for k in range(1, 7))


def test_permutation_system_semiconjugacy():
    spec = parse_spec({"components": 2, "subannuli": [
        {"parent": 0, "target": 1, "degree": 2, "orientation": 1, "shares": [0, 1]},
        {"parent": 1, "target": 0, "degree": 2, "orientation": 1, "shares": [0, 1]}]})
    sys_ = from_annular_spec(spec)
    assert semiconjugacy_check(sys_, spec, 5).ok


def test_corrupted_target_is_caught(thirds):
    spec = parse_spec({"components": 2, "subannuli": [
        {"parent": 0, "target": 1, "degree": 3, "orientation": 1, "shares": [0]},
        {"parent": 0, "target": 0, "degree": 3, "orientation": -1, "shares": [1]},
        {"parent": 1, "target": 0, "degree": 3, "orientation": 1, "shares": [0, 1]}]})
    good = from_annular_spec(spec)
    bad_subs = list(good.subintervals)
    s = bad_subs[0]
    bad_subs[0] = SubInterval(s.parent, 0, s.left, s.right, s.sign)
    res = semiconjugacy_check(IntervalSystem(2, tuple(bad_subs)), spec, 4)
    assert not res.ok and res.witness is not None


# -- properties --------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(exact_specs())
def test_nesting_and_onto(spec):
    sys_ = from_annular_spec(spec)
    for n in range(1, 4):
        parents = {i.code: i for i in preimage_depth(sys_, n - 1)}
        for J in preimage_depth(sys_, n):
            P = parents[J.code[:-1]] if n > 1 else None
            if P is not None:
                assert P.left <= J.left < J.right <= P.right
            # sigma maps J onto the interval of the shifted code
            if n > 1:
                K = code_interval(sys_, J.code[1:])
                target = (K.left, K.right)
            else:
                target = sys_.interval(sys_.subintervals[J.code[0]].target)
            a, b = sys_.branch(J.code[0], J.left), sys_.branch(J.code[0], J.right)
            assert (min(a, b), max(a, b)) == target


@settings(max_examples=60, deadline=None)
@given(exact_specs())
def test_slopes_at_least_one_and_endpoints_survive(spec):
    sys_ = from_annular_spec(spec)
    assert all(abs(s.slope) >= 1 for s in sys_.subintervals)
    ends = {x for J in preimage_depth(sys_, 3) for x in (J.left, J.right)}
    for x in ends:
        itinerary(sys_, x, 8)  # never escapes


@settings(max_examples=40, deadline=None)
@given(exact_specs())
def test_interval_lengths_contract(spec):
    sys_ = from_annular_spec(spec)
    if sys_.degenerate:
        return
    e = expansion(sys_)
    longest = [max(J.length for J in preimage_depth(sys_, n)) for n in range(0, 2 * e.N + 2)]
    for n in range(len(longest) - e.N):
        assert longest[n + e.N] <= longest[n] / F(e.min_derivative)


@settings(max_examples=40, deadline=None)
@given(exact_specs())
def test_shadow_semiconjugacy(spec):
    assert semiconjugacy_check(from_annular_spec(spec), spec, 4).ok


@settings(max_examples=40, deadline=None)
@given(exact_specs(max_components=2, max_children=2))
def test_each_interval_splits_after_the_expansion_horizon(spec):
    sys_ = from_annular_spec(spec)
    if sys_.degenerate:
        return
    step = expansion(sys_).N * sys_.n_intervals
    if 1 + step > 8:
        return
    deep = preimage_depth(sys_, 1 + step)
    for J in preimage_depth(sys_, 1):
        assert sum(J.left <= K.left and K.right <= J.right for K in deep) >= 2
