from fractions import Fraction as F
from math import prod

import pytest
from hypothesis import given, settings

from pcfdyn.annulus_engine import (
    CompactlyNestedAt,
    SharesBoundaryForever,
    boundary_code,
    codes,
    component_class,
    component_counts,
    degree_growth_N,
    hull_annulus,
    nested_fate,
    parse_spec,
    realize_log,
    shared_sides,
    validate,
)
from pcfdyn.codes import Code, champernowne_binary
from pcfdyn.errors import PreconditionError, ValidationError
from pcfdyn.examples import load_example
from pcfdyn.interval_model import from_annular_spec, semiconjugacy_check

from .strategies import annular_specs, exact_specs, specs


def brute_growth(spec):
    """Least n with every admissible length-n code of cumulative degree >= 2."""
    for n in range(1, spec.n_subannuli + 3):
        if all(prod(spec.subannuli[i].degree for i in w) >= 2 for w in codes(spec, n)):
            return n
    return None


def one(degree=2, shares=(), target=0):
    return parse_spec({"components": 1, "subannuli": [
        {"parent": 0, "target": target, "degree": degree, "shares": list(shares)}]})


@pytest.fixture
def z3():
    return parse_spec(load_example("z3_spec"))


# -- validation --------------------------------------------------------------


def test_z3_model_is_an_exact_annular_system(z3):
    rep = validate(z3)
    assert rep.is_annular_system and rep.is_exact and not rep.is_proper
    assert rep.witness_n == 1 and rep.per_component_n == (1,)


def test_single_proper_subannulus_never_disconnects():
    rep = validate(one())
    assert rep.is_proper and not rep.is_exact
    assert not rep.is_annular_system and rep.witness_n is None


def test_single_subannulus_sharing_both_sides_is_degenerate():
    rep = validate(one(degree=1, shares=(0, 1)))
    assert rep.is_exact and not rep.is_annular_system
    assert from_annular_spec(one(degree=1, shares=(0, 1))).degenerate


def test_two_proper_subannuli_of_degree_two():
    spec = parse_spec({"components": 1, "subannuli": [
        {"parent": 0, "target": 0, "degree": 2}, {"parent": 0, "target": 0, "degree": 2}]})
    rep = validate(spec)
    assert rep.is_annular_system and rep.is_proper and rep.moduli_feasible


def test_overfull_moduli_are_infeasible():
    # three degree-2 copies would need 3/2 of the parent's modulus
    spec = parse_spec({"components": 1, "subannuli": [{"parent": 0, "target": 0, "degree": 2}] * 3})
    rep = validate(spec)
    assert not rep.moduli_feasible and not rep.is_annular_system


def test_given_moduli_are_checked_as_given():
    raw = {"components": [{"name": "A", "modulus": 1.0}],
           "subannuli": [{"parent": 0, "target": 0, "degree": 3}] * 2}
    assert validate(parse_spec(raw)).moduli_feasible


@pytest.mark.parametrize("raw", [
    {"components": 1, "subannuli": [{"parent": 0, "target": 2, "degree": 2}]},
    {"components": 1, "subannuli": [{"parent": 1, "target": 0, "degree": 2}]},
    {"components": 1, "subannuli": [{"parent": 0, "target": 0, "degree": 0}]},
    {"components": 1, "subannuli": [{"parent": 0, "target": 0, "degree": 2, "orientation": 2}]},
    {"components": 1, "subannuli": [{"parent": 0, "target": 0, "degree": 2, "essential": False}]},
    {"components": 1, "subannuli": [{"parent": 0, "target": 0, "degree": 2},
                                    {"parent": 0, "target": 0, "degree": 2, "shares": [0]}]},
    {"components": 0, "subannuli": []},
    {"subannuli": []},
])
def test_malformed_specs_rejected(raw):
    with pytest.raises(ValidationError):
        parse_spec(raw)


# -- degree growth -----------------------------------------------------------


def test_degree_one_link_delays_growth():
    # A_0 -> A_1 isometrically, A_1 holds two degree-2 copies of A_0
    spec = parse_spec({"components": 2, "subannuli": [
        {"parent": 0, "target": 1, "degree": 1, "shares": [0, 1]},
        {"parent": 1, "target": 0, "degree": 2, "shares": [0]},
        {"parent": 1, "target": 0, "degree": 2, "orientation": -1, "shares": [1]},
    ]})
    assert degree_growth_N(spec) == brute_growth(spec) == 2


def test_z3_grows_at_once(z3):
    assert degree_growth_N(z3) == 1


def test_growth_needs_an_annular_system():
    with pytest.raises(PreconditionError):
        degree_growth_N(one())


@settings(max_examples=150, deadline=None)
@given(annular_specs(max_components=4))
def test_growth_bound_and_oracle(spec):
    N = degree_growth_N(spec)
    assert N <= spec.n_subannuli + 2
    assert N == brute_growth(spec)


# -- nested chains -----------------------------------------------------------


def test_boundary_code_keeps_its_boundary(z3):
    w = boundary_code(z3, 0, 0, 6)
    assert w == (0,) * 6
    assert shared_sides(z3, w) == {0}
    assert isinstance(nested_fate(z3, Code.periodic([0])), SharesBoundaryForever)


def test_alternating_code_nests_compactly(z3):
    fate = nested_fate(z3, Code.periodic([0, 1]))
    assert isinstance(fate, CompactlyNestedAt)
    # 0,1 leaves both boundaries at once; 1,0 keeps boundary 1 ([8/9, 1]) so needs 1,0,1
    assert fate.pairs[:4] == ((0, 2), (1, 4), (2, 4), (3, 6))


def test_decreasing_fixed_code_nests(z3):
    assert isinstance(nested_fate(z3, Code.periodic([1])), CompactlyNestedAt)


def test_inadmissible_code_rejected():
    spec = parse_spec({"components": 2, "subannuli": [
        {"parent": 0, "target": 1, "degree": 2}, {"parent": 1, "target": 0, "degree": 2}]})
    with pytest.raises(ValidationError):
        nested_fate(spec, Code.periodic([0, 0]))


def test_component_classes(z3):
    c = component_class(z3, Code.periodic([0, 1]))
    assert (c.kind, c.period, c.quasicircle_expected) == ("periodic", 2, True)
    c = component_class(z3, Code.periodic([1], prefix=[0]))
    assert (c.kind, c.preperiod, c.period) == ("preperiodic", 1, 1)
    assert component_class(z3, champernowne_binary(), horizon=64).kind == "wandering"
    with pytest.raises(PreconditionError):
        component_class(z3, Code.periodic([0]))


# -- log realisation and hulls -----------------------------------------------


def test_z3_realisation_branches(z3):
    real = realize_log(z3)
    assert real.widths == (1,)
    b0, b1 = real.branches
    assert (b0.left, b0.right, b0.slope) == (0, F(1, 3), 3)
    assert (b1.left, b1.right, b1.slope) == (F(2, 3), 1, -3)
    for t in (F(0), F(1, 9), F(1, 3)):
        assert b0.apply(t, real.widths) == 3 * t
    for t in (F(2, 3), F(7, 9), F(1)):
        assert b1.apply(t, real.widths) == 3 - 3 * t


def test_z3_hulls(z3):
    real = realize_log(z3)
    h0 = hull_annulus(real, [F(1, 2)], 0)[0]
    assert h0.kind == "curve" and h0.low == h0.high == F(1, 2)
    h1 = hull_annulus(real, [F(1, 2)], 1)[0]
    assert (h1.low, h1.high) == (F(1, 6), F(5, 6))
    for n in range(1, 6):
        assert hull_annulus(real, [F(1, 2)], n)[0].contains(F(3, 10), F(7, 10))


def test_hull_core_must_be_interior(z3):
    with pytest.raises(ValidationError):
        hull_annulus(realize_log(z3), [F(0)], 1)


def test_hulls_grow_outward(z3):
    real = realize_log(z3)
    prev = hull_annulus(real, [F(1, 2)], 1)[0]
    for n in range(2, 7):
        h = hull_annulus(real, [F(1, 2)], n)[0]
        assert h.low <= prev.low and h.high >= prev.high
        assert len(h.curves) == 2**n
        prev = h


# -- properties --------------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(specs())
def test_flags_match_their_definitions(spec):
    rep = validate(spec)
    shares = [set().union(*(spec.subannuli[i].shares for i in spec.children(j))) for j in range(spec.n_components)]
    assert rep.is_exact == all(s == {0, 1} for s in shares)
    assert rep.is_proper == all(not s.shares for s in spec.subannuli)
    for n in range(4):
        counts = component_counts(spec, n)
        assert counts == [sum(1 for _ in codes(spec, n, component=j)) for j in range(spec.n_components)]


@settings(max_examples=80, deadline=None)
@given(annular_specs())
def test_log_branches_cover_their_targets(spec):
    real = realize_log(spec)
    for b in real.branches:
        lo, hi = sorted((b.apply(b.left, real.widths), b.apply(b.right, real.widths)))
        assert (lo, hi) == (0, real.widths[b.target])
        assert abs(b.slope) == b.degree
    for j in range(spec.n_components):
        kids = [real.branches[i] for i in spec.children(j)]
        assert all(a.right <= b.left for a, b in zip(kids, kids[1:]))
        assert 0 <= kids[0].left and kids[-1].right <= real.widths[j]


@settings(max_examples=80, deadline=None)
@given(exact_specs().filter(lambda s: validate(s).is_annular_system))
def test_interval_shadow_agrees_with_codes(spec):
    assert semiconjugacy_check(from_annular_spec(spec), spec, 4).ok
