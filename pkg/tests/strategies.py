"""Hypothesis strategies shared by the property suites."""

from hypothesis import strategies as st

from pcfdyn.annulus_engine import AnnularSystemSpec, Component, Subannulus, validate


@st.composite
def specs(draw, exact=False, max_components=3, max_children=3, max_degree=3):
    n = draw(st.integers(1, max_components))
    subs = []
    for j in range(n):
        k = draw(st.integers(1, max_children))
        for r in range(k):
            shares = set()
            if r == 0 and (exact or draw(st.booleans())):
                shares.add(0)
            if r == k - 1 and (exact or draw(st.booleans())):
                shares.add(1)
            subs.append(Subannulus(j, draw(st.integers(0, n - 1)), draw(st.integers(1, max_degree)),
                                   draw(st.sampled_from([1, -1])), frozenset(shares)))
    return AnnularSystemSpec(tuple(Component(f"A{j}") for j in range(n)), tuple(subs))


def exact_specs(**kw):
    return specs(exact=True, **kw)


def annular_specs(**kw):
    return specs(**kw).filter(lambda s: validate(s).is_annular_system)
