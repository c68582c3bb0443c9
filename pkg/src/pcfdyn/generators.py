"""Seeded random inputs for property suites."""

from __future__ import annotations

import numpy as np

from .annulus_engine import AnnularSystemSpec, Component, Subannulus, validate
from .curve_complex import PullbackGraph, from_matrix, is_irreducible


def random_graph(rng: np.random.Generator, max_classes: int = 6, max_mult: int = 3,
                 irreducible: bool = True, density: float = 0.4) -> PullbackGraph:
    """A pullback graph; with ``irreducible`` a random cycle through all classes is planted."""
    k = int(rng.integers(1, max_classes + 1))
    M = np.where(rng.random((k, k)) < density, rng.integers(1, max_mult + 1, (k, k)), 0)
    if irreducible:
        perm = rng.permutation(k)
        for a in range(k):
            g, b = perm[a], perm[(a + 1) % k]
            if M[g, b] == 0:
                M[g, b] = 1
    degree = max(2, int(M.sum(axis=0).max()) + int(rng.integers(0, 2)))
    graph = from_matrix(M.tolist(), degree=degree, extra_preimages=[0] * k)
    assert not irreducible or is_irreducible(graph)
    return graph


def random_spec(rng: np.random.Generator, max_components: int = 4, max_children: int = 3,
                max_degree: int = 3, max_subannuli: int = 6, tries: int = 1000) -> AnnularSystemSpec:
    """A spec that passes :func:`validate` as an annular system (rejection sampling)."""
    for _ in range(tries):
        n = int(rng.integers(1, max_components + 1))
        subs = []
        for j in range(n):
            c = int(rng.integers(1, max_children + 1))
            for r in range(c):
                shares = set()
                if r == 0 and rng.random() < 0.5:
                    shares.add(0)
                if r == c - 1 and rng.random() < 0.5:
                    shares.add(1)
                subs.append(Subannulus(j, int(rng.integers(0, n)), int(rng.integers(1, max_degree + 1)),
                                       int(rng.choice([1, -1])), frozenset(shares)))
        if len(subs) > max_subannuli:
            continue
        spec = AnnularSystemSpec(tuple(Component(f"A{j}") for j in range(n)), tuple(subs))
        if validate(spec).is_annular_system:
            return spec
    raise RuntimeError("no annular system found; loosen the generator")
