"""The full invariant suite behind ``pcfdyn verify``.

Every check returns a JSON-ready dict with an ``ok`` flag.  Random inputs
come from one seeded generator and no timings are recorded, so a fixed seed
gives a byte-identical report.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .annulus_engine import degree_growth_N, nested_fate, parse_spec, validate
from .codes import Code, Periodic, Preperiodic, champernowne_binary, classify_code
from .curve_complex import build_graph, is_cantor, kappa_table, kappa_tree_oracle, lemma_cm_report
from .errors import PcfDynError
from .examples import load_example
from .generators import random_graph, random_spec
from .interval_model import IntervalSystem, classify_point, expansion, from_annular_spec, preimage_depth, semiconjugacy_check
from .renorm_search import load_bundle, numeric_tau, renorm_report


def round_floats(x):
    """Round floats to nine significant digits, recursively."""
    if isinstance(x, float):
        return x if not math.isfinite(x) else float(f"{x:.9g}")
    if isinstance(x, dict):
        return {k: round_floats(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [round_floats(v) for v in x]
    return x


def check_lemma(rng, count: int = 1000) -> dict:
    bad = 0
    true = 0
    for _ in range(count):
        try:
            rep = lemma_cm_report(random_graph(rng))
            true += rep.values[0]
        except PcfDynError:
            bad += 1
    return {"ok": bad == 0, "graphs": count, "disagreements": bad, "cantor": true}


def check_kappa(rng, count: int = 100, depth: int = 8) -> dict:
    bad = 0
    tested = 0
    while tested < count:
        g = random_graph(rng, max_classes=5, irreducible=False, density=0.3)
        if not g.is_pre_stable:
            continue
        tested += 1
        tab = kappa_table(g, depth)
        bad += any(tab[n].values != kappa_tree_oracle(g, n) for n in range(depth + 1))
    return {"ok": bad == 0, "graphs": tested, "depth": depth, "mismatches": bad}


def check_examples_multicurve() -> dict:
    core = build_graph(load_example("lattes_core"))
    perm = build_graph(load_example("permutation"))
    kap = [k.values[0] for k in kappa_table(core, 10)]
    return {
        "ok": is_cantor(core).verdict and not is_cantor(perm).verdict and kap == [2**n for n in range(11)],
        "lattes_core_kappa": kap,
        "permutation_cantor": is_cantor(perm).verdict,
    }


def check_interval() -> dict:
    sys = IntervalSystem.from_dict(load_example("middle_thirds"))
    ints = preimage_depth(sys, 10)
    exp = expansion(sys)
    p34 = classify_point(sys, Fraction(3, 4))
    p14 = classify_point(sys, Fraction(1, 4))
    ok = (
        len(ints) == 1024
        and all(i.length == Fraction(1, 3**10) for i in ints)
        and exp.N == 1
        and exp.lam == 3
        and p34 == Periodic(1)
        and p14 == Preperiodic(1, 1)
    )
    return {"ok": ok, "intervals": len(ints), "expansion": exp.to_dict(), "three_quarters": p34.to_dict(),
            "one_quarter": p14.to_dict()}


def check_semiconjugacy(n: int = 6) -> dict:
    out = {}
    for name in ("lattes_spec", "z3_spec"):
        spec = parse_spec(load_example(name))
        out[name] = semiconjugacy_check(from_annular_spec(spec), spec, n).to_dict()
    return {"ok": all(v["ok"] for v in out.values()), **out}


def check_degree_growth(rng, count: int = 500) -> dict:
    worst = -math.inf
    bad = 0
    for _ in range(count):
        spec = random_spec(rng)
        N = degree_growth_N(spec)
        worst = max(worst, N - (spec.n_subannuli + 2))
        bad += N > spec.n_subannuli + 2
    return {"ok": bad == 0, "specs": count, "max_excess": worst}


def check_annulus() -> dict:
    z3 = parse_spec(load_example("z3_spec"))
    val = validate(z3)
    fate0 = nested_fate(z3, Code.periodic([0]))
    fate01 = nested_fate(z3, Code.periodic([0, 1]))
    wander = classify_code(champernowne_binary(), horizon=64)
    ok = val.is_exact and degree_growth_N(z3) == 1 and type(fate0).__name__ == "SharesBoundaryForever" \
        and type(fate01).__name__ == "CompactlyNestedAt" and type(wander).__name__ == "WanderingUpToHorizon"
    return {"ok": ok, "validation": val.to_dict(), "fate_0": fate0.to_dict(), "fate_01": fate01.to_dict(),
            "champernowne": wander.to_dict()}


def check_rational(rng, circles: int = 20, iterations: int = 8, nodes: int = 2048) -> dict:
    from .rational_dynamics import (
        CurvePolyline,
        NotPCF,
        circle,
        lattes_boundaries,
        lattes_core,
        lattes_map,
        lattes_marked,
        lattes_slit_distance,
        lattes_system,
        lift_curve_components,
        lift_path_all,
        post_critical,
        real_arc,
        to_sphere,
        verify_exact_system,
        wandering_curve,
    )
    from .rational_dynamics.lifting import Lifter

    f = lattes_map()
    pc = post_critical(f)
    pcf = not isinstance(pc, NotPCF)
    marked = pc.marked.to_dict()["points"] if pcf else []
    expected = to_sphere(np.array([complex(math.inf, 0), -1, 0, 1], dtype=complex))
    pc_ok = pcf and len(pc.marked) == 4 and bool(np.all(np.abs(pc.marked.sphere() - expected) < 1e-9))
    lifts = lift_path_all(f, CurvePolyline(real_arc(1.5, 10, 257), closed=False))
    slit = max(float(lattes_slit_distance(c.points).max()) for c in lifts)
    lf = Lifter(f)
    sums = []
    for _ in range(circles):
        c = complex(*rng.uniform(-2, 2, 2))
        r = float(rng.uniform(0.1, 2))
        try:
            sums.append(sum(x.degree for x in lift_curve_components(f, circle(c, r, 256), lifter=lf)))
        except PcfDynError:
            sums.append(None)  # passes a critical value; skipped
    vs = verify_exact_system(f, [lattes_core()], boundaries=lattes_boundaries(257), marked=lattes_marked())
    rep = vs.report
    spec_ok = [(s.degree, s.orientation, sorted(s.shares)) for s in vs.spec.subannuli] == [(2, 1, [0]), (2, -1, [1])]
    w = wandering_curve(lattes_system(nodes), [0, 1], iterations=iterations, nodes=nodes)
    bundle = load_bundle(load_example("lattes_bundle"))
    tau = numeric_tau(f, bundle["samples"], [lattes_core()])
    rr = renorm_report(bundle["spec"], bundle["pieces"], tau, bundle["map_degree"])
    ok = (
        pc_ok
        and slit < 1e-6
        and all(s in (None, 4) for s in sums)
        and spec_ok
        and rep["validation"]["is_exact"]
        and rep["cantor"]
        and w.simple
        and w.functoriality < 1e-6
        and rr.verdict
        and tau == list(bundle["tau"])
    )
    return {
        "ok": bool(ok),
        "post_critical": marked,
        "slit_distance": slit,
        "degree_sums": sums,
        "exact_system": {"spec": rep["spec"], "validation": rep["validation"], "cantor": rep["cantor"],
                         "orientation_consistent": rep["orientation_consistent"]},
        "wandering": w.to_dict(),
        "renorm": rr.to_dict(),
        "numeric_tau": tau,
    }


def run_verify(seed: int = 0, quick: bool = False) -> dict:
    """Run every suite; ``quick`` shrinks the random sample sizes."""
    rng = np.random.default_rng(seed)
    scale = 10 if quick else 1
    checks = {
        "lemma_equivalence": check_lemma(rng, 1000 // scale),
        "kappa_oracle": check_kappa(rng, 100 // scale),
        "multicurve_examples": check_examples_multicurve(),
        "interval_golden": check_interval(),
        "semiconjugacy": check_semiconjugacy(),
        "degree_growth": check_degree_growth(rng, 500 // scale),
        "annulus_examples": check_annulus(),
        "rational": check_rational(rng),
    }
    return round_floats({"seed": seed, "ok": all(c["ok"] for c in checks.values()), "checks": checks})
