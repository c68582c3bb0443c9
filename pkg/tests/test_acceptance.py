"""The eleven acceptance criteria, each at its stated tolerance and time limit."""

import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from pcfdyn.annulus_engine import degree_growth_N, parse_spec
from pcfdyn.codes import Periodic, Preperiodic
from pcfdyn.curve_complex import kappa_table, kappa_tree_oracle, lemma_cm_report
from pcfdyn.errors import CriticalValueCollision
from pcfdyn.examples import load_example
from pcfdyn.generators import random_graph, random_spec
from pcfdyn.interval_model import (
    IntervalSystem,
    classify_point,
    expansion,
    from_annular_spec,
    preimage_depth,
    semiconjugacy_check,
)
from pcfdyn.rational_dynamics import (
    INF,
    CurvePolyline,
    PostCritical,
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
    real_segment_distance,
    to_sphere,
    verify_exact_system,
    wandering_curve,
)
from pcfdyn.renorm_search import load_bundle, numeric_tau, renorm_report


@contextmanager
def criterion(log, number, name, limit):
    """Time the block, print one PASS/FAIL line, then fail the test if needed."""
    state = {"ok": False, "detail": ""}
    t0 = time.perf_counter()
    try:
        yield state
    finally:
        elapsed = time.perf_counter() - t0
        in_time = elapsed < limit
        ok = bool(state["ok"]) and in_time
        line = (f"criterion {number}: {'PASS' if ok else 'FAIL'}  {name}  "
                f"({elapsed:.2f} s of {limit:g} s){'  ' + state['detail'] if state['detail'] else ''}")
        print(line)
        log.append(line)
    assert state["ok"], state["detail"]
    assert in_time, f"took {elapsed:.2f} s, limit {limit} s"


def test_01_lemma_equivalence(acceptance_log):
    rng = np.random.default_rng(1)
    with criterion(acceptance_log, 1, "five conditions agree on 1000 irreducible pre-stable graphs", 10) as st:
        bad = 0
        for _ in range(1000):
            g = random_graph(rng, max_classes=6, max_mult=3)
            assert g.is_pre_stable and max(map(max, g.matrix)) <= 3 and len(g.matrix) <= 6
            rep = lemma_cm_report(g)
            bad += not (rep.consistent and len(set(rep.values)) == 1)
        st["ok"] = bad == 0
        st["detail"] = f"{bad} disagreements"


def test_02_kappa_recurrence(acceptance_log):
    rng = np.random.default_rng(2)
    with criterion(acceptance_log, 2, "kappa recurrence equals tree count, <= 5 classes, depth <= 8", 30) as st:
        tested = bad = 0
        while tested < 300:
            g = random_graph(rng, max_classes=5, irreducible=False, density=0.35)
            if not g.is_pre_stable:
                continue
            tested += 1
            tab = kappa_table(g, 8)
            bad += any(tab[n].values != kappa_tree_oracle(g, n) for n in range(9))
        st["ok"] = bad == 0
        st["detail"] = f"{tested} graphs, {bad} mismatches"


def test_03_interval_golden(acceptance_log):
    with criterion(acceptance_log, 3, "middle thirds: 1024 intervals of 3^-10, N = 1, lambda = 3, 3/4 and 1/4", 1) as st:
        sys_ = IntervalSystem.from_dict(load_example("middle_thirds"))
        ints = preimage_depth(sys_, 10)
        e = expansion(sys_)
        st["ok"] = (
            len(ints) == 1024
            and all(i.length == Fraction(1, 3**10) for i in ints)
            and e.N == 1
            and e.lam == 3
            and classify_point(sys_, Fraction(3, 4)) == Periodic(1)
            and classify_point(sys_, Fraction(1, 4)) == Preperiodic(1, 1)
        )


def test_04_degree_growth_bound(acceptance_log):
    rng = np.random.default_rng(4)
    with criterion(acceptance_log, 4, "degree_growth_N <= m + 2 on 500 random specs", 10) as st:
        worst = -10
        for _ in range(500):
            spec = random_spec(rng)
            worst = max(worst, degree_growth_N(spec) - (spec.n_subannuli + 2))
        st["ok"] = worst <= 0
        st["detail"] = f"max N - (m + 2) = {worst}"


def test_05_lattes_post_critical(acceptance_log):
    with criterion(acceptance_log, 5, "Lattes post-critical set {0, 1, -1, inf}, orbits close within 1e-9", 1) as st:
        pc = post_critical(lattes_map())
        want = to_sphere(np.array([INF, -1, 0, 1], dtype=complex))
        st["ok"] = (
            isinstance(pc, PostCritical)
            and len(pc.marked) == 4
            and bool(np.all(np.linalg.norm(pc.marked.sphere() - want, axis=1) < 1e-9))
            and all(r.closing_distance < 1e-9 for r in pc.orbits)
        )


def test_06_slit_lifts(acceptance_log):
    with criterion(acceptance_log, 6, "slit lifts within 1e-6 of the slits, lift degrees sum to 4", 10) as st:
        f = lattes_map()
        worst = 0.0
        for a, b in ((1.01, INF), (1.5, 10.0), (1.001, 1000.0)):
            lifts = lift_path_all(f, CurvePolyline(real_arc(a, b, 257), closed=False))
            worst = max(worst, max(float(lattes_slit_distance(c.points).max()) for c in lifts))
            on_inf = sorted(float(real_segment_distance(c.points, 1, INF).max()) < 1e-6 for c in lifts)
            both = on_inf == [False, False, True, True]  # two lifts on each slit
            worst = worst if both else np.inf
        degs = [c.degree for c in lift_curve_components(f, lattes_core())]
        rng = np.random.default_rng(6)
        sums = set()
        for _ in range(30):
            try:
                comps = lift_curve_components(f, circle(complex(*rng.uniform(-2, 2, 2)), float(rng.uniform(0.1, 2)), 256))
            except CriticalValueCollision:
                continue
            sums.add(sum(c.degree for c in comps))
        st["ok"] = worst < 1e-6 and sum(degs) == 4 and sums == {4}
        st["detail"] = f"max slit distance {worst:.2e}, core lift degrees {degs}"


def test_07_exact_system(acceptance_log):
    with criterion(acceptance_log, 7, "verify_exact_system: 1 component, degrees (2, 2), exact, kappa_n = 2^n", 30) as st:
        vs = verify_exact_system(lattes_map(), [lattes_core()], boundaries=lattes_boundaries(257),
                                 marked=lattes_marked())
        rep = vs.report
        st["ok"] = (
            vs.spec.n_components == 1
            and tuple(s.degree for s in vs.spec.subannuli) == (2, 2)
            and rep["validation"]["is_exact"]
            and [k[0] for k in rep["kappa"]] == [2**n for n in range(11)]
        )


@pytest.mark.slow
def test_08_wandering_run(acceptance_log):
    with criterion(acceptance_log, 8, "20-step 0101 run: d_{n+5} < d_n, simple at 2048 nodes, functoriality < 1e-6",
                   300) as st:
        res = wandering_curve(lattes_system(2048), [0, 1], iterations=20, nodes=2048)
        d = res.distances
        tele = len(d) == 20 and all(d[n + 5] < d[n] for n in range(5, len(d) - 5))
        st["ok"] = tele and res.simple and len(res.final) == 2048 and res.functoriality < 1e-6
        st["detail"] = f"functoriality {res.functoriality:.2e}, d_20 {d[-1]:.2e}"


def test_09_semiconjugacy(acceptance_log):
    with criterion(acceptance_log, 9, "semiconjugacy for all codes of length <= 6 on both built-in systems", 1) as st:
        results = []
        for name in ("lattes_spec", "z3_spec"):
            spec = parse_spec(load_example(name))
            results.append(semiconjugacy_check(from_annular_spec(spec), spec, 6))
        st["ok"] = all(r.ok for r in results) and all(r.checked == 126 for r in results)


def test_10_renormalization(acceptance_log):
    with criterion(acceptance_log, 10, "renormalization: p = 1, deg g = 2, verdict true, matches slit images", 1) as st:
        b = load_bundle(load_example("lattes_bundle"))
        f = lattes_map()
        tau = numeric_tau(f, b["samples"], [lattes_core()])
        rr = renorm_report(b["spec"], b["pieces"], tau, b["map_degree"])
        # numerically: how many lifts of the boundary-0 slit lie on that same slit
        lifts = lift_path_all(f, CurvePolyline(real_arc(1.01, INF, 257), closed=False))
        on_slit0 = sum(float(real_segment_distance(c.points, 1, INF).max()) < 1e-6 for c in lifts)
        st["ok"] = (rr.period == 1 and rr.candidate_degree == 2 and rr.verdict
                    and tau == list(b["tau"]) and on_slit0 == rr.candidate_degree)
        st["detail"] = f"tau {tau}, lifts on slit 0: {on_slit0}"


@pytest.mark.slow
def test_11_verify_is_deterministic(acceptance_log, tmp_path):
    with criterion(acceptance_log, 11, "two verify runs with the same seed give byte-identical JSON", 600) as st:
        outs = []
        for k in range(2):
            d = tmp_path / f"run{k}"
            res = subprocess.run([sys.executable, "-m", "pcfdyn.cli", "verify", "--seed", "5", "--out", str(d)],
                                 capture_output=True, timeout=600)
            outs.append((res.returncode, res.stdout, (d / "verify.json").read_bytes()))
        st["ok"] = outs[0][0] == 0 and outs[0] == outs[1] and outs[0][1] == outs[0][2]
        st["detail"] = f"{len(outs[0][1])} bytes"
