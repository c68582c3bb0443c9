"""``pcfdyn`` command line: one subcommand per analysis.

Exit codes: 0 success, 1 a computation failed (the report says why),
2 the input was invalid.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .errors import PcfDynError, ValidationError
from .verify import round_floats

FORMATS = ("json", "csv", "svg", "text")


class ComputationFailed(Exception):
    """Carries a partial report for exit code 1."""

    def __init__(self, report: dict):
        super().__init__(report.get("error", "computation failed"))
        self.report = report


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    input: str | None = None
    out: str | None = None
    depth: int = 10
    iters: int = 20
    tol: float = 1e-12
    delta: float = 1e-4
    nodes: int = 2048
    seed: int = 0
    format: str = "json"
    codes: tuple[str, ...] = field(default=())
    quick: bool = False

    def __post_init__(self):
        if not self.tol > 0 or not self.delta > 0:
            raise ValidationError("tolerances must be positive")
        if self.depth < 0:
            raise ValidationError("--depth must be >= 0")
        if self.iters < 1:
            raise ValidationError("--iters must be >= 1")
        if self.nodes < 16:
            raise ValidationError("--nodes must be >= 16")
        if self.format not in FORMATS:
            raise ValidationError(f"--format must be one of {FORMATS}")


def dumps(obj) -> str:
    return json.dumps(round_floats(obj), sort_keys=True, indent=2) + "\n"


def _read_json(path: str | None):
    if path is None:
        raise ValidationError("--input is required")
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: malformed JSON ({exc})") from None


def _load(path: str | None):
    """A JSON file, or a bundled example when ``path`` names one."""
    from .examples import EXAMPLES, load_example

    if path is not None and path in EXAMPLES:
        return load_example(path)
    return _read_json(path)


def _write(cfg: RunConfig, name: str, text: str) -> str | None:
    if cfg.out is None:
        return None
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    p = d / name
    p.write_text(text)
    return str(p)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_multicurve(cfg: RunConfig) -> dict:
    from .curve_complex import build_graph, is_cantor, is_irreducible, kappa_table, lemma_cm_report, predicates

    g = build_graph(_load(cfg.input))
    preds = predicates(g)
    rep = {"classes": list(g.ids), "matrix": g.matrix, "predicates": preds.to_dict()}
    if preds.pre_stable:
        rep["kappa"] = [list(k.values) for k in kappa_table(g, cfg.depth)]
        rep["cantor"] = is_cantor(g).to_dict()
        if is_irreducible(g):
            rep["lemma"] = lemma_cm_report(g).to_dict()
    return rep


def _interval_system(raw):
    from .annulus_engine import parse_spec
    from .interval_model import IntervalSystem, from_annular_spec

    if isinstance(raw, dict) and "subannuli" in raw:
        return from_annular_spec(parse_spec(raw))
    return IntervalSystem.from_dict(raw)


def cmd_interval(cfg: RunConfig) -> dict:
    from .codes import classify_code
    from .errors import PreconditionError
    from .interval_model import expansion, intervals_csv, point_of_code, preimage_depth

    sys_ = _interval_system(_load(cfg.input))
    ints = preimage_depth(sys_, cfg.depth)
    csv_text = intervals_csv(ints)
    rep = {"system": sys_.to_dict(), "depth": cfg.depth, "count": len(ints),
           "csv": _write(cfg, "intervals.csv", csv_text)}
    if cfg.format == "csv":
        rep["_stdout"] = csv_text
    codes = []
    for c in cfg.codes:
        code = _code(c)
        J = point_of_code(sys_, code, max(cfg.depth, 1))
        codes.append({"code": c, "class": classify_code(code).to_dict(),
                      "interval": [str(J.left), str(J.right)]})
    rep["codes"] = codes
    try:
        rep["expansion"] = expansion(sys_).to_dict()
    except PreconditionError as exc:
        rep["expansion"] = None
        rep["diagnostic"] = str(exc)
        rep["error"] = f"not expanding: {exc}"
        raise ComputationFailed(rep)
    return rep


def cmd_annulus(cfg: RunConfig) -> dict:
    from .annulus_engine import component_class, degree_growth_N, nested_fate, parse_spec, realize_log, validate
    from .errors import PreconditionError

    spec = parse_spec(_load(cfg.input))
    val = validate(spec)
    rep = {"spec": spec.to_dict(), "validation": val.to_dict()}
    if val.is_annular_system:
        rep["degree_growth_N"] = degree_growth_N(spec)
        rep["realization"] = realize_log(spec).to_dict()
    rep["codes"] = []
    for c in cfg.codes:
        entry = {"code": c, "fate": nested_fate(spec, _code(c), max(cfg.depth, 1)).to_dict()}
        try:
            entry["class"] = component_class(spec, _code(c), max(cfg.depth, 1)).to_dict()
        except PreconditionError as exc:
            entry["class"] = None
            entry["note"] = str(exc)
        rep["codes"].append(entry)
    return rep


def _code(text: str):
    from .codes import Code, champernowne_binary

    if text == "champernowne":
        return champernowne_binary()
    if "(" not in text and not text.startswith(("[", "{")):
        text = f"({text})"  # a bare word repeats forever
    try:
        return Code.from_obj(json.loads(text) if text.startswith(("[", "{")) else text)
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"bad code {text!r}: {exc}") from None


def _system(cfg: RunConfig):
    """A branch system plus the exactness report that certified it."""
    import numpy as np

    from .rational_dynamics import (
        BUILTIN_SYSTEMS,
        MarkedSphere,
        RationalMap,
        builtin_system,
        lattes_boundaries,
        lattes_core,
        lattes_map,
        lattes_marked,
        to_sphere,
        verify_exact_system,
    )
    from .rational_dynamics.curves import CurvePolyline

    name = cfg.input or "lattes"
    if name == "lattes":
        vs = verify_exact_system(lattes_map(), [lattes_core(cfg.nodes)], boundaries=lattes_boundaries(257),
                                 marked=lattes_marked(), delta=cfg.delta)
        if not vs.report["validation"]["is_exact"]:
            raise ComputationFailed({"error": "core curve does not give an exact system", "verify": vs.report})
        return builtin_system(name, cfg.nodes, cfg.delta), vs.report
    if name in BUILTIN_SYSTEMS:
        return builtin_system(name, cfg.nodes, cfg.delta), {"note": "branch maps are given directly"}
    raw = _read_json(name)
    try:
        f = RationalMap.from_dict(raw["map"])
        pts = lambda seq: np.array([complex(*p) if isinstance(p, list) else complex(p) for p in seq])
        cores = [CurvePolyline.from_complex(pts(c)) for c in raw["cores"]]
        bnds = [tuple(to_sphere(pts(b)) for b in pair) for pair in raw["boundaries"]]
        marked = MarkedSphere(tuple(pts(raw["marked"]))) if "marked" in raw else None
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"system file needs map, cores and boundaries ({exc})") from None
    vs = verify_exact_system(f, cores, boundaries=bnds, marked=marked, delta=cfg.delta)
    if vs.system is None or not vs.report["validation"]["is_annular_system"]:
        raise ComputationFailed({"error": "cores do not give an annular system", "verify": vs.report})
    return vs.system, vs.report


def cmd_wandering(cfg: RunConfig) -> dict:
    from .annulus_engine import SharesBoundaryForever, nested_fate
    from .errors import AmbiguousTag, LiftError
    from .rational_dynamics import curves_csv, render_svg, wandering_curve

    system, vrep = _system(cfg)
    code = _code(cfg.codes[0] if cfg.codes else "01")
    fate = nested_fate(system.spec, code, max(cfg.iters, 8))
    rep = {"system": system.name, "verify": vrep, "fate": fate.to_dict()}
    try:
        res = wandering_curve(system, code, iterations=cfg.iters, tol=cfg.tol, nodes=cfg.nodes)
    except (LiftError, AmbiguousTag) as exc:
        rep["error"] = f"lift failed: {exc}"
        if isinstance(fate, SharesBoundaryForever):
            rep["diagnostic"] = "boundary collapse: the nested annuli keep a common boundary"
            return rep
        raise ComputationFailed(rep)
    rep["wandering"] = res.to_dict()
    if isinstance(fate, SharesBoundaryForever):
        rep["diagnostic"] = "boundary collapse: the nested annuli keep a common boundary"
    slits = [b for pair in system.boundaries for b in pair]
    svg = render_svg(res.curves, system.marked, slits, title=f"{system.name} {list(res.code)}")
    csv_text = curves_csv([res.final])
    log = "".join(f"{n}\t{d:.9g}\n" for n, d in enumerate(res.distances))
    rep["files"] = [p for p in (_write(cfg, "wandering.svg", svg), _write(cfg, "wandering.csv", csv_text),
                                _write(cfg, "distances.log", log)) if p]
    if cfg.format == "svg":
        rep["_stdout"] = svg
    elif cfg.format == "csv":
        rep["_stdout"] = csv_text
    if not res.simple or res.functoriality > 1e-6:
        rep["error"] = "final curve failed the simplicity or functoriality check"
        raise ComputationFailed(rep)
    return rep


def cmd_renorm(cfg: RunConfig) -> dict:
    from .renorm_search import load_bundle, numeric_tau, renorm_report, tau_map

    b = load_bundle(_load(cfg.input or "lattes_bundle"))
    rep = {}
    tau = b["tau"]
    if b["system"] == "lattes" or b["map"] is not None:
        from .rational_dynamics import RationalMap, lattes_core, lattes_map

        f = lattes_map() if b["system"] == "lattes" else RationalMap.from_dict(b["map"])
        if b["system"] == "lattes" and all(s is not None for s in b["samples"]):
            num = numeric_tau(f, b["samples"], [lattes_core()])
            rep["numeric_tau"] = num
            rep["tau_consistent"] = tau is None or list(tau) == num
            tau = num if tau is None else tau
    if tau is None:
        raise ValidationError("bundle has no tau and no way to compute it")
    tm = tau_map(tau, len(b["pieces"]))
    rr = renorm_report(b["spec"], b["pieces"], tm, b["map_degree"])
    rep.update({"tau": tm.to_dict(), "pieces": [p.to_dict() for p in b["pieces"]], "report": rr.to_dict()})
    _write(cfg, "renorm.txt", rr.text())
    if cfg.format == "text":
        rep["_stdout"] = rr.text()
    return rep


def cmd_verify(cfg: RunConfig) -> dict:
    from .verify import run_verify

    rep = run_verify(cfg.seed, quick=cfg.quick)
    if not rep["ok"]:
        rep["error"] = "some invariant failed"
        raise ComputationFailed(rep)
    return rep


COMMANDS = {
    "multicurve": cmd_multicurve,
    "interval": cmd_interval,
    "annulus": cmd_annulus,
    "wandering": cmd_wandering,
    "renorm": cmd_renorm,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pcfdyn", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--input", help="JSON file, bundled example name or built-in system")
        s.add_argument("--out", help="output directory")
        s.add_argument("--depth", type=int, default=10)
        s.add_argument("--iters", type=int, default=20)
        s.add_argument("--tol", type=float, default=1e-12)
        s.add_argument("--delta", type=float, default=1e-4)
        s.add_argument("--nodes", type=int, default=2048)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--format", default="json", choices=FORMATS)
        s.add_argument("--code", action="append", default=[], dest="codes",
                       help="symbolic code such as 01, 0(1) or champernowne; repeatable")
        if name == "verify":
            s.add_argument("--quick", action="store_true", help="smaller random samples")
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    kw = {k: v for k, v in vars(args).items() if v is not None}
    kw["codes"] = tuple(kw.get("codes", ()))
    code = 0
    try:
        cfg = RunConfig(**kw)
        rep = COMMANDS[cfg.subcommand](cfg)
    except ValidationError as exc:
        print(f"pcfdyn: invalid input: {exc}", file=sys.stderr)
        return 2
    except ComputationFailed as exc:
        rep, code = exc.report, 1
        print(f"pcfdyn: {rep.get('error')}", file=sys.stderr)
    except PcfDynError as exc:
        rep, code = {"error": f"{type(exc).__name__}: {exc}"}, 1
        print(f"pcfdyn: {rep['error']}", file=sys.stderr)
    stdout = rep.pop("_stdout", None)
    text = dumps(rep)
    _write(cfg, f"{cfg.subcommand}.json", text)
    sys.stdout.write(stdout if stdout is not None else text)
    return code


if __name__ == "__main__":
    sys.exit(main())
