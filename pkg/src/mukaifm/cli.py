"""Command line interface: scenario files in, reports and CSV grids out.

Exit status: 0 evaluated, 2 bad input, 3 an internal invariant failed (for
example the oracle found a violation although its precondition holds).
"""
from __future__ import annotations

import argparse
import csv
import enum
import io
import itertools
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .counterexamples import (
    CounterexampleError, example1_report, example2_report, lemma_counter_report,
)
from .criteria import CriterionError, CriterionKind, evaluate_criterion
from .fm import (
    ContextError, decompose, fm_apply, gm_apply, k3_example_context, make_context,
    poincare_context,
)
from .lattice import LatticeError, MukaiVector, NSLattice, SurfaceKind, square, to_fraction
from .oracle import OracleError, verify_key_claims
from .sl2z import AlgVector, SL2ZError, orbit_bfs, orbit_word

SCHEMA = 1
MAX_GRID_ROWS = 200_000
EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 2, 3


class InputError(ValueError):
    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}")
        self.field = field


class InvariantError(RuntimeError):
    pass


# serialization -------------------------------------------------------------

def to_jsonable(x):
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, enum.Enum):
        return x.value
    if isinstance(x, MukaiVector):
        return {"r": str(x.r), "c1": [str(c) for c in x.c1], "a": str(x.a)}
    if isinstance(x, AlgVector):
        return list(x.as_tuple())
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "as_dict"):
        return to_jsonable(x.as_dict())
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(doc) -> str:
    return json.dumps(to_jsonable(doc), indent=2, sort_keys=False)


def csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    return str(x)


# scenario ------------------------------------------------------------------

def _rat(value, field):
    try:
        return to_fraction(value)
    except LatticeError as e:
        raise InputError(field, str(e)) from None


def _int(value, field):
    x = _rat(value, field)
    if x.denominator != 1:
        raise InputError(field, f"expected an integer, got {value!r}")
    return int(x)


def _vector(obj, field, rank):
    if not isinstance(obj, dict) or not {"r", "c1", "a"} <= set(obj):
        raise InputError(field, "expected an object with keys r, c1, a")
    c1 = obj["c1"]
    c1 = c1 if isinstance(c1, list) else [c1]
    if len(c1) != rank:
        raise InputError(f"{field}.c1", f"expected {rank} coordinates, got {len(c1)}")
    return MukaiVector(_rat(obj["r"], f"{field}.r"),
                       [_rat(c, f"{field}.c1") for c in c1], _rat(obj["a"], f"{field}.a"))


def _lattice(obj, field):
    if not isinstance(obj, dict):
        raise InputError(field, "expected an object with gram and H")
    try:
        gram = [[_int(x, f"{field}.gram") for x in row] for row in obj["gram"]]
        H = [_int(x, f"{field}.H") for x in obj["H"]]
    except (KeyError, TypeError):
        raise InputError(field, "needs gram (list of rows) and H (list)") from None
    if "rank" in obj and _int(obj["rank"], f"{field}.rank") != len(gram):
        raise InputError(f"{field}.rank", "does not match the gram matrix")
    try:
        return NSLattice(tuple(map(tuple, gram)), tuple(H))
    except LatticeError as e:
        raise InputError(field, str(e)) from None


class Scenario:
    """Parsed scenario: surface kind, context, optional vector and extras."""

    def __init__(self, doc: dict):
        if not isinstance(doc, dict):
            raise InputError("scenario", "expected an object")
        if doc.get("schema") != SCHEMA:
            raise InputError("schema", f"expected {SCHEMA}, got {doc.get('schema')!r}")
        self.doc = doc
        try:
            self.kind = SurfaceKind.parse(str(doc.get("surface", "abelian")))
        except LatticeError as e:
            raise InputError("surface", str(e)) from None
        ctx_doc = doc.get("context", {"preset": "poincare"})
        if not isinstance(ctx_doc, dict):
            raise InputError("context", "expected an object")
        preset = ctx_doc.get("preset", "poincare")
        ns = _lattice(doc["ns"], "ns") if "ns" in doc else None
        try:
            if preset == "poincare":
                if self.kind is not SurfaceKind.ABELIAN:
                    raise InputError("surface", "the poincare preset needs an abelian surface")
                n = _int(ctx_doc["n"], "context.n") if "n" in ctx_doc else None
                if ns is None and n is None:
                    raise InputError("context.n", "missing (or give ns)")
                self.ctx = poincare_context(n, ns)
            elif preset == "k3_example":
                if self.kind is not SurfaceKind.K3:
                    raise InputError("surface", "the k3_example preset needs a k3 surface")
                for key in ("n", "k"):
                    if key not in ctx_doc:
                        raise InputError(f"context.{key}", "missing")
                self.ctx = k3_example_context(_int(ctx_doc["n"], "context.n"),
                                              _int(ctx_doc["k"], "context.k"))
            elif preset == "custom":
                if ns is None:
                    raise InputError("ns", "the custom preset needs an explicit lattice")
                ns_y = _lattice(doc["ns_y"], "ns_y") if "ns_y" in doc else ns
                for key in ("v0", "w0"):
                    if key not in ctx_doc:
                        raise InputError(f"context.{key}", "missing")
                M = ctx_doc.get("ns_map")
                if M is not None:
                    M = [[_rat(x, "context.ns_map") for x in row] for row in M]
                self.ctx = make_context(self.kind, ns, ns_y,
                                        _vector(ctx_doc["v0"], "context.v0", ns.rank),
                                        _vector(ctx_doc["w0"], "context.w0", ns_y.rank), M)
            else:
                raise InputError("context.preset", f"unknown preset {preset!r}")
        except ContextError as e:
            raise InputError("context", str(e)) from None
        self.vector = (_vector(doc["vector"], "vector", self.ctx.ns_x.rank)
                       if "vector" in doc else None)
        extras = doc.get("extras", {})
        if not isinstance(extras, dict):
            raise InputError("extras", "expected an object")
        extras = dict(extras)
        if "G" in extras:
            extras["G"] = _vector(extras["G"], "extras.G", self.ctx.ns_x.rank)
        self.extras = extras

    @classmethod
    def load(cls, path: str) -> "Scenario":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except OSError as e:
            raise InputError("scenario", f"cannot read {path}: {e.strerror}") from None
        except json.JSONDecodeError as e:
            raise InputError("scenario", f"invalid JSON: {e}") from None
        return cls(doc)


def scenario_from_flags(args) -> dict:
    """Build a scenario document for ``NS = ZH`` from ``--vector``, ``--n`` and friends."""
    k3 = getattr(args, "k3", False)
    n = args.n if args.n is not None else 1
    doc = {"schema": SCHEMA, "surface": "k3" if k3 else "abelian"}
    doc["context"] = ({"preset": "k3_example", "n": n, "k": args.k if args.k else 1}
                      if k3 else {"preset": "poincare", "n": n})
    if args.vector:
        parts = [p.strip() for p in args.vector.split(",")]
        if len(parts) != 3:
            raise InputError("--vector", "expected r,d,a")
        doc["vector"] = {"r": parts[0], "c1": [parts[1]], "a": parts[2]}
    extras = {}
    for key in ("r", "k", "s"):
        val = getattr(args, key, None)
        if val is not None and not (key == "k" and k3):
            extras[key] = val
    if extras:
        doc["extras"] = extras
    return doc


def _get_scenario(args) -> Scenario:
    if args.scenario:
        return Scenario.load(args.scenario)
    return Scenario(scenario_from_flags(args))


# check ---------------------------------------------------------------------

def _summary(rep) -> str:
    word = "satisfied" if rep.satisfied else "not satisfied"
    bits = [f"{k}={csv_cell(v)}" for k, v in rep.computed.items()
            if isinstance(v, (int, Fraction)) and not isinstance(v, bool)]
    if rep.lhs is not None and rep.threshold is not None:
        bits.append(f"lhs={rep.lhs}")
        bits.append(f"threshold={rep.threshold}")
    failed = [k for k, ok in rep.hypotheses.items() if not ok]
    if failed:
        bits.append("failed hypotheses: " + "; ".join(failed))
    return f"{rep.kind.value}: {word}, " + ", ".join(bits)


def run_check(scn: Scenario, kinds) -> dict:
    reports = [evaluate_criterion(k, scn.ctx, scn.vector, scn.extras) for k in kinds]
    return {"schema": SCHEMA, "command": "check", "scenario": scn.doc,
            "reports": [r.as_dict() for r in reports]}, reports


def reevaluate_document(doc: dict) -> list:
    """Re-run the criteria of a check document; returns ``[(kind, satisfied), ...]``."""
    scn = Scenario(doc["scenario"])
    kinds = [CriterionKind.parse(r["kind"]) for r in doc["reports"]]
    _, reps = run_check(scn, kinds)
    return [(r.kind.value, r.satisfied) for r in reps]


def _parse_kinds(text: str) -> list:
    if not text:
        raise InputError("--criterion", "missing")
    try:
        return [CriterionKind.parse(t) for t in text.split(",") if t.strip()]
    except CriterionError as e:
        raise InputError("--criterion", str(e)) from None


def cmd_check(args) -> int:
    scn = _get_scenario(args)
    kinds = _parse_kinds(args.criterion)
    try:
        doc, reps = run_check(scn, kinds)
    except (CriterionError, LatticeError, OracleError) as e:
        raise InputError("criterion", str(e)) from None
    _emit(args, doc, [_summary(r) for r in reps])
    return EXIT_OK


def _emit(args, doc, lines):
    text = dumps(doc)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    if getattr(args, "json", False):
        print(text)
    else:
        for line in lines:
            print(line)


# fm ------------------------------------------------------------------------

def cmd_fm(args) -> int:
    scn = _get_scenario(args)
    if scn.vector is None:
        raise InputError("vector", "missing")
    ctx, v = scn.ctx, scn.vector
    coords = decompose(v, ctx)
    img = fm_apply(v, ctx) if args.direction == "fm" else gm_apply(v, ctx)
    ok = square(img, ctx.ns_y) == square(v, ctx.ns_x)
    doc = {"schema": SCHEMA, "command": "fm", "scenario": scn.doc, "direction": args.direction,
           "context": ctx.describe(), "input": v, "coordinates": coords.as_dict(),
           "image": img, "isometry_check": ok,
           "sign_convention": "alternating sum; a WIT_1 sheaf has image -v(F^1)"}
    _emit(args, doc, [f"input {v}", f"coordinates l={coords.l} a={coords.a} d={coords.d} "
                      f"D={[str(x) for x in coords.D]}",
                      f"{args.direction} image {img}", f"isometry check: {'ok' if ok else 'FAILED'}"])
    return EXIT_OK if ok else EXIT_INVARIANT


# oracle --------------------------------------------------------------------

def parse_caps(text: str | None) -> dict:
    if not text:
        return {}
    caps = {}
    for part in text.split(","):
        key, _, val = part.partition("=")
        key = key.strip()
        if key not in ("a1", "l1") or not val.strip().lstrip("-").isdigit():
            raise InputError("--caps", f"expected a1=INT,l1=INT, got {text!r}")
        caps[key] = int(val)
    return caps


def cmd_oracle(args) -> int:
    scn = _get_scenario(args)
    if scn.vector is None:
        raise InputError("vector", "missing")
    caps = parse_caps(args.caps)
    coords = decompose(scn.vector, scn.ctx)
    try:
        recs = verify_key_claims(scn.ctx, coords, caps,
                                 check_precondition=not args.no_precondition,
                                 D1_list=scn.extras.get("D1_list"))
    except OracleError as e:
        raise InputError("oracle", str(e)) from None
    doc = {"schema": SCHEMA, "command": "oracle", "scenario": scn.doc, "caps": caps,
           "precondition_checked": not args.no_precondition,
           "violations": [r.as_dict() for r in recs]}
    lines = [f"{len(recs)} violation(s)"] + [
        f"{r.claim.value}: d1={r.candidate.d1} a1={r.candidate.a1} l1={r.candidate.l1} ({r.detail})"
        for r in recs[:20]]
    _emit(args, doc, lines)
    if recs and not args.no_precondition:
        return EXIT_INVARIANT
    return EXIT_OK


# examples ------------------------------------------------------------------

def cmd_examples(args) -> int:
    def need(*names):
        for name in names:
            if getattr(args, name) is None:
                raise InputError(f"--{name}", "missing")

    try:
        if args.which == "1":
            need("r")
            rep = example1_report(args.r)
        elif args.which == "2":
            need("n", "k", "r", "a")
            rep = example2_report(args.n, args.k, args.r, args.a)
        else:
            need("r", "k", "n", "s")
            rep = lemma_counter_report(args.r, args.k, args.n, args.s)
    except CounterexampleError as e:
        raise InputError("examples", str(e)) from None
    doc = {"schema": SCHEMA, "command": "examples", "which": args.which, "report": rep.as_dict()}
    lines = [f"{name} = {v}" for name, v in rep.vectors]
    lines += [f"{name} = {s}" for name, s in rep.slopes]
    if "gap" in rep.values:
        lines.append(f"gap = {rep.values['gap']}")
    lines += [f"condition {name}: {ok}" for name, ok in rep.conditions]
    lines.append(f"verdict: {str(rep.verdict).lower()}")
    _emit(args, doc, lines)
    return EXIT_OK


# orbit ---------------------------------------------------------------------

def cmd_orbit(args) -> int:
    if not args.vector:
        raise InputError("--vector", "missing")
    try:
        v = AlgVector(*(int(p) for p in args.vector.split(",")))
    except (TypeError, ValueError):
        raise InputError("--vector", "expected three integers r,d,a") from None
    n = args.n if args.n is not None else 1
    try:
        if args.word:
            orbit = [(args.word * j, x) for j, x in
                     enumerate(orbit_word(args.word, v, n, args.depth, args.allow_nonprincipal))]
        else:
            orbit = orbit_bfs(v, n, args.depth, args.allow_nonprincipal)
    except SL2ZError as e:
        raise InputError("orbit", str(e)) from None
    doc = {"schema": SCHEMA, "command": "orbit", "n": n, "word": args.word,
           "depth": args.depth, "orbit": [{"word": w, "vector": x, "square": x.square(n)}
                                          for w, x in orbit]}
    _emit(args, doc, [f"{w or '1'}: {x}  <v^2>={x.square(n)}" for w, x in orbit])
    return EXIT_OK


# scan ----------------------------------------------------------------------

def _range(bounds, field):
    if isinstance(bounds, list) and len(bounds) in (2, 3):
        start, stop = _int(bounds[0], field), _int(bounds[1], field)
        step = _int(bounds[2], field) if len(bounds) == 3 else 1
    elif isinstance(bounds, dict):
        start, stop = _int(bounds.get("start"), field), _int(bounds.get("stop"), field)
        step = _int(bounds.get("step", 1), field)
    else:
        raise InputError(field, "expected [start, stop], [start, stop, step] or an object")
    if step <= 0 or stop < start:
        raise InputError(field, "need step > 0 and stop >= start")
    return list(range(start, stop + 1, step))


def load_grid(doc: dict) -> dict:
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise InputError("schema", f"expected {SCHEMA}")
    surface = doc.get("surface", "abelian")
    if surface not in ("abelian", "k3"):
        raise InputError("surface", f"unknown surface {surface!r}")
    params = doc.get("params")
    if not isinstance(params, dict) or not params:
        raise InputError("params", "expected a non-empty object of ranges")
    ranges = {name: _range(bounds, f"params.{name}") for name, bounds in params.items()}
    need = {"r", "d", "a", "n"} | ({"k"} if surface == "k3" else set())
    missing = need - set(ranges)
    if missing:
        raise InputError("params", f"missing {sorted(missing)}")
    unknown = set(ranges) - need
    if unknown:
        raise InputError("params", f"unknown parameters {sorted(unknown)}")
    size = 1
    for vals in ranges.values():
        size *= len(vals)
    if size > int(doc.get("max_rows", MAX_GRID_ROWS)) or size > MAX_GRID_ROWS:
        raise InputError("params", f"grid has {size} rows, over the cap")
    crit = doc.get("criteria", [])
    try:
        kinds = [CriterionKind.parse(c).value for c in crit]
    except CriterionError as e:
        raise InputError("criteria", str(e)) from None
    return {"surface": surface, "ranges": ranges, "criteria": kinds,
            "oracle": bool(doc.get("oracle", False)), "caps": parse_caps(doc.get("caps"))}


def _scan_row(job):
    grid, values = job
    row = dict(zip(grid["ranges"], values))
    if grid["surface"] == "k3":
        ctx = k3_example_context(row["n"], row["k"])
    else:
        ctx = poincare_context(row["n"])
    v = MukaiVector(row["r"], (row["d"],), row["a"])
    out = [str(x) for x in values]
    for tag in grid["criteria"]:
        try:
            rep = evaluate_criterion(tag, ctx, v)
        except (CriterionError, LatticeError, OracleError):
            out.append("")
            continue
        out.append(csv_cell(rep.satisfied))
    if grid["oracle"]:
        coords = decompose(v, ctx)
        pre = None
        if coords.l > 0:
            pre = evaluate_criterion(CriterionKind.LemmaKey, ctx, v)
        elif coords.l == 0 and coords.d > 0:
            pre = evaluate_criterion(CriterionKind.LemmaKey0, ctx, v)
        if pre is not None and pre.satisfied:
            out.append(str(len(verify_key_claims(ctx, coords, grid["caps"]))))
        else:
            out.append("")
    return out


def run_scan(grid: dict, workers: int = 1) -> str:
    header = list(grid["ranges"]) + list(grid["criteria"])
    if grid["oracle"]:
        header.append("oracle_violations")
    jobs = [(grid, vals) for vals in itertools.product(*grid["ranges"].values())]
    if workers <= 1:
        rows = [_scan_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_row, jobs, chunksize=max(1, len(jobs) // (8 * workers))))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    bad = sum(1 for row in rows if grid["oracle"] and row[-1] not in ("", "0"))
    return buf.getvalue(), bad


def cmd_scan(args) -> int:
    if not args.grid:
        raise InputError("--grid", "missing")
    try:
        with open(args.grid) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise InputError("--grid", f"cannot read {args.grid}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError("--grid", f"invalid JSON: {e}") from None
    grid = load_grid(doc)
    if args.workers < 1:
        raise InputError("--workers", "must be positive")
    text, bad = run_scan(grid, args.workers)
    _write(args.out, text)
    if bad:
        print(f"{bad} row(s) with oracle violations", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _write(path, text):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mukaifm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, vector=True):
        sp.add_argument("--scenario", help="scenario JSON file")
        if vector:
            sp.add_argument("--vector", help="r,d,a on NS = ZH (instead of a scenario)")
        sp.add_argument("--n", type=int, help="(H^2)/2")
        sp.add_argument("--k", type=int)
        sp.add_argument("--k3", action="store_true", help="use the K3 example context")
        sp.add_argument("--out", help="also write the JSON document here")
        sp.add_argument("--json", action="store_true", help="print the JSON document")

    sp = sub.add_parser("check", help="evaluate criteria")
    common(sp)
    sp.add_argument("--criterion", required=True, help="TAG[,TAG...]")
    sp.add_argument("--r", type=int)
    sp.add_argument("--s", type=int)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("fm", help="apply the transform to a vector")
    common(sp)
    sp.add_argument("--direction", choices=("fm", "gm"), default="fm")
    sp.set_defaults(func=cmd_fm)

    sp = sub.add_parser("oracle", help="enumerate destabilizer candidates")
    common(sp)
    sp.add_argument("--caps", help="a1=INT,l1=INT")
    sp.add_argument("--no-precondition", action="store_true",
                    help="run even if the lemma's bound fails (negative control)")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("examples", help="reproduce the counterexamples")
    sp.add_argument("--which", choices=("1", "2", "counter"), required=True)
    for name in ("r", "n", "k", "a", "s"):
        sp.add_argument(f"--{name}", type=int)
    sp.add_argument("--out")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_examples)

    sp = sub.add_parser("orbit", help="SL(2,Z) orbit of a vector")
    sp.add_argument("--word", default="")
    sp.add_argument("--vector", required=True, help="r,d,a")
    sp.add_argument("--n", type=int)
    sp.add_argument("--depth", type=int, default=1)
    sp.add_argument("--allow-nonprincipal", action="store_true")
    sp.add_argument("--out")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_orbit)

    sp = sub.add_parser("scan", help="evaluate criteria over a parameter grid")
    sp.add_argument("--grid", required=True)
    sp.add_argument("--out")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_scan)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (LatticeError, ContextError, CriterionError, CounterexampleError, SL2ZError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (InvariantError, OracleError) as e:
        print(f"invariant violated: {e}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
