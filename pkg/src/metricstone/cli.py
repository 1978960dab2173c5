"""Command-line front end.

Exit codes: 0 success, 1 domain violation, 2 parse error, 3-7 recovery stage
failures (isometry, zero, pairs, points, formula).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import fuzz
from .core import (
    FiniteSpace,
    Pseudometric,
    PseudometricError,
    find_violation,
    in_pc,
    in_pp,
    norm,
    peak_set,
    sup_distance,
)
from .documents import (
    DocumentError,
    display_scalar,
    dump_json,
    load_json,
    metric_from_doc,
    metric_to_doc,
    oracle_from_spec,
    parse_pair,
    parse_scalar,
    reorder_to_space,
    space_from_doc,
)
from .extend import PartialPseudometric, extend_pseudometric, lipschitz_constant
from .peaks import densify_to_pp, in_peak_cone, peak_translate
from .recover import DEFAULT_BUDGET, RecoveryError, full_recovery

STAGE_EXIT = {"isometry": 3, "zero": 4, "pairs": 5, "points": 6, "formula": 7}


class Output:
    def __init__(self, args):
        self.as_float = getattr(args, "float", False)
        self.format = getattr(args, "format", "json")
        self.out = getattr(args, "out", None)

    def num(self, q):
        return display_scalar(q, self.as_float)

    def emit(self, doc: dict, text_lines=None):
        if self.format == "text":
            body = "\n".join(text_lines if text_lines is not None else _flatten(doc))
        else:
            body = dump_json(doc)
        if self.out:
            Path(self.out).write_text(body + "\n", encoding="utf-8")
        else:
            print(body)


def _flatten(doc, prefix=""):
    lines = []
    for k, v in doc.items():
        if isinstance(v, dict):
            lines.extend(_flatten(v, f"{prefix}{k}."))
        else:
            lines.append(f"{prefix}{k}: {v}")
    return lines


def _labels_of_pairs(labels, pairs):
    return [[labels[p.i], labels[p.j]] for p in sorted(pairs)]


def _load_space(path) -> FiniteSpace:
    doc = load_json(path)
    try:
        return space_from_doc(doc)
    except PseudometricError as exc:
        raise DocumentError(f"{path}: ambient metric invalid: {exc}") from None
    except ValueError as exc:
        if isinstance(exc, DocumentError):
            raise
        raise DocumentError(f"{path}: {exc}") from None


def _load_metric_on(space: FiniteSpace, path) -> Pseudometric:
    doc = load_json(path)
    labels, m = metric_from_doc(doc)
    if "points" in doc:
        m = reorder_to_space(space, labels, m)
    elif len(m) != space.n:
        raise DocumentError(f"{path}: matrix size {len(m)} does not match the space ({space.n})")
    return Pseudometric(m)


def cmd_validate(args) -> int:
    out = Output(args)
    labels, m = metric_from_doc(load_json(args.file))
    violation = find_violation(m)
    if violation is not None:
        witness = [labels[i] for i in violation.witness if i < len(labels)]
        out.emit(
            {"valid": False, "axiom": violation.axiom, "witness": witness, "message": violation.message},
            [f"INVALID: {violation.axiom} violated at {tuple(witness)}: {violation.message}"],
        )
        return 1
    d = Pseudometric(m)
    member, witness = in_pc(d)
    peaks = peak_set(d)
    doc = {
        "valid": True,
        "admissible": d.is_admissible(),
        "norm": out.num(norm(d)),
        "peak_set": _labels_of_pairs(labels, peaks),
        "in_Pp": in_pp(d),
        "in_Pc": {"member": member, "witness": sorted(labels[i] for i in witness) if witness else None},
    }
    if args.pair:
        space = FiniteSpace.discrete(labels)
        pair = parse_pair(space, args.pair)
        doc["peak_cone"] = {"pair": [labels[pair.i], labels[pair.j]], "member": in_peak_cone(d, pair)}
    lines = [
        "valid pseudometric",
        f"norm {doc['norm']}, admissible: {doc['admissible']}",
        f"peaks: {', '.join('{' + a + ',' + b + '}' for a, b in doc['peak_set'])}",
        f"unique peak metric: {doc['in_Pp']}",
    ]
    out.emit(doc, lines)
    return 0


def cmd_extend(args) -> int:
    out = Output(args)
    space = _load_space(args.space)
    partial_doc = load_json(args.partial)
    labels, m = metric_from_doc(partial_doc)
    subset_labels = [s.strip() for s in args.subset.split(",")] if args.subset else list(labels)
    if len(subset_labels) != len(m):
        raise DocumentError(f"subset has {len(subset_labels)} points, partial matrix has {len(m)}")
    try:
        subset = [space.index(s) for s in subset_labels]
    except KeyError as exc:
        raise DocumentError(str(exc)) from None
    if "points" in partial_doc and args.subset:
        pos = [labels.index(s) for s in subset_labels] if sorted(labels) == sorted(subset_labels) else None
        if pos is None:
            raise DocumentError("subset labels do not match the partial document's points")
        m = [[m[a][b] for b in pos] for a in pos]
    partial = PartialPseudometric.from_matrix(space, subset, m)
    ext = extend_pseudometric(partial)
    doc = metric_to_doc(ext, space.points, out.as_float)
    doc["provenance"] = {
        "subset": subset_labels,
        "lipschitz": out.num(lipschitz_constant(partial)),
        "cap": out.num(norm(partial.entries)),
    }
    out.emit(doc)
    return 0


def cmd_perturb(args) -> int:
    out = Output(args)
    space = _load_space(args.space)
    d = _load_metric_on(space, args.metric)
    if args.mode == "dense":
        eps = parse_scalar(args.eps if args.eps is not None else "1")
        res = densify_to_pp(space, d, eps)
        doc = metric_to_doc(res.metric, space.points, out.as_float)
        doc["peak_pair"] = [space.points[res.pair.i], space.points[res.pair.j]]
        doc["peak_value"] = out.num(res.peak_value)
        doc["eps"] = out.num(eps)
        doc["eps_used"] = out.num(res.eps_used)
        doc["repair_norm"] = out.num(res.repair_norm)
        doc["sup_distance"] = out.num(sup_distance(res.metric, d))
        doc["bound"] = out.num(4 * eps + res.repair_norm)
    else:
        if not args.pair:
            raise DocumentError("translate mode needs --pair a,b")
        pair = parse_pair(space, args.pair)
        res = peak_translate(space, d, pair)
        total = res.rho + d
        doc = metric_to_doc(total, space.points, out.as_float)
        doc["rho"] = metric_to_doc(res.rho, space.points, out.as_float)["matrix"]
        doc["peak_pair"] = [space.points[pair.i], space.points[pair.j]]
        doc["peak_value"] = out.num(total[pair])
        doc["a"] = out.num(res.a)
        doc["b"] = out.num(res.b)
        doc["repaired"] = res.repair is not None
    out.emit(doc)
    return 0


def cmd_recover(args) -> int:
    out = Output(args)
    X = _load_space(args.space_x)
    Y = _load_space(args.space_y)
    T = oracle_from_spec(load_json(args.oracle), X, Y)
    try:
        result = full_recovery(T, budget=args.budget, sample_count=args.samples, seed=args.seed)
    except RecoveryError as exc:
        doc = {"ok": False, "failed_stage": exc.stage, "error": type(exc).__name__, "message": str(exc)}
        labels = Y.points if exc.witness_side == "codomain" else X.points
        if isinstance(exc.witness, Pseudometric):
            doc["witness"] = metric_to_doc(exc.witness, labels, out.as_float)
        elif isinstance(exc.witness, tuple) and all(isinstance(w, Pseudometric) for w in exc.witness):
            doc["witness"] = [metric_to_doc(w, labels, out.as_float) for w in exc.witness]
        out.emit(doc, [f"FAILED at {exc.stage} stage ({type(exc).__name__}): {exc}"])
        return STAGE_EXIT[exc.stage]
    phi = {Y.points[y]: X.points[x] for y, x in enumerate(result.phi.mapping)}
    doc = {
        "ok": True,
        "phi": phi,
        "uniqueness": result.phi.flag,
        "stages": {
            name: {"passed": r.passed, "checked": r.checked, "notes": r.notes} for name, r in result.reports.items()
        },
    }
    lines = ["recovered point map (codomain -> domain):"]
    lines += [f"  {y} -> {x}" for y, x in phi.items()]
    lines.append(f"uniqueness: {result.phi.flag}")
    out.emit(doc, lines)
    return 0


def cmd_fuzz(args) -> int:
    out = Output(args)
    if args.replay:
        doc = load_json(args.replay)
        cases = doc.get("counterexamples", [doc])
        results = []
        for case in cases:
            try:
                ok, detail = fuzz.replay(case)
            except (KeyError, TypeError, ValueError) as exc:
                raise DocumentError(f"cannot replay {args.replay}: {exc}") from None
            results.append({"property": case.get("property"), "trial": case.get("trial"), "passed": ok, "detail": detail})
        out.emit({"replayed": results}, [f"{r['property']}#{r['trial']}: {'pass' if r['passed'] else 'FAIL'} {r['detail']}" for r in results])
        return 0 if all(r["passed"] for r in results) else 1
    if args.trials < 0 or args.n_min < 1 or args.n_max < args.n_min:
        raise DocumentError(f"invalid campaign range: trials={args.trials}, n in [{args.n_min}, {args.n_max}]")
    try:
        fuzz.select(args.suite)
    except ValueError as exc:
        raise DocumentError(str(exc)) from None
    report = fuzz.run_campaign(args.seed, args.trials, args.n_min, args.n_max, args.suite)
    lines = [
        f"seed {report['seed']} suite {report['suite']}: {report['passed']}/{report['trials']} passed",
    ]
    lines += [f"FAIL {c['property']}#{c['trial']} (n={c['n']}): {c['detail']}" for c in report["counterexamples"]]
    out.emit(report, lines)
    return 1 if report["failed"] else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "text"), default="json")
    display = common.add_mutually_exclusive_group()
    display.add_argument("--exact", dest="float", action="store_false", help="rational output (default)")
    display.add_argument("--float", dest="float", action="store_true", help="rounded float display")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.set_defaults(float=False)

    parser = argparse.ArgumentParser(prog="metricstone", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check pseudometric axioms and peak structure")
    p.add_argument("file")
    p.add_argument("--pair", help="also test peak-cone membership at a,b")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("extend", parents=[common], help="norm-preserving extension from a subset")
    p.add_argument("space")
    p.add_argument("partial")
    p.add_argument("--subset", help="comma-separated labels (default: the partial document's points)")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("perturb", parents=[common], help="unique-peak perturbations")
    p.add_argument("space")
    p.add_argument("metric")
    p.add_argument("--mode", choices=("dense", "translate"), default="dense")
    p.add_argument("--pair")
    p.add_argument("--eps")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("recover", parents=[common], help="recover the point bijection behind an oracle")
    p.add_argument("space_x")
    p.add_argument("space_y")
    p.add_argument("oracle")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--samples", type=int, default=50)
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("fuzz", parents=[common], help="seeded property campaign")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--suite", default="all", help=f"all, a property name, or one of {', '.join(fuzz.SUITES)}")
    p.add_argument("--replay", help="re-check a saved report or counterexample")
    p.set_defaults(func=cmd_fuzz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (PseudometricError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
