"""Command-line front end: ``decsynth {check,graph,reduce,synth,verify,gen}``.

Exit codes:

    0  success
    1  the input could not be parsed
    2  RCNMS violated (check) or a verified property failed (verify)
    3  the reduction does not apply (RCNMS violated)
    4  no controllable, nonblocking supervisor exists
    5  the explicit state space exceeded --bound
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from .automata import Automaton
from .depgraph import analyze, build_graph, emit_dot
from .errors import AutomatonError, EmptySupervisor, ModelError, NotApplicable, SizeBoundExceeded
from .modelio import format_plant, parse_model, pretty_print
from .oracle import (EXHAUSTIVE_LIMIT, generate_acyclic_rcnms_instance, generate_cnms_instance,
                     generate_cyclic_rcnms_instance, is_nonconflicting, verify_closed_loop)
from .problem import ControlProblem, check_cnms, check_rcnms
from .report import emit_report, format_property_report, report_data
from .synthesis import (DEFAULT_BOUND, ReductionPlan, Verdict, execute_plan, plan_reduction, sup_cn)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_FAILED = 2
EXIT_NOT_APPLICABLE = 3
EXIT_EMPTY = 4
EXIT_BOUND = 5


class _Abort(Exception):
    def __init__(self, code: int):
        self.code = code


def _load(path: str, args) -> ControlProblem:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        print(f"{path}: {exc.strerror}", file=sys.stderr)
        raise _Abort(EXIT_PARSE)
    result = parse_model(data)
    for d in result.diagnostics:
        if d.severity == "error" or args.verbose:
            print(d.format(path), file=sys.stderr)
    if not result.ok:
        raise _Abort(EXIT_PARSE)
    return result.problem


def _bound(args) -> int:
    if args.bound is not None:
        return args.bound
    return int(os.environ.get("DECSYNTH_BOUND", DEFAULT_BOUND))


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def cmd_check(args) -> int:
    cp = _load(args.input, args)
    cnms, rcnms = check_cnms(cp), check_rcnms(cp)
    if args.format == "json":
        print(json.dumps({
            "cnms": {"satisfied": cnms.satisfied, "violations": [str(v) for v in cnms.violations]},
            "rcnms": {"satisfied": rcnms.satisfied, "violations": [str(v) for v in rcnms.violations]},
            "notes": list(cnms.notes),
        }, indent=2, sort_keys=True))
    else:
        print(format_property_report("CNMS", cnms))
        print(format_property_report("RCNMS", rcnms))
        for note in cnms.notes:
            print(f"note: {note}")
    return EXIT_OK if rcnms.satisfied else EXIT_FAILED


def cmd_graph(args) -> int:
    cp = _load(args.input, args)
    g = build_graph(cp)
    analysis = analyze(g)
    if args.format == "json":
        text = json.dumps({
            "vertices": list(g.names),
            "edges": [{"id": f"e{n}", "from": g.names[e.init], "to": g.names[e.ter],
                       "requirement": e.requirement} for n, e in enumerate(g.edges, start=1)],
            "cyclic_components": [g.label(phi) for phi in analysis.phis],
            "extended": [g.label(v) for v in analysis.extended],
            "classes": [g.label(w.vertices) for w in analysis.partition],
            "residual": g.label(analysis.residual),
        }, indent=2, sort_keys=True) + "\n"
    else:
        text = emit_dot(g, analysis, name=Path(args.input).stem)
    if args.dot:
        Path(args.dot).write_text(emit_dot(g, analysis, name=Path(args.input).stem), encoding="utf-8")
        if args.format == "json":
            sys.stdout.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _plan(cp: ControlProblem) -> ReductionPlan:
    try:
        return plan_reduction(cp)
    except NotApplicable as exc:
        print(f"error: {exc}", file=sys.stderr)
        for v in exc.report.violations:
            print(f"  {v}", file=sys.stderr)
        print("note: fall back to monolithic synthesis ('decsynth synth --monolithic')", file=sys.stderr)
        raise _Abort(EXIT_NOT_APPLICABLE)


def cmd_reduce(args) -> int:
    cp = _load(args.input, args)
    plan = _plan(cp)
    if args.format == "json":
        sys.stdout.write(emit_report(plan, [], "json", deterministic=True))
        return EXIT_OK
    data = report_data(plan, [])
    print(f"verdict: {plan.verdict.value}")
    if plan.skips_synthesis:
        print("no synthesis necessary")
    else:
        g, a = plan.graph, plan.analysis
        print("cyclic components: " + "; ".join("{" + ", ".join(g.label(phi)) + "}" for phi in a.phis))
        for k, w in enumerate(a.partition, start=1):
            print(f"W{k}: {', '.join(g.label(w.vertices))}")
    print(f"residual: {', '.join(data['residual']) or '(none)'}")
    print(f"plants needing synthesis: {data['plants_needing_synthesis']} of {data['plants']} "
          f"(a reduction of {data['reduction_percent']:g}% of the plant models)")
    for note in plan.diagnostics:
        print(f"note: {note}")
    return EXIT_OK


def renamed_supervisor(aut: Automaton) -> tuple[Automaton, dict[str, str]]:
    """Supervisor with states s0, s1, ... and a map from new names to composed names."""
    names = {q: f"s{i}" for i, q in enumerate(aut.states)}
    renamed = Automaton(
        name=aut.name,
        states=tuple(names[q] for q in aut.states),
        alphabet=aut.alphabet,
        transitions={(names[q], e): names[t] for (q, e), t in aut.transitions.items()},
        initial=names[aut.initial],
        marked=frozenset(names[q] for q in aut.marked),
    )
    return renamed, {v: k for k, v in names.items()}


def write_supervisor(aut: Automaton, plants: Sequence[str], out_dir: Path) -> Path:
    renamed, origin = renamed_supervisor(aut)
    header = f"// supervisor {aut.name} over {', '.join(plants)}\n"
    path = out_dir / f"{aut.name}.dcp"
    path.write_text(header + format_plant(renamed, origin), encoding="utf-8")
    return path


def cmd_synth(args) -> int:
    cp = _load(args.input, args)
    bound = _bound(args)
    if args.monolithic:
        plan = ReductionPlan(Verdict.SECTIONALIZE, (cp,), frozenset(), check_cnms(cp), check_rcnms(cp),
                             build_graph(cp), None, ("monolithic synthesis over the whole problem",))
    else:
        plan = _plan(cp)
    try:
        if args.monolithic:
            results = [sup_cn(cp, bound, label="S1")]
        else:
            results = execute_plan(cp, plan, bound)
    except EmptySupervisor as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for res in results:
            path = write_supervisor(res.supervisor, res.plants, out)
            if args.verbose:
                print(f"wrote {path}", file=sys.stderr)
    sys.stdout.write(emit_report(plan, results, args.format, args.deterministic))
    return EXIT_OK


def _load_supervisor(path: str, args) -> Automaton:
    cp = _load(path, args)
    if len(cp.plants) != 1 or cp.requirements:
        print(f"{path}: a supervisor file must contain exactly one plant block", file=sys.stderr)
        raise _Abort(EXIT_PARSE)
    return cp.plants[0]


def cmd_verify(args) -> int:
    cp = _load(args.input, args)
    sups = [_load_supervisor(p, args) for p in args.supervisors]
    with_requirements = not args.supervisors_only or not sups
    try:
        verdict = verify_closed_loop(cp, sups, bound=_bound(args), check_maximal=args.maximal,
                                     with_requirements=with_requirements)
    except SizeBoundExceeded as exc:
        if not args.maximal or exc.bound != EXHAUSTIVE_LIMIT:
            raise
        print(f"note: closed loop too large for the exhaustive maximality check (> {exc.bound} states)",
              file=sys.stderr)
        verdict = verify_closed_loop(cp, sups, bound=_bound(args), with_requirements=with_requirements)
    except (ModelError, AutomatonError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    nonconflicting = is_nonconflicting(sups, _bound(args)) if len(sups) > 1 else None
    checks = {"safe": verdict.safe, "controllable": verdict.controllable, "nonblocking": verdict.nonblocking}
    if verdict.maximally_permissive is not None:
        checks["maximally_permissive"] = verdict.maximally_permissive
    if nonconflicting is not None:
        checks["nonconflicting"] = nonconflicting
    if args.format == "json":
        print(json.dumps({
            "checks": checks,
            "witnesses": {k: {"events": list(w.events), "state": w.state, "note": w.note}
                          for k, w in verdict.witnesses.items()},
        }, indent=2, sort_keys=True))
    else:
        for k, ok in checks.items():
            print(f"{k}: {'yes' if ok else 'no'}")
        for k, w in verdict.witnesses.items():
            trace = " ".join(w.events) or "(empty string)"
            print(f"witness [{k}]: {trace} -> {w.state}  ({w.note})")
    return EXIT_OK if all(checks.values()) else EXIT_FAILED


GENERATORS = {
    "cnms": generate_cnms_instance,
    "acyclic": generate_acyclic_rcnms_instance,
    "cyclic": generate_cyclic_rcnms_instance,
}


def cmd_gen(args) -> int:
    cp = GENERATORS[args.kind](args.seed, args.plants, args.requirements)
    text = pretty_print(cp)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--bound", type=_positive, default=None,
                        help="product-state limit (default $DECSYNTH_BOUND or 10^7)")
    common.add_argument("--deterministic", action="store_true", help="zero all durations in reports")
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(prog="decsynth", description=__doc__.split("\n\n")[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter,
                                     epilog=__doc__.split("\n\n", 1)[1])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="evaluate the CNMS and RCNMS properties")
    p.add_argument("input")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("graph", parents=[common], help="dependency graph as DOT")
    p.add_argument("input")
    p.add_argument("--dot", metavar="PATH", help="write the DOT text to PATH instead of stdout")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("reduce", parents=[common], help="decide which partial problems need synthesis")
    p.add_argument("input")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("synth", parents=[common], help="synthesise supervisors for the partial problems")
    p.add_argument("input")
    p.add_argument("--out", metavar="DIR", help="write each supervisor to DIR/<label>.dcp")
    p.add_argument("--monolithic", action="store_true", help="skip the reduction; one supervisor for everything")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", parents=[common], help="check a closed loop")
    p.add_argument("input")
    p.add_argument("supervisors", nargs="*")
    p.add_argument("--maximal", action="store_true", help="also compare against exhaustive search")
    p.add_argument("--supervisors-only", action="store_true",
                   help="do not compose the requirements into the closed loop")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", parents=[common], help="print a seeded random control problem")
    p.add_argument("kind", choices=sorted(GENERATORS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plants", type=_positive, default=4)
    p.add_argument("--requirements", type=int, default=3)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Abort as exc:
        return exc.code
    except SizeBoundExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
