"""Command line front end.

Subcommands: monitor (stream verdicts), check (one-shot truth value),
unfold (second-order elimination), analyze (monotonicity marks), bench
(experiment runners with CSV and figure output).

Exit codes: 0 SAT, 1 UNSAT, 2 INCONCLUSIVE at stream end, 3 any error.
`check` and `unfold` exit 0 on success; verdict codes belong to `monitor`.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from . import __version__
from .bench import (
    CSV_FIELDS,
    run_grouping,
    run_muddy,
    run_planning,
    run_sender_receiver,
)
from .evaluator import SUBSET_BOUND, Toggles
from .formulas import describe, pretty, walk
from .monitor import Monitor, MonitorError, Verdict, check_once
from .monotonicity import MINUS, PLUS, compute_mon_map
from .oracle import SubsetBoundError, naive_models
from .syntax import (
    DesugarError,
    FormulaSyntaxError,
    WellFormednessError,
    compile_formula,
)
from .traces import LengthPolicy, TraceError, TraceStore, parse_trace_text
from .unfolder import UnfoldError, unfold


class _Parser(argparse.ArgumentParser):
    # exit 2 belongs to the INCONCLUSIVE verdict, so usage errors take 3
    def error(self, message):
        print(f"error: usage: {message}", file=sys.stderr)
        raise SystemExit(3)


def _read_formula(arg: str) -> str:
    if os.path.exists(arg):
        with open(arg, encoding="utf-8") as handle:
            return handle.read()
    return arg


def _read_traces(arg: str):
    if arg == "-":
        text = sys.stdin.read()
    else:
        with open(arg, encoding="utf-8") as handle:
            text = handle.read()
    return parse_trace_text(text)


def _toggles(args) -> Toggles:
    if getattr(args, "disable", None):
        return Toggles.from_disabled(args.disable.split(","))
    return Toggles()


def _aps(args, header):
    if getattr(args, "aps", None):
        return tuple(name.strip() for name in args.aps.split(","))
    return header


def _policy(args) -> LengthPolicy:
    return LengthPolicy.PAD if getattr(args, "pad", False) else LengthPolicy.CROP


def _write_csv(rows, path: str, deterministic: bool) -> None:
    extra = []
    for row in rows:
        for key in row:
            if key != "row" and key not in CSV_FIELDS and key not in extra:
                extra.append(key)
    fields = ["row", *CSV_FIELDS, *sorted(extra)]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields, restval="")
        writer.writeheader()
        for row in rows:
            if deterministic:
                row = {**row, "elapsed_ms": 0}
            writer.writerow(row)


def _arrival_line(record) -> str:
    c = record.counters
    return (
        f"k={record.index} verdict={record.verdict.value}"
        f" check_calls={c.check_calls} sat_hits={c.sat_hits}"
        f" fix_seeds={c.fix_seeds} wit_hits={c.wit_hits}"
    )


VERDICT_CODE = {Verdict.SAT: 0, Verdict.UNSAT: 1, Verdict.INCONCLUSIVE: 2}


def cmd_monitor(args) -> int:
    header, raws = _read_traces(args.traces)
    formula = compile_formula(_read_formula(args.formula), aps=_aps(args, header))
    monitor = Monitor(
        formula,
        policy=_policy(args),
        toggles=_toggles(args),
        aps=_aps(args, header),
        subset_bound=args.subset_bound,
    )
    rows = []
    for raw in raws:
        monitor.feed(raw)
        record = monitor.log[-1]
        print(_arrival_line(record))
        rows.append(
            {
                "row": "arrival",
                "arrival_index": record.index,
                "verdict": record.verdict.value,
                "elapsed_ms": round(record.elapsed_ms, 3),
                **record.counters.as_dict(),
            }
        )
        if monitor.finished:
            break
    verdict, _ = monitor.finish()
    if args.csv:
        _write_csv(rows, args.csv, args.deterministic)
    return VERDICT_CODE[verdict]


def cmd_check(args) -> int:
    header, raws = _read_traces(args.traces)
    aps = _aps(args, header)
    formula = compile_formula(_read_formula(args.formula), aps=aps)
    result = check_once(
        formula, raws,
        policy=_policy(args), toggles=_toggles(args), aps=aps,
        subset_bound=args.subset_bound,
    )
    if args.oracle:
        store = TraceStore(policy=_policy(args), aps=aps)
        for raw in raws:
            store.add(raw)
        reference = naive_models(store, formula, subset_bound=args.subset_bound)
        if reference != result:
            raise ValueError(
                f"oracle disagrees: evaluator={result} oracle={reference}"
            )
    print("true" if result else "false")
    return 0


def cmd_unfold(args) -> int:
    formula = compile_formula(_read_formula(args.formula), aps=_aps(args, None))
    print(pretty(unfold(formula, args.bound)))
    return 0


def _fmt_marks(marks) -> str:
    parts = [m for m in (PLUS, MINUS) if m in marks]
    return "{" + ",".join(parts) + "}"


def cmd_analyze(args) -> int:
    formula = compile_formula(_read_formula(args.formula), aps=_aps(args, None))
    mon_map = compute_mon_map(formula)
    for node in walk(formula):
        marks = _fmt_marks(mon_map[node.nid])
        print(f"{marks:6} {describe(node):12} {pretty(node)}")
    return 0


def cmd_bench(args) -> int:
    toggles = _toggles(args)
    if args.experiment == "sender-receiver":
        rows = run_sender_receiver(args.length, toggles=toggles)
    elif args.experiment == "muddy":
        rows = run_muddy(args.children, args.bound, toggles=toggles)
    elif args.experiment == "grouping":
        rows = run_grouping(args.seed, args.traces, jobs=args.jobs)
    else:
        rows = run_planning(
            args.nodes, args.edge_prob, args.mode, args.seed,
            walks=args.walks, toggles=toggles,
        )
    for row in rows:
        if row["row"] == "summary":
            axes = {
                k: v for k, v in row.items()
                if k not in CSV_FIELDS and k not in ("row", "final_check")
            }
            tag = " ".join(f"{k}={v}" for k, v in sorted(axes.items()))
            print(
                f"summary {tag} verdict={row['verdict']}"
                f" arrivals={row['arrival_index']}"
                f" check_calls={row['check_calls']}"
                f" step_checks={row['step_checks']}"
            )
    if args.csv:
        _write_csv(rows, args.csv, args.deterministic)
    if args.fig:
        from .plots import render_experiment

        render_experiment(args.experiment, rows, args.fig)
    return 0


def _add_common(sub, *, traces=True):
    sub.add_argument("--formula", required=True,
                     help="formula file, or the formula text itself")
    sub.add_argument("--aps", help="comma-separated AP universe")
    if traces:
        sub.add_argument("--traces", required=True,
                         help="trace file, or - for standard input")
        group = sub.add_mutually_exclusive_group()
        group.add_argument("--crop", action="store_true",
                           help="cut longer traces to the first length (default)")
        group.add_argument("--pad", action="store_true",
                           help="extend shorter traces with empty steps")
        sub.add_argument("--disable",
                         help="comma-separated optimizations: sat,fix,wit,tree")
        sub.add_argument("--subset-bound", type=int, default=SUBSET_BOUND,
                         help="max trace count for set-quantifier enumeration")


def build_parser() -> _Parser:
    parser = _Parser(prog="somon", description=__doc__)
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    mon = subs.add_parser("monitor", help="feed traces, print verdict per arrival")
    _add_common(mon)
    mon.add_argument("--csv", help="write per-arrival counter rows")
    mon.add_argument("--deterministic", action="store_true",
                     help="zero elapsed_ms in CSV output")
    mon.set_defaults(run=cmd_monitor)

    chk = subs.add_parser("check", help="one-shot truth value on a full file")
    _add_common(chk)
    chk.add_argument("--oracle", action="store_true",
                     help="cross-check against the reference semantics")
    chk.set_defaults(run=cmd_check)

    unf = subs.add_parser("unfold", help="eliminate set quantifiers")
    _add_common(unf, traces=False)
    unf.add_argument("--bound", type=int, required=True,
                     help="number of fresh trace variables per set quantifier")
    unf.set_defaults(run=cmd_unfold)

    ana = subs.add_parser("analyze", help="print per-node monotonicity marks")
    _add_common(ana, traces=False)
    ana.set_defaults(run=cmd_analyze)

    ben = subs.add_parser("bench", help="run an experiment, write CSV and figure")
    bsubs = ben.add_subparsers(dest="experiment", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--csv", help="write per-arrival and summary rows")
    common.add_argument("--fig", help="render a PNG figure")
    common.add_argument("--disable",
                        help="comma-separated optimizations: sat,fix,wit,tree")
    common.add_argument("--deterministic", action="store_true",
                        help="zero elapsed_ms in CSV output")
    common.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for multi-instance experiments")

    sr = bsubs.add_parser("sender-receiver", parents=[common])
    sr.add_argument("--length", type=int, required=True)
    mud = bsubs.add_parser("muddy", parents=[common])
    mud.add_argument("--children", type=int, required=True)
    mud.add_argument("--bound", type=int, required=True)
    grp = bsubs.add_parser("grouping", parents=[common])
    grp.add_argument("--traces", type=int, required=True)
    grp.add_argument("--seed", type=int, default=0)
    plan = bsubs.add_parser("planning", parents=[common])
    plan.add_argument("--nodes", type=int, required=True)
    plan.add_argument("--edge-prob", type=float, required=True)
    plan.add_argument("--mode", choices=("tsen", "tins"), required=True)
    plan.add_argument("--seed", type=int, default=0)
    plan.add_argument("--walks", type=int, default=50)
    ben.set_defaults(run=cmd_bench)

    return parser


ERROR_KINDS = (
    (FormulaSyntaxError, "syntax"),
    (DesugarError, "desugar"),
    (WellFormednessError, "wellformed"),
    (TraceError, "trace"),
    (UnfoldError, "unfold"),
    (MonitorError, "monitor"),
    (SubsetBoundError, "subset-bound"),
    (ValueError, "usage"),
    (OSError, "io"),
)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except tuple(kind for kind, _ in ERROR_KINDS) as exc:
        for kind, name in ERROR_KINDS:
            if isinstance(exc, kind):
                print(f"error: {name}: {exc}", file=sys.stderr)
                break
        return 3


if __name__ == "__main__":
    sys.exit(main())
