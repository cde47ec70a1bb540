"""Workload generators and experiment runners.

Four workloads: the sender-receiver system with the common-knowledge and
eventual-knowledge formulas, the muddy children protocol, a random-trace
fixpoint workload for optimization comparisons, and random-graph planning
with time-sensitive or time-insensitive trace combination.

Experiment runners feed a monitor and emit one row per arrival plus one
summary row, as plain dicts ready for CSV serialization.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product

from .evaluator import Toggles
from .formulas import Formula
from .monitor import Monitor, Verdict
from .syntax import compile_formula
from .traces import Trace

SR_APS = ("s", "r", "d")

CK_TEXT = """
forall pi in sys. (F (r[pi] & X r[pi])) ->
  F fix(K, true => pi in K,
        forall p1 in K. forall p2 in sys.
          H (s[p1] <-> s[p2]) | H (r[p1] <-> r[p2]) => p2 in K).
    forall q in K. F r[q]
"""

EK_TEXT = """
forall pi in sys. (F (r[pi] & X r[pi])) ->
  F (forall q in sys. H (s[pi] <-> s[q]) -> F r[q])
"""


def _word(letters: str) -> Trace:
    return tuple(frozenset(c) for c in letters)


def sender_receiver_traces(m: int) -> list:
    """All length-m label sequences of the sender-receiver system.

    The always-sending and never-receiving runs come last, so a monitor
    meets the interesting counterexamples only at the end of the stream.
    """
    if m < 2:
        raise ValueError("need m >= 2")
    out = [_word("s" * k + "r" * (m - k)) for k in range(1, m)]
    out += [_word("s" * k + "d" + "r" * (m - k - 1)) for k in range(1, m - 1)]
    out.append(_word("s" * m))
    out.append(_word("s" * (m - 1) + "d"))
    return out


def ck_formula() -> Formula:
    return compile_formula(CK_TEXT, aps=SR_APS)


def eventual_knowledge_formula() -> Formula:
    return compile_formula(EK_TEXT, aps=SR_APS)


# -- muddy children ---------------------------------------------------------


def muddy_aps(n: int) -> tuple:
    return tuple(f"m{i}" for i in range(1, n + 1)) + tuple(
        f"d{i}" for i in range(1, n + 1)
    )


def muddy_traces(n: int) -> list:
    """One trace per muddiness vector, length n+2.

    With k muddy children, all of them declare simultaneously at step k+1
    and the declaration stays; clean children never declare.  Vectors are
    ordered most-muddy-first so a monitor meets violating pairs early.
    """
    if not 1 <= n <= 8:
        raise ValueError("need 1 <= n <= 8")
    out = []
    vectors = sorted(product((0, 1), repeat=n), key=lambda v: (-sum(v), v))
    for vector in vectors:
        k = sum(vector)
        muddy = frozenset(f"m{i + 1}" for i, bit in enumerate(vector) if bit)
        declared = muddy | frozenset(
            f"d{i + 1}" for i, bit in enumerate(vector) if bit
        )
        out.append(
            tuple(declared if k and t >= k + 1 else muddy for t in range(n + 2))
        )
    return out


def muddy_formula(n: int, b: int) -> Formula:
    if not 0 <= b <= n + 1:
        raise ValueError("need 0 <= b <= n+1")
    sees = []
    for i in range(1, n + 1):
        obs = [f"d{j}" for j in range(1, n + 1)]
        obs += [f"m{j}" for j in range(1, n + 1) if j != i]
        agree = " & ".join(f"({p}[p1] <-> {p}[p2])" for p in obs)
        sees.append(f"H ({agree})")
    body = " & ".join(f"(m{i}[q1] <-> m{i}[q2])" for i in range(1, n + 1))
    text = (
        "forall pi in sys. "
        + "X " * b
        + "fix(K, true => pi in K, "
        + "forall p1 in K. forall p2 in sys. "
        + " | ".join(sees)
        + " => p2 in K). "
        + f"forall q1 in K. forall q2 in K. {body}"
    )
    return compile_formula(text, aps=muddy_aps(n))


# -- random-trace fixpoint workload ------------------------------------------


GROUPING_TEXT = """
exists p in sys. F fix(K, true => p in K,
    forall p1 in K. forall p2 in sys.
      H (a[p1] <-> a[p2]) | H (b[p1] <-> b[p2]) => p2 in K).
  forall q in K. c[q]
"""
GROUPING_APS = ("a", "b", "c")
GROUPING_LEN = 12


def grouping_workload(seed: int, n_traces: int) -> tuple:
    formula = compile_formula(GROUPING_TEXT, aps=GROUPING_APS)
    rng = random.Random(seed)
    traces = [
        tuple(
            frozenset(ap for ap in GROUPING_APS if rng.random() < 0.5)
            for _ in range(GROUPING_LEN)
        )
        for _ in range(n_traces)
    ]
    return formula, traces


# -- planning ----------------------------------------------------------------


@dataclass
class PlanningInstance:
    nodes: int
    edges: dict  # node -> sorted tuple of successors
    source: int
    target: int
    mode: str  # "tsen" | "tins"
    walk_len: int
    seed: int
    formula: Formula

    def aps(self) -> tuple:
        return tuple(f"v{i + 1}" for i in range(self.nodes)) + ("src", "tgt")

    def target_reachable(self) -> bool:
        seen, frontier = {self.source}, [self.source]
        while frontier:
            node = frontier.pop()
            for nxt in self.edges[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return self.target in seen

    def walk_trace(self, rng) -> Trace:
        node = rng.randrange(self.nodes)
        steps = []
        for _ in range(self.walk_len):
            aps = {f"v{node + 1}"}
            if node == self.source:
                aps.add("src")
            if node == self.target:
                aps.add("tgt")
            steps.append(frozenset(aps))
            node = rng.choice(self.edges[node])
        return tuple(steps)

    def walks(self, count: int):
        rng = random.Random(self.seed + 1)
        return [self.walk_trace(rng) for _ in range(count)]


def planning_instance(nodes: int, edge_prob: float, walk_len: int, seed: int,
                      mode: str) -> PlanningInstance:
    if nodes > 20:
        raise ValueError("need nodes <= 20")
    if mode not in ("tsen", "tins"):
        raise ValueError("mode is tsen or tins")
    rng = random.Random(seed)
    edges = {}
    for a in range(nodes):
        succ = tuple(c for c in range(nodes) if rng.random() < edge_prob)
        edges[a] = succ if succ else (a,)  # sink nodes loop on themselves
    source = rng.randrange(nodes)
    target = rng.randrange(nodes)
    names = [f"v{i + 1}" for i in range(nodes)]
    if mode == "tsen":
        meet = "F (" + " | ".join(f"({v}[p1] & {v}[p2])" for v in names) + ")"
    else:
        meet = " | ".join(f"(F {v}[p1] & F {v}[p2])" for v in names)
    text = (
        "fix(K, forall p in sys. src[p] => p in K, "
        f"forall p1 in K. forall p2 in sys. {meet} => p2 in K). "
        "exists q in K. F tgt[q]"
    )
    formula = compile_formula(text, aps=names + ["src", "tgt"])
    return PlanningInstance(nodes, edges, source, target, mode, walk_len, seed, formula)


def _nodes_of(trace: Trace) -> list:
    out = []
    for step in trace:
        out.append(next(ap for ap in step if ap.startswith("v")))
    return out


def planning_oracle(instance: PlanningInstance, fed: list) -> bool:
    """Meet-closure reachability, recomputed directly on the fed traces."""
    paths = [_nodes_of(t) for t in fed]
    in_x = ["src" in t[0] for t in fed]
    changed = True
    while changed:
        changed = False
        for i, have in enumerate(in_x):
            if not have:
                continue
            for j, other in enumerate(in_x):
                if other:
                    continue
                if instance.mode == "tsen":
                    met = any(a == b for a, b in zip(paths[i], paths[j]))
                else:
                    met = bool(set(paths[i]) & set(paths[j]))
                if met:
                    in_x[j] = True
                    changed = True
    return any(
        have and any("tgt" in step for step in trace)
        for have, trace in zip(in_x, fed)
    )


# -- experiment runners -------------------------------------------------------

CSV_FIELDS = (
    "arrival_index",
    "verdict",
    "check_calls",
    "step_checks",
    "sat_hits",
    "fix_seeds",
    "wit_hits",
    "elapsed_ms",
)


def _arrival_row(record, **extra) -> dict:
    row = {
        "row": "arrival",
        "arrival_index": record.index,
        "verdict": record.verdict.value,
        "elapsed_ms": round(record.elapsed_ms, 3),
        **record.counters.as_dict(),
    }
    row.update(extra)
    return row


def run_stream(formula: Formula, traces, aps, *, toggles: Toggles | None = None,
               stop_on_verdict: bool = True, extra: dict | None = None) -> list:
    """Feed a stream, one row per arrival plus a summary row."""
    extra = extra or {}
    monitor = Monitor(formula, aps=aps, toggles=toggles)
    rows = []
    for trace in traces:
        verdict = monitor.feed(trace)
        rows.append(_arrival_row(monitor.log[-1], **extra))
        if stop_on_verdict and monitor.finished:
            break
    verdict, result = monitor.finish()
    totals = monitor.evaluator.counters
    rows.append(
        {
            "row": "summary",
            "arrival_index": len(monitor.log),
            "verdict": verdict.value,
            "elapsed_ms": round(sum(r.elapsed_ms for r in monitor.log), 3),
            **totals.as_dict(),
            "final_check": str(result).lower(),
            **extra,
        }
    )
    return rows


def run_sender_receiver(m: int, *, toggles: Toggles | None = None) -> list:
    return run_stream(
        ck_formula(), sender_receiver_traces(m), SR_APS,
        toggles=toggles, extra={"length": m},
    )


def run_muddy(n: int, b: int, *, toggles: Toggles | None = None) -> list:
    return run_stream(
        muddy_formula(n, b), muddy_traces(n), muddy_aps(n),
        toggles=toggles, extra={"children": n, "bound": b},
    )


GROUPING_CONFIGS = (
    ("all-off", Toggles.all_off()),
    ("fix-only", Toggles(sat=False, fix=True, wit=False, tree=False)),
    ("sat-only", Toggles(sat=True, fix=False, wit=False, tree=False)),
    ("all-on", Toggles()),
)


def _grouping_config_rows(args) -> list:
    seed, n_traces, name = args
    toggles = dict(GROUPING_CONFIGS)[name]
    formula, traces = grouping_workload(seed, n_traces)
    return run_stream(
        formula, traces, GROUPING_APS, toggles=toggles,
        stop_on_verdict=False, extra={"config": name, "seed": seed},
    )


def run_grouping(seed: int, n_traces: int, *, jobs: int = 1) -> list:
    work = [(seed, n_traces, name) for name, _ in GROUPING_CONFIGS]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(jobs, len(work))) as pool:
            chunks = list(pool.map(_grouping_config_rows, work))
    else:
        chunks = [_grouping_config_rows(w) for w in work]
    return [row for chunk in chunks for row in chunk]


def run_planning(nodes: int, edge_prob: float, mode: str, seed: int, *,
                 walks: int = 50, walk_len: int | None = None,
                 toggles: Toggles | None = None) -> list:
    instance = planning_instance(
        nodes, edge_prob, walk_len or max(3, nodes // 2), seed, mode
    )
    rows = run_stream(
        instance.formula, instance.walks(walks), instance.aps(),
        toggles=toggles,
        extra={
            "nodes": nodes,
            "mode": mode,
            "seed": seed,
            "reachable": str(instance.target_reachable()).lower(),
        },
    )
    return rows
