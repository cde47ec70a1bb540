"""Arrival-driven monitoring: feed traces, collect mark-justified verdicts.

Each accepted arrival re-checks the formula on the grown store.  A true
result is reported SAT only when the root carries the ``+`` mark, a false
result UNSAT only under ``-``; anything else stays INCONCLUSIVE.  SAT and
UNSAT are final: by monotonicity no extension can revert them, and further
feeding is an error.  Duplicate arrivals leave the store unchanged and
repeat the previous verdict without re-checking.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from enum import Enum

from .evaluator import Counters, Evaluator, Toggles
from .formulas import Formula
from .monotonicity import MINUS, PLUS, compute_mon_map
from .oracle import SUBSET_BOUND
from .traces import LengthPolicy, TraceStore


class Verdict(Enum):
    SAT = "sat"
    UNSAT = "unsat"
    INCONCLUSIVE = "inconclusive"


class MonitorError(Exception):
    pass


class MonitorWarning(UserWarning):
    pass


@dataclass
class ArrivalRecord:
    index: int  # 1-based arrival number
    trace_id: int
    added: bool
    verdict: Verdict
    result: bool
    counters: Counters  # deltas for this arrival
    elapsed_ms: float


class Monitor:
    def __init__(self, formula: Formula, *, policy: LengthPolicy = LengthPolicy.CROP,
                 toggles: Toggles | None = None, aps=None,
                 subset_bound: int = SUBSET_BOUND):
        self.formula = formula
        self.mon_map = compute_mon_map(formula)
        self.root_marks = self.mon_map[formula.nid]
        if not self.root_marks:
            warnings.warn(
                "formula root carries no monotonicity mark; the monitor can "
                "only ever report INCONCLUSIVE",
                MonitorWarning,
                stacklevel=2,
            )
        self.store = TraceStore(policy=policy, aps=tuple(aps) if aps else None)
        self.evaluator = Evaluator(
            self.store, formula, toggles=toggles, subset_bound=subset_bound,
            mon_map=self.mon_map,
        )
        self.log: list[ArrivalRecord] = []
        self.verdict = Verdict.INCONCLUSIVE
        self.last_result: bool | None = None
        self.finished = False

    def feed(self, raw) -> Verdict:
        if self.finished:
            raise MonitorError(f"monitor already finished with verdict {self.verdict.value}")
        start = time.perf_counter()
        inserted = self.store.add(raw)
        before = self.evaluator.counters.snapshot()
        if inserted.added:
            result = self.evaluator.check_root()
            self.last_result = result
            if result and PLUS in self.root_marks:
                self.verdict = Verdict.SAT
            elif not result and MINUS in self.root_marks:
                self.verdict = Verdict.UNSAT
            if self.verdict is not Verdict.INCONCLUSIVE:
                self.finished = True
        elapsed = (time.perf_counter() - start) * 1000.0
        self.log.append(
            ArrivalRecord(
                index=len(self.log) + 1,
                trace_id=inserted.trace_id,
                added=inserted.added,
                verdict=self.verdict,
                result=self.last_result,
                counters=self.evaluator.counters.delta(before),
                elapsed_ms=elapsed,
            )
        )
        return self.verdict

    def finish(self) -> tuple[Verdict, bool]:
        """Final verdict plus the raw truth value on the final store."""
        if self.last_result is None:
            self.last_result = self.evaluator.check_root()
        self.finished = True
        return self.verdict, self.last_result


def check_once(formula: Formula, raws, *, policy: LengthPolicy = LengthPolicy.CROP,
               toggles: Toggles | None = None, aps=None,
               subset_bound: int = SUBSET_BOUND) -> bool:
    """One-shot truth value of the formula on a complete trace set."""
    store = TraceStore(policy=policy, aps=tuple(aps) if aps else None)
    for raw in raws:
        store.add(raw)
    return Evaluator(store, formula, toggles=toggles, subset_bound=subset_bound).check_root()
