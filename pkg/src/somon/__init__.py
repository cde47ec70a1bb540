"""Monitoring for second-order hyperproperties on growing finite-trace sets.

The library evaluates formulas that quantify over traces and over sets of
traces, including least-fixpoint set definitions, against a trace set that
grows one arrival at a time.  Monotonicity analysis turns raw truth values
into sound SAT/UNSAT verdicts; hashing and witness heuristics keep
re-evaluation cheap; an unfolder eliminates set quantifiers for a fixed
observation width.
"""

from .evaluator import Counters, Evaluator, Toggles
from .formulas import Formula, pretty
from .monitor import Monitor, MonitorError, MonitorWarning, Verdict, check_once
from .monotonicity import compute_mon_map, infer
from .oracle import minimal_fix_by_subsets, naive_check, naive_models
from .syntax import (
    DesugarError,
    FormulaSyntaxError,
    WellFormednessError,
    check_well_formed,
    compile_formula,
    desugar,
    parse,
)
from .traces import LengthPolicy, TraceError, TraceStore, parse_trace_text
from .unfolder import UnfoldError, equivalence_harness, unfold

__version__ = "0.1.0"

__all__ = [
    "Counters",
    "Evaluator",
    "Formula",
    "LengthPolicy",
    "Monitor",
    "MonitorError",
    "MonitorWarning",
    "Toggles",
    "TraceError",
    "TraceStore",
    "Verdict",
    "check_once",
    "check_well_formed",
    "compile_formula",
    "compute_mon_map",
    "desugar",
    "DesugarError",
    "equivalence_harness",
    "FormulaSyntaxError",
    "infer",
    "minimal_fix_by_subsets",
    "naive_check",
    "naive_models",
    "parse",
    "parse_trace_text",
    "pretty",
    "unfold",
    "UnfoldError",
    "WellFormednessError",
    "__version__",
]
