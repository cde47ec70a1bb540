"""Bounded elimination of set quantifiers.

``exists X. phi`` becomes ``exists x1..xb in sys. phi'`` where ``phi'``
replaces quantification over X by the disjunction (for exists-in-X) or
conjunction (for forall-in-X) over the fresh variables x1..xb; ``forall X``
dually.  Quantifiers over sys are already first order and stay as they
are.  The rewrite is exact for stores of at most b traces, except when the
original formula is decided only by an empty set witness: b fresh trace
variables always denote a nonempty collection.  The harness below detects
that case by re-running the original with set quantifiers restricted to
nonempty sets.

Fixpoints are out of scope; unfolding one is an error.
"""

from __future__ import annotations

from dataclasses import dataclass

from .formulas import (
    And,
    Atom,
    FalseConst,
    Formula,
    K_ATOM,
    K_FALSE,
    K_FIX,
    K_SQUANT,
    K_TQUANT,
    K_TRACE_EQ,
    K_TRUE,
    Or,
    SYS,
    TraceEq,
    TraceQuant,
    TrueConst,
    walk,
)
from .oracle import naive_models
from .syntax import _alpha_rename, _collect_names
from .traces import TraceStore


class UnfoldError(Exception):
    pass


def _substitute(node: Formula, old: str, new: str) -> Formula:
    for n in walk(node):
        kind = n.KIND
        if kind == K_ATOM and n.var == old:
            n.var = new
        elif kind == K_TRACE_EQ:
            if n.left == old:
                n.left = new
            if n.right == old:
                n.right = new
    return node


def unfold(root: Formula, b: int) -> Formula:
    """Rewrite set quantifiers into blocks of ``b`` fresh sys quantifiers."""
    if b < 1:
        raise UnfoldError(f"bound must be at least 1, got {b}")
    taken = _collect_names(root)
    counter = 0

    def fresh() -> str:
        nonlocal counter
        while True:
            counter += 1
            name = f"x{counter}"
            if name not in taken:
                taken.add(name)
                return name

    def rec(n: Formula, m: dict) -> Formula:
        kind = n.KIND
        if kind == K_ATOM:
            return Atom(n.ap, n.var)
        if kind == K_TRUE:
            return TrueConst()
        if kind == K_FALSE:
            return FalseConst()
        if kind == K_TRACE_EQ:
            return TraceEq(n.left, n.right, negated=n.negated)
        if kind == K_FIX:
            raise UnfoldError("fixpoint unfolding unsupported")
        if kind == K_SQUANT:
            names = tuple(fresh() for _ in range(b))
            out = rec(n.body, {**m, n.var: names})
            for name in reversed(names):
                out = TraceQuant(n.exists, name, SYS, out)
            return out
        if kind == K_TQUANT:
            if n.set_var == SYS:
                return TraceQuant(n.exists, n.var, SYS, rec(n.body, m))
            combine = Or if n.exists else And
            parts = [
                _substitute(rec(n.body, m), n.var, name) for name in m[n.set_var]
            ]
            out = parts[0]
            for part in parts[1:]:
                out = combine(out, part)
            return out
        cls = type(n)
        if len(n._fields) == 1:
            return cls(rec(n.child, m))
        return cls(rec(n.left, m), rec(n.right, m))

    out = rec(root, {})
    _alpha_rename(out)
    return out


def second_order_free(node: Formula) -> bool:
    return all(n.KIND not in (K_SQUANT, K_FIX) for n in walk(node))


def unfold_factor_exponent(node: Formula) -> int:
    """Quantifier positions that multiply the output: the q in |phi| * b^q."""
    return sum(
        1
        for n in walk(node)
        if n.KIND == K_SQUANT or (n.KIND == K_TQUANT and n.set_var != SYS)
    )


@dataclass
class HarnessResult:
    agree: bool
    original: bool
    unfolded: bool
    empty_set_witness: bool

    def classified(self) -> bool:
        return self.agree or self.empty_set_witness


def equivalence_harness(phi: Formula, b: int, store: TraceStore) -> HarnessResult:
    """Compare the formula against its unfolding on a small store.

    Valid for ``len(store) <= b``; both sides go through the reference
    oracle.  A disagreement is classified empty-set-witness when the
    original, re-evaluated with set quantifiers ranging over nonempty sets
    only, flips to the unfolded side's answer.
    """
    if len(store) > b:
        raise ValueError(f"store has {len(store)} traces, bound is {b}")
    original = naive_models(store, phi)
    unfolded = naive_models(store, unfold(phi, b))
    if original == unfolded:
        return HarnessResult(True, original, unfolded, False)
    nonempty = naive_models(store, phi, nonempty_sets=True)
    return HarnessResult(False, original, unfolded, nonempty == unfolded)
