"""Reference semantics, implemented as plainly as possible.

Everything here recomputes from scratch: no caches, no witness ordering,
no suffix grouping.  Set quantifiers enumerate every subset of the store,
fixpoints are resolved by scanning all subsets for the unique minimal one.
Intended for ground truth in differential tests and for `--oracle` spot
checks, not for performance.

Derived connectives are evaluated directly from their own clauses, so the
oracle can sit on either side of the desugarer.
"""

from __future__ import annotations

from itertools import combinations

from .formulas import (
    Formula,
    K_AND,
    K_ATOM,
    K_EVENTUALLY,
    K_FALSE,
    K_FIX,
    K_GLOBALLY,
    K_HISTORICALLY,
    K_IFF,
    K_IMPLIES,
    K_NEXT,
    K_NOT,
    K_ONCE,
    K_OR,
    K_PREV,
    K_SINCE,
    K_SQUANT,
    K_TQUANT,
    K_TRACE_EQ,
    K_TRUE,
    K_UNTIL,
    SYS,
)
from .traces import TraceStore

SUBSET_BOUND = 20
FIX_GUARD = 12


class SubsetBoundError(Exception):
    pass


def enumerate_subsets(ids, bound: int = SUBSET_BOUND):
    """All subsets of ``ids`` by cardinality, then lexicographically."""
    ordered = sorted(ids)
    if len(ordered) > bound:
        raise SubsetBoundError(
            f"set quantification over {len(ordered)} traces exceeds the bound "
            f"{bound}; raise it with --subset-bound"
        )
    for k in range(len(ordered) + 1):
        for combo in combinations(ordered, k):
            yield frozenset(combo)


def naive_check(pi, delta, i, store: TraceStore, node: Formula, *,
                nonempty_sets: bool = False, subset_bound: int = SUBSET_BOUND) -> bool:
    """Truth of ``node`` at index ``i`` under assignments pi and delta.

    ``nonempty_sets`` restricts set quantifiers to nonempty subsets; the
    unfolding harness uses it to classify disagreements.
    """
    m = store.m if store.m is not None else 1

    def rec(n, pi, delta, i):
        kind = n.KIND
        if kind == K_ATOM:
            return n.ap in store.get(pi[n.var])[i]
        if kind == K_TRUE:
            return True
        if kind == K_FALSE:
            return False
        if kind == K_NOT:
            return not rec(n.child, pi, delta, i)
        if kind == K_AND:
            return rec(n.left, pi, delta, i) and rec(n.right, pi, delta, i)
        if kind == K_OR:
            return rec(n.left, pi, delta, i) or rec(n.right, pi, delta, i)
        if kind == K_IMPLIES:
            return not rec(n.left, pi, delta, i) or rec(n.right, pi, delta, i)
        if kind == K_IFF:
            return rec(n.left, pi, delta, i) == rec(n.right, pi, delta, i)
        if kind == K_NEXT:
            return i < m - 1 and rec(n.child, pi, delta, i + 1)
        if kind == K_PREV:
            return i > 0 and rec(n.child, pi, delta, i - 1)
        if kind == K_UNTIL:
            for j in range(i, m):
                if rec(n.right, pi, delta, j) and all(
                    rec(n.left, pi, delta, k) for k in range(i, j)
                ):
                    return True
            return False
        if kind == K_SINCE:
            for j in range(i, -1, -1):
                if rec(n.right, pi, delta, j) and all(
                    rec(n.left, pi, delta, k) for k in range(j + 1, i + 1)
                ):
                    return True
            return False
        if kind == K_EVENTUALLY:
            return any(rec(n.child, pi, delta, j) for j in range(i, m))
        if kind == K_GLOBALLY:
            return all(rec(n.child, pi, delta, j) for j in range(i, m))
        if kind == K_ONCE:
            return any(rec(n.child, pi, delta, j) for j in range(i + 1))
        if kind == K_HISTORICALLY:
            return all(rec(n.child, pi, delta, j) for j in range(i + 1))
        if kind == K_TRACE_EQ:
            same = store.get(pi[n.left])[i:] == store.get(pi[n.right])[i:]
            return same != n.negated
        if kind == K_TQUANT:
            dom = delta[n.set_var]
            vals = (rec(n.body, {**pi, n.var: t}, delta, i) for t in sorted(dom))
            return any(vals) if n.exists else all(vals)
        if kind == K_SQUANT:
            subs = enumerate_subsets(store.ids(), subset_bound)
            vals = (
                rec(n.body, pi, {**delta, n.var: a}, i)
                for a in subs
                if a or not nonempty_sets
            )
            return any(vals) if n.exists else all(vals)
        if kind == K_FIX:
            sol = minimal_fix_by_subsets(pi, delta, i, store, n)
            return rec(n.body, pi, {**delta, n.var: sol}, i)
        raise ValueError(f"no semantics for node kind {kind}")

    return rec(node, dict(pi), dict(delta), i)


def naive_models(store: TraceStore, node: Formula, **kw) -> bool:
    """Top-level judgment: empty trace assignment, sys bound to the store."""
    return naive_check({}, {SYS: frozenset(store.ids())}, 0, store, node, **kw)


def constraint_holds(pi, delta, i, store: TraceStore, constraint, candidate) -> bool:
    """Does ``candidate`` (as the fix set) satisfy one constraint?

    Universally over the binder tuples: whenever the step holds, the target
    trace must already be in the candidate.  ``delta`` must map the fix
    variable to ``candidate``.
    """

    def tuples(bindings, idx):
        if idx == len(constraint.binders):
            yield bindings
            return
        tv, sv = constraint.binders[idx]
        for t in sorted(delta[sv]):
            yield from tuples({**bindings, tv: t}, idx + 1)

    for bound in tuples(dict(pi), 0):
        if naive_check(bound, delta, i, store, constraint.step):
            if bound[constraint.target] not in candidate:
                return False
    return True


def satisfying_subsets(pi, delta, i, store: TraceStore, fix_node) -> list:
    """All subsets of the store meeting every constraint of the fix."""
    if len(store) > FIX_GUARD:
        raise SubsetBoundError(
            f"fixpoint subset scan over {len(store)} traces exceeds {FIX_GUARD}"
        )
    out = []
    for a in enumerate_subsets(store.ids(), bound=FIX_GUARD):
        inner = {**delta, fix_node.var: a}
        if all(
            constraint_holds(pi, inner, i, store, c, a) for c in fix_node.constraints
        ):
            out.append(a)
    return out

def minimal_fix_by_subsets(pi, delta, i, store: TraceStore, fix_node) -> frozenset:
    sats = satisfying_subsets(pi, delta, i, store, fix_node)
    # the full store always qualifies, so sats is never empty
    least = frozenset(store.ids())
    for a in sats:
        least &= a
    assert least in sats, "no unique minimal constraint-satisfying set"
    return least
