"""Monotonicity marks for core formulas.

A node is marked ``+`` when its truth survives growing the trace set (and
every set bound in the surrounding context), ``-`` when its falsity does.
Atoms and constants carry both marks, negation swaps them, Next/Prev pass
them through, And/Until/Since intersect.  A trace quantifier keeps a mark
only when its domain is a context set: exists keeps ``+``, forall keeps
``-``, and quantifying over a plainly set-quantified variable keeps
nothing.  Set quantifiers pass the body's marks through unchanged; a fix
binder joins the context for everything below it.  The context starts as
{sys}.  The rules are deliberately one-sided, so an empty mark set does
not mean the property is non-monotone.
"""

from __future__ import annotations

from .formulas import (
    Formula,
    K_AND,
    K_ATOM,
    K_FALSE,
    K_FIX,
    K_NEXT,
    K_NOT,
    K_PREV,
    K_SINCE,
    K_SQUANT,
    K_TQUANT,
    K_TRUE,
    K_UNTIL,
    SYS,
)

PLUS = "+"
MINUS = "-"
BOTH = frozenset((PLUS, MINUS))
NEITHER = frozenset()
_FLIP = {PLUS: MINUS, MINUS: PLUS}

ROOT_CONTEXT = frozenset((SYS,))


def _infer(n: Formula, ctx: frozenset, out: dict | None) -> frozenset:
    kind = n.KIND
    if kind in (K_ATOM, K_TRUE, K_FALSE):
        got = BOTH
    elif kind == K_NOT:
        got = frozenset(_FLIP[m] for m in _infer(n.child, ctx, out))
    elif kind in (K_NEXT, K_PREV):
        got = _infer(n.child, ctx, out)
    elif kind in (K_AND, K_UNTIL, K_SINCE):
        got = _infer(n.left, ctx, out) & _infer(n.right, ctx, out)
    elif kind == K_TQUANT:
        body = _infer(n.body, ctx, out)
        if n.set_var in ctx:
            got = body & frozenset((PLUS if n.exists else MINUS,))
        else:
            got = NEITHER
    elif kind == K_SQUANT:
        got = _infer(n.body, ctx, out)
    elif kind == K_FIX:
        inner = ctx | {n.var}
        for c in n.constraints:
            _infer(c.step, inner, out)
        got = _infer(n.body, inner, out)
    else:
        raise ValueError(f"marks are defined on core nodes only, got kind {kind}")
    if out is not None:
        out[n.nid] = got
    return got


def infer(node: Formula, ctx: frozenset = ROOT_CONTEXT) -> frozenset:
    """Mark set of one node under an explicit context."""
    return _infer(node, ctx, None)


def compute_mon_map(root: Formula) -> dict:
    """Marks for every node of a finalized core formula, keyed by node id."""
    out: dict = {}
    _infer(root, ROOT_CONTEXT, out)
    return out
