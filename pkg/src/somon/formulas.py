"""Formula AST shared by the parser, evaluator, and printers.

Two layers live in one node vocabulary: the surface layer produced by the
parser (which still contains derived connectives such as ``|``, ``->``, ``F``
and trace equality) and the core layer the evaluator consumes (atoms, ``true``
and ``false`` constants, ``!``, ``&``, ``X``, ``P``, ``U``, ``S``, the two
quantifier forms, and ``fix``).  ``desugar`` in :mod:`somon.syntax` maps the
first onto the second.

After :func:`finalize` every node carries a unique pre-order ``nid`` plus the
precomputed free-variable sets and a past-operator flag; the evaluator's cache
keys and the monotonicity map are indexed by ``nid``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Iterator, Optional

# Node kind tags.  The evaluator dispatches on these instead of isinstance
# chains; sugar kinds start at 20 so "< 20" means core.
K_ATOM = 0
K_TRUE = 1
K_FALSE = 2
K_NOT = 3
K_AND = 4
K_NEXT = 5
K_PREV = 6
K_UNTIL = 7
K_SINCE = 8
K_TQUANT = 9
K_SQUANT = 10
K_FIX = 11
K_OR = 20
K_IMPLIES = 21
K_IFF = 22
K_EVENTUALLY = 23
K_GLOBALLY = 24
K_ONCE = 25
K_HISTORICALLY = 26
K_TRACE_EQ = 27

SYS = "sys"


@dataclass(eq=False, repr=False)
class Formula:
    KIND: ClassVar[int] = -1
    _fields: ClassVar[tuple[str, ...]] = ()

    # Metadata filled in by finalize(); excluded from structural equality.
    nid: int = field(default=-1, kw_only=True)
    free_t: frozenset = field(default=frozenset(), kw_only=True)
    free_s: frozenset = field(default=frozenset(), kw_only=True)
    key_t: tuple = field(default=(), kw_only=True)
    key_s: tuple = field(default=(), kw_only=True)
    has_past: bool = field(default=False, kw_only=True)

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return all(getattr(self, f) == getattr(other, f) for f in self._fields)

    __hash__ = None

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __repr__(self):
        return f"{type(self).__name__}({self.pretty()})"

    def pretty(self) -> str:
        return pretty(self)


@dataclass(eq=False, repr=False)
class Atom(Formula):
    KIND = K_ATOM
    _fields = ("ap", "var")
    ap: str
    var: str


@dataclass(eq=False, repr=False)
class TrueConst(Formula):
    KIND = K_TRUE


@dataclass(eq=False, repr=False)
class FalseConst(Formula):
    KIND = K_FALSE


@dataclass(eq=False, repr=False)
class Not(Formula):
    KIND = K_NOT
    _fields = ("child",)
    child: Formula

    def children(self):
        return (self.child,)


@dataclass(eq=False, repr=False)
class And(Formula):
    KIND = K_AND
    _fields = ("left", "right")
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(eq=False, repr=False)
class Next(Formula):
    KIND = K_NEXT
    _fields = ("child",)
    child: Formula

    def children(self):
        return (self.child,)


@dataclass(eq=False, repr=False)
class Prev(Formula):
    KIND = K_PREV
    _fields = ("child",)
    child: Formula

    def children(self):
        return (self.child,)


@dataclass(eq=False, repr=False)
class Until(Formula):
    KIND = K_UNTIL
    _fields = ("left", "right")
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(eq=False, repr=False)
class Since(Formula):
    KIND = K_SINCE
    _fields = ("left", "right")
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(eq=False, repr=False)
class TraceQuant(Formula):
    KIND = K_TQUANT
    _fields = ("exists", "var", "set_var", "body")
    exists: bool
    var: str
    set_var: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(eq=False, repr=False)
class SetQuant(Formula):
    KIND = K_SQUANT
    _fields = ("exists", "var", "body")
    exists: bool
    var: str
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(eq=False, repr=False)
class FixConstraint:
    # binders: ((trace_var, set_var), ...); target must land in the fix set.
    binders: tuple
    step: Formula
    target: str
    target_set: str

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return (
            self.binders == other.binders
            and self.step == other.step
            and self.target == other.target
            and self.target_set == other.target_set
        )

    __hash__ = None


@dataclass(eq=False, repr=False)
class Fix(Formula):
    KIND = K_FIX
    _fields = ("var", "constraints", "body")
    var: str
    constraints: tuple
    body: Formula

    def children(self):
        return tuple(c.step for c in self.constraints) + (self.body,)


# ---------------------------------------------------------------------------
# Surface-only (derived) forms, eliminated by desugaring.


@dataclass(eq=False, repr=False)
class Or(Formula):
    KIND = K_OR
    _fields = ("left", "right")
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(eq=False, repr=False)
class Implies(Formula):
    KIND = K_IMPLIES
    _fields = ("left", "right")
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(eq=False, repr=False)
class Iff(Formula):
    KIND = K_IFF
    _fields = ("left", "right")
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(eq=False, repr=False)
class Eventually(Formula):
    KIND = K_EVENTUALLY
    _fields = ("child",)
    child: Formula

    def children(self):
        return (self.child,)


@dataclass(eq=False, repr=False)
class Globally(Formula):
    KIND = K_GLOBALLY
    _fields = ("child",)
    child: Formula

    def children(self):
        return (self.child,)


@dataclass(eq=False, repr=False)
class Once(Formula):
    KIND = K_ONCE
    _fields = ("child",)
    child: Formula

    def children(self):
        return (self.child,)


@dataclass(eq=False, repr=False)
class Historically(Formula):
    KIND = K_HISTORICALLY
    _fields = ("child",)
    child: Formula

    def children(self):
        return (self.child,)


@dataclass(eq=False, repr=False)
class TraceEq(Formula):
    KIND = K_TRACE_EQ
    _fields = ("left", "right", "negated")
    left: str
    right: str
    negated: bool


UNARY_SUGAR = {K_EVENTUALLY: "F", K_GLOBALLY: "G", K_ONCE: "O", K_HISTORICALLY: "H"}


def is_core(node: Formula) -> bool:
    return all(n.KIND < 20 for n in walk(node))


def walk(node: Formula) -> Iterator[Formula]:
    """Pre-order traversal; fix constraint steps precede the fix body."""
    yield node
    for child in node.children():
        yield from walk(child)


def node_count(node: Formula) -> int:
    return sum(1 for _ in walk(node))


def contains_fix(node: Formula) -> bool:
    return any(n.KIND == K_FIX for n in walk(node))


def finalize(root: Formula) -> Formula:
    """Assign pre-order node ids and precompute per-node metadata.

    Metadata: free trace/set variables (with sorted tuples for cache keys)
    and whether the subtree, constraint steps included, reaches into the past
    (P or S after desugaring, O or H before).
    """
    counter = 0

    def visit(n: Formula) -> None:
        nonlocal counter
        n.nid = counter
        counter += 1
        for child in n.children():
            visit(child)
        kind = n.KIND
        if kind == K_ATOM:
            ft, fs, past = frozenset((n.var,)), frozenset(), False
        elif kind == K_TRACE_EQ:
            ft, fs, past = frozenset((n.left, n.right)), frozenset(), False
        elif kind in (K_TRUE, K_FALSE):
            ft, fs, past = frozenset(), frozenset(), False
        elif kind == K_TQUANT:
            b = n.body
            ft = b.free_t - {n.var}
            fs = b.free_s | {n.set_var}
            past = b.has_past
        elif kind == K_SQUANT:
            b = n.body
            ft = b.free_t
            fs = b.free_s - {n.var}
            past = b.has_past
        elif kind == K_FIX:
            ft = set(n.body.free_t)
            fs = set(n.body.free_s)
            past = n.body.has_past
            for c in n.constraints:
                bound = {tv for tv, _ in c.binders}
                ft |= (c.step.free_t | {c.target}) - bound
                fs |= {sv for _, sv in c.binders}
                fs.add(c.target_set)
                past = past or c.step.has_past
            fs -= {n.var}
            ft, fs = frozenset(ft), frozenset(fs)
        else:
            ft = frozenset().union(*(c.free_t for c in n.children()))
            fs = frozenset().union(*(c.free_s for c in n.children()))
            past = kind in (K_PREV, K_SINCE, K_ONCE, K_HISTORICALLY) or any(
                c.has_past for c in n.children()
            )
        n.free_t, n.free_s, n.has_past = ft, fs, past
        n.key_t, n.key_s = tuple(sorted(ft)), tuple(sorted(fs))

    visit(root)
    return root


# ---------------------------------------------------------------------------
# Printing.  parse(pretty(f)) reproduces f structurally, for surface and core
# alike.  Precedence levels, loosest to tightest:
#   0 quantifiers / fix (body extends maximally right)
#   1 <->   2 ->   3 |   4 &   5 U S   6 unary   7 atoms

_BIN = {
    K_IFF: ("<->", 1, "left"),
    K_IMPLIES: ("->", 2, "right"),
    K_OR: ("|", 3, "left"),
    K_AND: ("&", 4, "left"),
    K_UNTIL: ("U", 5, "right"),
    K_SINCE: ("S", 5, "right"),
}

_UNARY = {
    K_NOT: "!",
    K_NEXT: "X",
    K_PREV: "P",
    K_EVENTUALLY: "F",
    K_GLOBALLY: "G",
    K_ONCE: "O",
    K_HISTORICALLY: "H",
}


def pretty(node: Formula) -> str:
    return _pp(node, 0, True)


def _pp(n: Formula, prec: int, tail: bool) -> str:
    kind = n.KIND
    if kind == K_ATOM:
        return f"{n.ap}[{n.var}]"
    if kind == K_TRUE:
        return "true"
    if kind == K_FALSE:
        return "false"
    if kind == K_TRACE_EQ:
        return f"{n.left} {'!=' if n.negated else '=='} {n.right}"
    if kind in _UNARY:
        return f"{_UNARY[kind]} {_pp(n.children()[0], 6, tail)}"
    if kind in _BIN:
        op, level, assoc = _BIN[kind]
        lp = level if assoc == "left" else level + 1
        rp = level + 1 if assoc == "left" else level
        if level < prec:
            left = _pp(n.left, lp, False)
            right = _pp(n.right, rp, True)
            return f"({left} {op} {right})"
        left = _pp(n.left, lp, False)
        right = _pp(n.right, rp, tail)
        return f"{left} {op} {right}"
    if kind == K_TQUANT:
        head = "exists" if n.exists else "forall"
        s = f"{head} {n.var} in {n.set_var}. {_pp(n.body, 0, True)}"
        return s if tail else f"({s})"
    if kind == K_SQUANT:
        head = "exists" if n.exists else "forall"
        s = f"{head} {n.var}. {_pp(n.body, 0, True)}"
        return s if tail else f"({s})"
    if kind == K_FIX:
        parts = []
        for c in n.constraints:
            binders = "".join(f"forall {tv} in {sv}. " for tv, sv in c.binders)
            parts.append(f"{binders}{_pp(c.step, 0, False)} => {c.target} in {c.target_set}")
        s = f"fix({n.var}, {', '.join(parts)}). {_pp(n.body, 0, True)}"
        return s if tail else f"({s})"
    raise AssertionError(f"unprintable node kind {kind}")


def describe(node: Formula) -> str:
    """One-line shallow label for diagnostics and `analyze` output."""
    kind = node.KIND
    if kind == K_ATOM:
        return f"{node.ap}[{node.var}]"
    if kind == K_TRUE:
        return "true"
    if kind == K_FALSE:
        return "false"
    if kind == K_TRACE_EQ:
        return f"{node.left} {'!=' if node.negated else '=='} {node.right}"
    if kind in _UNARY:
        return _UNARY[kind]
    if kind in _BIN:
        return _BIN[kind][0]
    if kind == K_TQUANT:
        return f"{'exists' if node.exists else 'forall'} {node.var} in {node.set_var}"
    if kind == K_SQUANT:
        return f"{'exists' if node.exists else 'forall'} {node.var}"
    if kind == K_FIX:
        return f"fix({node.var}, {len(node.constraints)} constraints)"
    return type(node).__name__
