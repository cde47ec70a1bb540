"""Incremental model checker with caching, witness ordering, and suffix lifting.

The evaluator answers `Pi, Delta, i |= node` against a growing trace store.
Four independently toggleable optimizations:

  sat   reuse cached subformula results across store versions when a
        monotonicity mark justifies it (a true result of a ``+``-marked node
        survives growth, a false result of a ``-``-marked node likewise)
  fix   seed fixpoint computations with the previous solution for the same
        instantiation instead of starting from the empty set
  wit   remember per (node, context) the trace that decided a quantifier
        and try it first next time
  tree  iterate trace quantifiers over one representative per class of
        traces agreeing from the current index on, for past-free bodies

Independent of the toggles, results are memoized within one store version;
that changes no observable result (the store is frozen between arrivals)
and is not counted as a ``sat`` hit.

Set bindings carry a kind: MONOTONE extents (sys, fixpoint results) only
ever grow between arrivals and enter cache keys as stable instance tokens;
EXTENSIONAL extents (subset enumeration) enter by exact value.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from itertools import combinations

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
from .monotonicity import MINUS, PLUS, compute_mon_map
from .oracle import SUBSET_BOUND, SubsetBoundError
from .traces import TraceStore

MONOTONE = "monotone"
EXTENSIONAL = "extensional"

_LEAVES = (K_ATOM, K_TRUE, K_FALSE)


@dataclass(frozen=True)
class SetBinding:
    kind: str
    ids: frozenset
    token: object  # hashable cache identity

    def domain(self) -> list:
        return sorted(self.ids)


def monotone_binding(token, ids) -> SetBinding:
    return SetBinding(MONOTONE, frozenset(ids), token)


def extensional_binding(ids) -> SetBinding:
    ids = frozenset(ids)
    return SetBinding(EXTENSIONAL, ids, tuple(sorted(ids)))


def enumerate_subsets(ids, bound: int = SUBSET_BOUND):
    """All subsets by cardinality then lexicographic id order."""
    ordered = sorted(ids)
    if len(ordered) > bound:
        raise SubsetBoundError(
            f"set quantification over {len(ordered)} traces exceeds the bound "
            f"{bound}; raise it with --subset-bound"
        )
    for k in range(len(ordered) + 1):
        yield from combinations(ordered, k)


@dataclass
class Toggles:
    sat: bool = True
    fix: bool = True
    wit: bool = True
    tree: bool = True

    NAMES = ("sat", "fix", "wit", "tree")

    @classmethod
    def all_off(cls) -> "Toggles":
        return cls(False, False, False, False)

    @classmethod
    def from_disabled(cls, names) -> "Toggles":
        t = cls()
        for name in names:
            name = name.strip()
            if name not in cls.NAMES:
                raise ValueError(
                    f"unknown optimization {name!r}; choose from {', '.join(cls.NAMES)}"
                )
            setattr(t, name, False)
        return t


@dataclass
class Counters:
    check_calls: int = 0
    step_checks: int = 0
    sat_hits: int = 0
    fix_seeds: int = 0
    wit_hits: int = 0

    def snapshot(self) -> "Counters":
        return replace(self)

    def delta(self, before: "Counters") -> "Counters":
        return Counters(
            **{f.name: getattr(self, f.name) - getattr(before, f.name) for f in fields(self)}
        )

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


class Evaluator:
    def __init__(self, store: TraceStore, root: Formula, *, toggles: Toggles | None = None,
                 subset_bound: int = SUBSET_BOUND, mon_map: dict | None = None):
        self.store = store
        self.root = root
        self.toggles = toggles if toggles is not None else Toggles()
        self.subset_bound = subset_bound
        self.mon_map = mon_map if mon_map is not None else compute_mon_map(root)
        self.counters = Counters()
        self.h_sat: dict = {}   # key -> (bool, store version)
        self.h_fix: dict = {}   # fix instance token -> frozenset of ids
        self.h_wit: dict = {}   # key -> trace id that decided last time

    # -- context plumbing ---------------------------------------------------

    def sys_delta(self) -> dict:
        return {SYS: monotone_binding(SYS, self.store.ids())}

    def check_root(self) -> bool:
        return self.check({}, self.sys_delta(), 0, self.root)

    def _key(self, node: Formula, pi: dict, delta: dict, i: int):
        return (
            node.nid,
            i,
            tuple(pi[v] for v in node.key_t),
            tuple(delta[v].token for v in node.key_s),
        )

    @property
    def _m(self) -> int:
        return self.store.m if self.store.m is not None else 1

    # -- the checker --------------------------------------------------------

    def check(self, pi: dict, delta: dict, i: int, node: Formula) -> bool:
        self.counters.check_calls += 1
        kind = node.KIND
        key = None
        if kind not in _LEAVES:
            key = self._key(node, pi, delta, i)
            hit = self.h_sat.get(key)
            if hit is not None:
                val, version = hit
                if version == self.store.version:
                    return val
                if self.toggles.sat:
                    marks = self.mon_map[node.nid]
                    if val and PLUS in marks:
                        self.counters.sat_hits += 1
                        return True
                    if not val and MINUS in marks:
                        self.counters.sat_hits += 1
                        return False
        res = self._eval(pi, delta, i, node, kind)
        if key is not None:
            self.h_sat[key] = (res, self.store.version)
        return res

    def _eval(self, pi, delta, i, node, kind) -> bool:
        if kind == K_ATOM:
            return node.ap in self.store.get(pi[node.var])[i]
        if kind == K_TRUE:
            return True
        if kind == K_FALSE:
            return False
        if kind == K_NOT:
            return not self.check(pi, delta, i, node.child)
        if kind == K_AND:
            return self.check(pi, delta, i, node.left) and self.check(
                pi, delta, i, node.right
            )
        if kind == K_NEXT:
            return i < self._m - 1 and self.check(pi, delta, i + 1, node.child)
        if kind == K_PREV:
            return i > 0 and self.check(pi, delta, i - 1, node.child)
        if kind == K_UNTIL:
            for j in range(i, self._m):
                if self.check(pi, delta, j, node.right):
                    return True
                if not self.check(pi, delta, j, node.left):
                    return False
            return False
        if kind == K_SINCE:
            for j in range(i, -1, -1):
                if self.check(pi, delta, j, node.right):
                    return True
                if not self.check(pi, delta, j, node.left):
                    return False
            return False
        if kind == K_TQUANT:
            return self._quantify(pi, delta, i, node)
        if kind == K_SQUANT:
            any_mode = node.exists
            for combo in enumerate_subsets(self.store.ids(), self.subset_bound):
                bound = {**delta, node.var: extensional_binding(combo)}
                if self.check(pi, bound, i, node.body) == any_mode:
                    return any_mode
            return not any_mode
        if kind == K_FIX:
            sol = self.compute_fix(pi, delta, i, node)
            token = self._key(node, pi, delta, i)
            bound = {**delta, node.var: monotone_binding(token, sol)}
            return self.check(pi, bound, i, node.body)
        raise ValueError(f"cannot evaluate node kind {kind}")

    def _quantify(self, pi, delta, i, node) -> bool:
        domain = delta[node.set_var].domain()
        want = node.exists  # body value that decides immediately
        if self.toggles.tree and not node.has_past:
            chosen = []
            domset = set(domain)
            for group in self.store.suffix_classes(i):
                members = [t for t in group if t in domset]
                if members:
                    chosen.append(members[0])
            domain = chosen
        key = wit = None
        if self.toggles.wit:
            key = self._key(node, pi, delta, i)
            wit = self.h_wit.get(key)
            if wit is not None and wit in domain:
                domain = [wit] + [t for t in domain if t != wit]
            else:
                wit = None
        for pos, t in enumerate(domain):
            if self.check({**pi, node.var: t}, delta, i, node.body) == want:
                if self.toggles.wit:
                    self.h_wit[key] = t
                    if pos == 0 and t == wit:
                        self.counters.wit_hits += 1
                return want
        return not want

    # -- fixpoints ----------------------------------------------------------

    def compute_fix(self, pi, delta, i, node) -> frozenset:
        token = self._key(node, pi, delta, i)
        sol: set = set()
        if self.toggles.fix:
            seed = self.h_fix.get(token)
            if seed is not None:
                self.counters.fix_seeds += 1
                sol = set(seed)
        changed = True
        while changed:
            changed = False
            for constraint in node.constraints:
                added = self._scan_constraint(pi, delta, i, node.var, constraint, sol)
                if added:
                    changed = True
                    break  # restart from the first constraint
        result = frozenset(sol)
        if self.toggles.fix:
            self.h_fix[token] = result
        return result

    def _scan_constraint(self, pi, delta, i, fix_var, constraint, sol) -> bool:
        """One pass; returns True as soon as one trace is added."""

        def domain(sv):
            return sorted(sol) if sv == fix_var else delta[sv].domain()

        def scan(bound, idx) -> bool:
            if idx == len(constraint.binders):
                target = bound[constraint.target]
                if target in sol:
                    return False
                self.counters.step_checks += 1
                if self.check(bound, delta, i, constraint.step):
                    sol.add(target)
                    return True
                return False
            tv, sv = constraint.binders[idx]
            for t in domain(sv):
                if scan({**bound, tv: t}, idx + 1):
                    return True
            return False

        return scan(dict(pi), 0)
