"""Concrete syntax: lexer, parser, desugaring, well-formedness checks.

Grammar (whitespace insignificant)::

    phi    := "true" | "false" | AP "[" TV "]"
            | "!" phi | "(" phi ")"
            | phi ("&" | "|" | "->" | "<->") phi
            | ("X" | "P" | "F" | "G" | "O" | "H") phi
            | phi ("U" | "S") phi
            | ("forall" | "exists") TV "in" SV "." phi
            | ("forall" | "exists") SV "." phi
            | "fix" "(" SV "," constr {"," constr} ")" "." phi
            | TV "==" TV | TV "!=" TV
    constr := {"forall" TV "in" SV "."} phi "=>" TV "in" SV

Precedence, tightest first: unary; U, S (right associative); "&"; "|";
"->" (right); "<->".  Quantifier and fix bodies extend maximally to the
right.  The single letters X P F G O H U S act as operators in formula
position and are therefore unavailable as AP or trace-variable names; they
remain fine as set-variable names (binder positions are unambiguous).
``sys`` is the reserved name of the full trace set and can never be bound.

The parser renames duplicate binders so that binder names are globally
unique afterwards (fresh names ``base_2``, ``base_3``, ... avoiding every
identifier present in the input).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .formulas import (
    And,
    Atom,
    FalseConst,
    Fix,
    FixConstraint,
    Formula,
    Iff,
    Implies,
    Historically,
    Eventually,
    Globally,
    Not,
    Next,
    Once,
    Or,
    Prev,
    SetQuant,
    Since,
    SYS,
    TraceEq,
    TraceQuant,
    TrueConst,
    Until,
    finalize,
    walk,
    K_ATOM,
    K_FIX,
    K_SQUANT,
    K_TQUANT,
    K_TRACE_EQ,
)


class FormulaSyntaxError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        if line:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class DesugarError(Exception):
    pass


class WellFormednessError(Exception):
    def __init__(self, diagnostics: list[str]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(diagnostics))


UNARY_LETTERS = {"X": Next, "P": Prev, "F": Eventually, "G": Globally, "O": Once, "H": Historically}
BINARY_LETTERS = {"U": Until, "S": Since}
KEYWORDS = {"forall", "exists", "in", "fix", "true", "false"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><->|->|=>|==|!=|[()\[\].,&|!])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str  # "ident", "op", "eof"
    value: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        if m.lastgroup == "ws":
            nl = m.group().count("\n")
            if nl:
                line += nl
                line_start = m.start() + m.group().rindex("\n") + 1
        else:
            tokens.append(Token(m.lastgroup, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        shown = tok.value or "end of input"
        raise FormulaSyntaxError(f"{message}, found {shown!r}", tok.line, tok.col)

    def expect_op(self, op: str) -> Token:
        tok = self.next()
        if tok.kind != "op" or tok.value != op:
            self.error(f"expected {op!r}", tok)
        return tok

    def expect_name(self, what: str) -> str:
        tok = self.next()
        if tok.kind != "ident" or tok.value in KEYWORDS:
            self.error(f"expected {what}", tok)
        return tok.value

    def expect_keyword(self, kw: str):
        tok = self.next()
        if tok.kind != "ident" or tok.value != kw:
            self.error(f"expected {kw!r}", tok)

    def expect_binder_name(self, what: str) -> str:
        tok = self.peek()
        name = self.expect_name(what)
        if name == SYS:
            raise FormulaSyntaxError(
                f"reserved name {SYS!r} cannot be bound", tok.line, tok.col
            )
        return name

    def check_trace_name(self, name: str, tok) -> None:
        # operator letters stay available for set variables only
        if name in UNARY_LETTERS or name in BINARY_LETTERS:
            raise FormulaSyntaxError(
                f"operator letter {name!r} cannot name a trace variable",
                tok.line, tok.col,
            )

    # Levels: 1 <->, 2 ->, 3 |, 4 &, 5 U/S, then unary and primaries.
    def parse(self) -> Formula:
        phi = self.parse_level(1)
        tok = self.peek()
        if tok.kind != "eof":
            self.error("trailing input after formula", tok)
        return phi

    def parse_level(self, level: int) -> Formula:
        if level == 5:
            lhs = self.parse_unary()
            tok = self.peek()
            if tok.kind == "ident" and tok.value in BINARY_LETTERS:
                self.next()
                rhs = self.parse_level(5)  # right associative
                return BINARY_LETTERS[tok.value](lhs, rhs)
            return lhs
        lhs = self.parse_level(level + 1)
        while True:
            tok = self.peek()
            if tok.kind != "op":
                return lhs
            if level == 1 and tok.value == "<->":
                self.next()
                lhs = Iff(lhs, self.parse_level(2))
            elif level == 2 and tok.value == "->":
                self.next()
                return Implies(lhs, self.parse_level(2))  # right associative
            elif level == 3 and tok.value == "|":
                self.next()
                lhs = Or(lhs, self.parse_level(4))
            elif level == 4 and tok.value == "&":
                self.next()
                lhs = And(lhs, self.parse_level(5))
            else:
                return lhs

    def parse_unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "op" and tok.value == "!":
            self.next()
            return Not(self.parse_unary())
        if tok.kind == "ident" and tok.value in UNARY_LETTERS:
            self.next()
            return UNARY_LETTERS[tok.value](self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "op" and tok.value == "(":
            self.next()
            phi = self.parse_level(1)
            self.expect_op(")")
            return phi
        if tok.kind == "ident":
            if tok.value == "true":
                self.next()
                return TrueConst()
            if tok.value == "false":
                self.next()
                return FalseConst()
            if tok.value in ("forall", "exists"):
                return self.parse_quantifier()
            if tok.value == "fix":
                return self.parse_fix()
            if tok.value in KEYWORDS:
                self.error("expected a formula", tok)
            follow = self.peek(1)
            if follow.kind == "op" and follow.value == "[":
                self.next()
                self.next()
                var = self.expect_name("trace variable")
                self.expect_op("]")
                return Atom(tok.value, var)
            if follow.kind == "op" and follow.value in ("==", "!="):
                self.next()
                self.next()
                right = self.expect_name("trace variable")
                return TraceEq(tok.value, right, negated=follow.value == "!=")
        self.error("expected a formula", tok)

    def parse_quantifier(self) -> Formula:
        exists = self.next().value == "exists"
        var_tok = self.peek()
        var = self.expect_binder_name("variable")
        tok = self.peek()
        if tok.kind == "ident" and tok.value == "in":
            self.check_trace_name(var, var_tok)
            self.next()
            set_var = self.expect_name("set variable")
            self.expect_op(".")
            return TraceQuant(exists, var, set_var, self.parse_level(1))
        self.expect_op(".")
        return SetQuant(exists, var, self.parse_level(1))

    def parse_fix(self) -> Formula:
        self.next()
        self.expect_op("(")
        var = self.expect_binder_name("set variable")
        self.expect_op(",")
        constraints = [self.parse_constraint()]
        while self.peek().kind == "op" and self.peek().value == ",":
            self.next()
            constraints.append(self.parse_constraint())
        self.expect_op(")")
        self.expect_op(".")
        return Fix(var, tuple(constraints), self.parse_level(1))

    def parse_constraint(self) -> FixConstraint:
        binders = []
        while self.peek().kind == "ident" and self.peek().value == "forall":
            self.next()
            tv_tok = self.peek()
            tv = self.expect_binder_name("trace variable")
            self.check_trace_name(tv, tv_tok)
            self.expect_keyword("in")
            sv = self.expect_name("set variable")
            self.expect_op(".")
            binders.append((tv, sv))
        step = self.parse_level(1)
        self.expect_op("=>")
        target = self.expect_name("trace variable")
        self.expect_keyword("in")
        target_set = self.expect_name("set variable")
        return FixConstraint(tuple(binders), step, target, target_set)


def parse(text: str) -> Formula:
    """Parse surface text; binder names come out globally unique."""
    phi = _Parser(tokenize(text)).parse()
    _alpha_rename(phi)
    return phi


def _collect_names(root: Formula) -> set[str]:
    names = set()
    for n in walk(root):
        kind = n.KIND
        if kind == K_ATOM:
            names.update((n.ap, n.var))
        elif kind == K_TRACE_EQ:
            names.update((n.left, n.right))
        elif kind == K_TQUANT:
            names.update((n.var, n.set_var))
        elif kind == K_SQUANT:
            names.add(n.var)
        elif kind == K_FIX:
            names.add(n.var)
            for c in n.constraints:
                for tv, sv in c.binders:
                    names.update((tv, sv))
                names.update((c.target, c.target_set))
    return names


def _alpha_rename(root: Formula) -> None:
    """Make every binder name unique in place (trace and set namespaces)."""
    taken = _collect_names(root)
    seen_t: set[str] = set()
    seen_s: set[str] = set()

    def fresh(base: str) -> str:
        k = 2
        while f"{base}_{k}" in taken:
            k += 1
        name = f"{base}_{k}"
        taken.add(name)
        return name

    def bind(name: str, seen: set[str]) -> str:
        new = fresh(name) if name in seen else name
        seen.add(new)
        return new

    def visit(n: Formula, env_t: dict, env_s: dict) -> None:
        kind = n.KIND
        if kind == K_ATOM:
            n.var = env_t.get(n.var, n.var)
        elif kind == K_TRACE_EQ:
            n.left = env_t.get(n.left, n.left)
            n.right = env_t.get(n.right, n.right)
        elif kind == K_TQUANT:
            n.set_var = env_s.get(n.set_var, n.set_var)
            new = bind(n.var, seen_t)
            visit(n.body, {**env_t, n.var: new}, env_s)
            n.var = new
        elif kind == K_SQUANT:
            new = bind(n.var, seen_s)
            visit(n.body, env_t, {**env_s, n.var: new})
            n.var = new
        elif kind == K_FIX:
            new = bind(n.var, seen_s)
            inner_s = {**env_s, n.var: new}
            for c in n.constraints:
                step_t = dict(env_t)
                new_binders = []
                for tv, sv in c.binders:
                    ntv = bind(tv, seen_t)
                    step_t[tv] = ntv
                    new_binders.append((ntv, inner_s.get(sv, sv)))
                visit(c.step, step_t, inner_s)
                c.binders = tuple(new_binders)
                c.target = step_t.get(c.target, c.target)
                c.target_set = inner_s.get(c.target_set, c.target_set)
            visit(n.body, env_t, inner_s)
            n.var = new
        else:
            for child in n.children():
                visit(child, env_t, env_s)

    visit(root, {}, {})


# ---------------------------------------------------------------------------
# Desugaring to the core connectives.


def desugar(root: Formula, aps=None) -> Formula:
    """Rewrite derived forms into the core, returning a fresh tree.

    ``aps`` is the declared AP universe; it feeds the expansions of ``true``,
    ``false`` and trace (in)equality.  With a trace variable in scope and a
    nonempty universe, ``true`` becomes ``a | !a`` over the lexicographically
    least AP and the innermost such variable; with no variable in scope (or no
    universe) the dedicated constants remain, which evaluate identically.
    Trace equality has no such fallback and needs a nonempty universe.
    """
    universe = tuple(sorted(set(aps))) if aps else ()

    def core_or(a: Formula, b: Formula) -> Formula:
        return Not(And(Not(a), Not(b)))

    def core_iff(a: Formula, b: Formula) -> Formula:
        return And(core_or(Not(a), b), core_or(Not(b), a))

    def true_exp(scope: tuple) -> Formula:
        if scope and universe:
            a, v = universe[0], scope[-1]
            return core_or(Atom(a, v), Not(Atom(a, v)))
        return TrueConst()

    def false_exp(scope: tuple) -> Formula:
        if scope and universe:
            a, v = universe[0], scope[-1]
            return And(Atom(a, v), Not(Atom(a, v)))
        return FalseConst()

    def neq_exp(n: TraceEq) -> Formula:
        if not universe:
            raise DesugarError(
                f"{n.left} != {n.right} needs a declared AP universe to expand"
            )
        diffs = [Not(core_iff(Atom(a, n.left), Atom(a, n.right))) for a in universe]
        acc = diffs[0]
        for d in diffs[1:]:
            acc = core_or(acc, d)
        return Until(true_exp((n.left, n.right)), acc)

    def ds(n: Formula, scope: tuple) -> Formula:
        kind = n.KIND
        if kind == K_ATOM:
            return Atom(n.ap, n.var)
        if n.KIND == K_TRACE_EQ:
            exp = neq_exp(n)
            return exp if n.negated else Not(exp)
        cls = type(n)
        if cls is TrueConst:
            return true_exp(scope)
        if cls is FalseConst:
            return false_exp(scope)
        if cls is Not:
            return Not(ds(n.child, scope))
        if cls is And:
            return And(ds(n.left, scope), ds(n.right, scope))
        if cls is Or:
            return core_or(ds(n.left, scope), ds(n.right, scope))
        if cls is Implies:
            return core_or(Not(ds(n.left, scope)), ds(n.right, scope))
        if cls is Iff:
            return core_iff(ds(n.left, scope), ds(n.right, scope))
        if cls is Next:
            return Next(ds(n.child, scope))
        if cls is Prev:
            return Prev(ds(n.child, scope))
        if cls is Until:
            return Until(ds(n.left, scope), ds(n.right, scope))
        if cls is Since:
            return Since(ds(n.left, scope), ds(n.right, scope))
        if cls is Eventually:
            return Until(true_exp(scope), ds(n.child, scope))
        if cls is Globally:
            return Not(Until(true_exp(scope), Not(ds(n.child, scope))))
        if cls is Once:
            return Since(true_exp(scope), ds(n.child, scope))
        if cls is Historically:
            return Not(Since(true_exp(scope), Not(ds(n.child, scope))))
        if cls is TraceQuant:
            return TraceQuant(n.exists, n.var, n.set_var, ds(n.body, scope + (n.var,)))
        if cls is SetQuant:
            return SetQuant(n.exists, n.var, ds(n.body, scope))
        if cls is Fix:
            constraints = []
            for c in n.constraints:
                step_scope = scope + tuple(tv for tv, _ in c.binders)
                constraints.append(
                    FixConstraint(c.binders, ds(c.step, step_scope), c.target, c.target_set)
                )
            return Fix(n.var, tuple(constraints), ds(n.body, scope))
        raise AssertionError(f"cannot desugar node kind {kind}")

    return ds(root, ())


# ---------------------------------------------------------------------------
# Well-formedness.  Runs on finalized core formulas and returns every
# violation, not just the first.


def check_well_formed(root: Formula) -> list[str]:
    diags: list[str] = []

    def visit(n: Formula, tvars: frozenset, svars: frozenset) -> None:
        kind = n.KIND
        if kind >= 20:
            diags.append(f"node {n.nid}: derived connective survived desugaring")
            return
        if kind == K_ATOM:
            if n.var not in tvars:
                diags.append(f"node {n.nid}: unbound trace variable {n.var!r}")
        elif kind == K_TQUANT:
            if n.set_var != SYS and n.set_var not in svars:
                diags.append(f"node {n.nid}: unbound set variable {n.set_var!r}")
            if n.var == SYS:
                diags.append(f"node {n.nid}: reserved name {SYS!r} bound")
            visit(n.body, tvars | {n.var}, svars)
        elif kind == K_SQUANT:
            if n.var == SYS:
                diags.append(f"node {n.nid}: reserved name {SYS!r} bound")
            visit(n.body, tvars, svars | {n.var})
        elif kind == K_FIX:
            if n.var == SYS:
                diags.append(f"node {n.nid}: reserved name {SYS!r} bound")
            inner = svars | {n.var}
            for idx, c in enumerate(n.constraints):
                binder_tvars = set()
                for tv, sv in c.binders:
                    binder_tvars.add(tv)
                    if sv != SYS and sv not in inner:
                        diags.append(
                            f"node {n.nid}: constraint {idx}: binder set {sv!r} "
                            f"not bound outside and not the fix variable (rule 2)"
                        )
                loose = c.step.free_t - tvars - binder_tvars
                if loose:
                    diags.append(
                        f"node {n.nid}: constraint {idx}: step uses trace "
                        f"variable(s) {sorted(loose)} not bound outside or by a "
                        f"binder (rule 1)"
                    )
                if c.target not in tvars and c.target not in binder_tvars:
                    diags.append(
                        f"node {n.nid}: constraint {idx}: target {c.target!r} "
                        f"not bound outside and not a binder (rule 3)"
                    )
                if c.target_set != n.var:
                    diags.append(
                        f"node {n.nid}: constraint {idx}: target set "
                        f"{c.target_set!r} is not the fix variable {n.var!r}"
                    )
                for sub in walk(c.step):
                    if sub.KIND >= 20:
                        diags.append(
                            f"node {sub.nid}: derived connective survived desugaring"
                        )
                    elif sub.KIND in (K_TQUANT, K_SQUANT, K_FIX):
                        diags.append(
                            f"node {n.nid}: constraint {idx}: step contains a "
                            f"quantifier or fix"
                        )
            visit(n.body, tvars, inner)
        else:
            for child in n.children():
                visit(child, tvars, svars)

    visit(root, frozenset(), frozenset())
    return diags


def compile_formula(text: str, aps=None) -> Formula:
    """Parse, desugar, finalize, and validate; raises on any failure."""
    core = finalize(desugar(parse(text), aps))
    diags = check_well_formed(core)
    if diags:
        raise WellFormednessError(diags)
    return core
