"""Concrete syntax: `.ccss` specification files and the pretty-printer.

A file contains declarations, in any order:

    signals { noti_x_true, noti_x_false }
    blocking { assign_x_true, noti_x_true }
    range Ticket = 0..4
    Agent[i] = act[i].Agent[i]
    system = (Agent[0] | Agent[1]) \\ {act[0]}

Binding strength, strongest first: restriction / relabelling / signalling,
prefixing, parallel composition, choice.  Output actions are written with
a leading apostrophe ('a); whether a plain name is a handshake or a signal
read is decided by the `signals` declaration.  `#` starts a line comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ParseError, ScopeError
from .terms import (
    Action, BoolOp, Cmp, Environment, Name, Relabelling, Term, TAU, Var,
    Ident, IndexedSum, NIL, Par, Prefix, Restrict, Relabel, SignalEmit, Sum,
    mk_sum, SIGNAL, HANDSHAKE, COHANDSHAKE,
)

KEYWORDS = {"sum", "in", "when", "tau", "signals", "blocking", "range",
            "system", "and", "or"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>\.\.|!=|<=|>=|[-.'+|\\{}\[\]()^/,=<>_])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "int" | "ident" | "op" | "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str):
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass
class SpecFile:
    env: Environment
    root: Term
    ranges: dict = field(default_factory=dict)  # name -> (lo, hi)


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.signals = set()
        self.blocking = set()
        self.ranges = {}
        self.equations = []
        self.root = None

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok.text == text and tok.kind in ("op", "ident")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.text != text or tok.kind == "eof":
            raise ParseError(f"expected {text!r}, found {tok.text!r}",
                             tok.line, tok.col)
        return self.next()

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident" or tok.text in KEYWORDS:
            raise ParseError(f"expected identifier, found {tok.text!r}",
                             tok.line, tok.col)
        return self.next()

    def error(self, message: str):
        tok = self.peek()
        raise ParseError(message, tok.line, tok.col)

    # -- file structure ------------------------------------------------------

    def parse_file(self) -> SpecFile:
        while self.peek().kind != "eof":
            self.declaration()
        if self.root is None:
            self.error("missing `system = <process>` declaration")
        env = Environment(self.equations, self.signals, self.blocking)
        return SpecFile(env, self.root, dict(self.ranges))

    def declaration(self):
        if self.accept("signals"):
            self.signals |= self.ident_set()
        elif self.accept("blocking"):
            self.blocking |= self.ident_set()
        elif self.accept("range"):
            name = self.expect_ident().text
            self.expect("=")
            lo = self.int_literal()
            self.expect("..")
            hi = self.int_literal()
            self.ranges[name] = (lo, hi)
        elif self.accept("system"):
            if self.root is not None:
                self.error("duplicate `system` declaration")
            self.expect("=")
            self.root = self.proc(frozenset())
        else:
            tok = self.peek()
            if tok.kind != "ident":
                self.error("expected a declaration")
            name, scope = self.equation_lhs()
            self.expect("=")
            body = self.proc(scope)
            self.equations.append((name, body))

    def ident_set(self):
        self.expect("{")
        names = set()
        if not self.at("}"):
            names.add(self.expect_ident().text)
            while self.accept(","):
                names.add(self.expect_ident().text)
        self.expect("}")
        return names

    def int_literal(self) -> int:
        neg = self.accept("-")
        tok = self.peek()
        if tok.kind != "int":
            self.error("expected an integer")
        self.next()
        return -int(tok.text) if neg else int(tok.text)

    def equation_lhs(self):
        base = self.expect_ident().text
        params = []
        scope = set()
        if self.at("["):
            params.append(self.param_bracketed(frozenset(), binding_ok=scope))
            while self.accept("_"):
                params.append(self.param_tail(frozenset(), binding_ok=scope))
        return Name(base, tuple(params)), frozenset(scope)

    # -- processes -----------------------------------------------------------

    def proc(self, scope) -> Term:
        if self.accept("sum"):
            var = self.expect_ident().text
            self.expect("in")
            lo, hi = self.range_expr()
            guard = None
            inner = scope | {var}
            if self.accept("when"):
                guard = self.guard(inner)
            self.expect(".")
            body = self.par(inner)
            return IndexedSum(var, lo, hi, guard, body)
        term = self.par(scope)
        if self.at("+"):
            branches = [term]
            while self.accept("+"):
                branches.append(self.par(scope))
            return Sum(tuple(branches))
        return term

    def range_expr(self):
        tok = self.peek()
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.next()
            if tok.text not in self.ranges:
                raise ScopeError(f"unknown range {tok.text!r} at line {tok.line}")
            return self.ranges[tok.text]
        lo = self.int_literal()
        self.expect("..")
        hi = self.int_literal()
        return lo, hi

    def par(self, scope) -> Term:
        term = self.prefixed(scope)
        while self.accept("|"):
            term = Par(term, self.prefixed(scope))
        return term

    def prefixed(self, scope) -> Term:
        actions = []
        while True:
            action = self.try_action(scope)
            if action is None:
                break
            actions.append(action)
        term = self.postfixed(scope)
        for a in reversed(actions):
            term = Prefix(a, term)
        return term

    def try_action(self, scope):
        """An action followed by '.', or None (position restored)."""
        start = self.i
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "tau":
            self.next()
            if self.accept("."):
                return TAU
            self.i = start
            return None
        if self.at("'"):
            self.next()
            name = self.name(scope)
            self.expect(".")
            if name.base in self.signals:
                self.error(f"signal {name.base} has no output action")
            return Action(COHANDSHAKE, name)
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            try:
                name = self.name(scope)
            except (ParseError, ScopeError):
                self.i = start
                return None
            if self.accept("."):
                kind = SIGNAL if name.base in self.signals else HANDSHAKE
                return Action(kind, name)
            self.i = start
            return None
        return None

    def postfixed(self, scope) -> Term:
        term = self.atom(scope)
        while True:
            if self.accept("\\"):
                term = Restrict(term, frozenset(self.name_set(scope)))
            elif self.accept("["):
                term = Relabel(term, self.rename_list(scope))
            elif self.accept("^"):
                term = SignalEmit(term, self.name(scope))
            else:
                return term

    def atom(self, scope) -> Term:
        tok = self.peek()
        if tok.kind == "int" and tok.text == "0":
            self.next()
            return NIL
        if self.accept("("):
            term = self.proc(scope)
            self.expect(")")
            return term
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            # "A[1]" is an indexed identifier, but "A[b/a]" is a relabelling
            # of A: try to read parameters and back off if that fails.
            start = self.i
            try:
                return Ident(self.name(scope))
            except (ParseError, ScopeError):
                self.i = start
                return Ident(Name(self.expect_ident().text))
        self.error("expected a process")

    def name_set(self, scope):
        self.expect("{")
        names = []
        if not self.at("}"):
            names.append(self.name(scope))
            while self.accept(","):
                names.append(self.name(scope))
        self.expect("}")
        return names

    def rename_list(self, scope) -> Relabelling:
        handshake, signal = [], []
        if self.accept("]"):
            return Relabelling.make()  # identity relabelling
        while True:
            new = self.name(scope)
            self.expect("/")
            old = self.name(scope)
            if old.base in self.signals or new.base in self.signals:
                signal.append((old, new))
            else:
                handshake.append((old, new))
            if not self.accept(","):
                break
        self.expect("]")
        return Relabelling.make(handshake, signal)

    # -- names, parameters and guards -----------------------------------------

    def name(self, scope) -> Name:
        base = self.expect_ident().text
        params = []
        if self.at("["):
            params.append(self.param_bracketed(scope))
            while self.accept("_"):
                params.append(self.param_tail(scope))
        return Name(base, tuple(params))

    def param_bracketed(self, scope, binding_ok=None):
        self.expect("[")
        value = self.intexpr(scope, binding_ok)
        self.expect("]")
        return value

    def param_tail(self, scope, binding_ok=None):
        """Parameter after '_': an integer, a variable, or (expr)."""
        if self.accept("("):
            value = self.intexpr(scope, binding_ok)
            self.expect(")")
            return value
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return int(tok.text)
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            return self.variable(self.next(), scope, binding_ok)
        self.error("expected a parameter")

    def intexpr(self, scope, binding_ok=None):
        tok = self.peek()
        if tok.kind == "int" or self.at("-"):
            return self.int_literal()
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            var = self.variable(self.next(), scope, binding_ok)
            if self.accept("+"):
                return Var(var.var, self.int_literal())
            if self.accept("-"):
                return Var(var.var, -self.int_literal())
            return var
        self.error("expected an index expression")

    def variable(self, tok: Token, scope, binding_ok) -> Var:
        if binding_ok is not None:
            binding_ok.add(tok.text)
            return Var(tok.text)
        if tok.text not in scope:
            raise ScopeError(
                f"unbound index variable {tok.text!r} at line {tok.line}")
        return Var(tok.text)

    def guard(self, scope):
        left = self.guard_conj(scope)
        while self.accept("or"):
            left = BoolOp("or", left, self.guard_conj(scope))
        return left

    def guard_conj(self, scope):
        left = self.guard_atom(scope)
        while self.accept("and"):
            left = BoolOp("and", left, self.guard_atom(scope))
        return left

    def guard_atom(self, scope):
        if self.accept("("):
            g = self.guard(scope)
            self.expect(")")
            return g
        lhs = self.intexpr(scope)
        for op in ("!=", "<=", ">=", "=", "<", ">"):
            if self.accept(op):
                return Cmp(op, lhs, self.intexpr(scope))
        self.error("expected a comparison operator")


def parse(text) -> SpecFile:
    """Parse a full specification file (str or UTF-8 bytes)."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    return _Parser(text).parse_file()


def parse_term(text, signals=(), ranges=None, scope=frozenset()) -> Term:
    """Parse a bare process expression."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    p = _Parser(text)
    p.signals = set(signals)
    p.ranges = dict(ranges or {})
    term = p.proc(frozenset(scope))
    tok = p.peek()
    if tok.kind != "eof":
        raise ParseError(f"trailing input {tok.text!r}", tok.line, tok.col)
    return term


# --------------------------------------------------------------------------
# pretty-printer

_PREC_SUM, _PREC_PAR, _PREC_PREFIX, _PREC_POST = 0, 1, 2, 3


def _param_str(p, tail: bool) -> str:
    if isinstance(p, Var):
        if p.offset:
            return f"({p})" if tail else f"[{p}]"
        return f"_{p.var}" if tail else f"[{p.var}]"
    if isinstance(p, int) and (p >= 0 or not tail):
        return f"_{p}" if tail else f"[{p}]"
    return f"({p})" if tail else f"[{p}]"


def name_str(name: Name) -> str:
    out = name.base
    for i, p in enumerate(name.params):
        out += _param_str(p, tail=i > 0)
    return out


def action_str(action: Action) -> str:
    if action.is_tau:
        return "tau"
    prefix = "'" if action.kind == COHANDSHAKE else ""
    return prefix + name_str(action.name)


def term_str(term: Term, prec: int = _PREC_SUM) -> str:
    if isinstance(term, type(NIL)):
        return "0"
    if isinstance(term, Ident):
        return name_str(term.name)
    if isinstance(term, Prefix):
        parts = []
        while isinstance(term, Prefix):
            parts.append(action_str(term.action))
            term = term.body
        text = ".".join(parts) + "." + term_str(term, _PREC_POST)
        return _wrap(text, _PREC_PREFIX, prec)
    if isinstance(term, Sum):
        text = " + ".join(term_str(b, _PREC_PAR) for b in term.branches)
        return _wrap(text, _PREC_SUM, prec)
    if isinstance(term, IndexedSum):
        guard = f" when {term.guard}" if term.guard is not None else ""
        text = (f"sum {term.var} in {term.lo}..{term.hi}{guard} . "
                + term_str(term.body, _PREC_PAR))
        return _wrap(text, _PREC_SUM, prec)
    if isinstance(term, Par):
        text = (term_str(term.left, _PREC_PAR) + " | "
                + term_str(term.right, _PREC_PREFIX))
        return _wrap(text, _PREC_PAR, prec)
    if isinstance(term, Restrict):
        names = ", ".join(sorted(name_str(n) for n in term.names))
        return term_str(term.body, _PREC_POST) + " \\ {" + names + "}"
    if isinstance(term, Relabel):
        f = term.relabelling
        pairs = [f"{name_str(new)}/{name_str(old)}"
                 for old, new in f.handshake_map + f.signal_map]
        body = term_str(term.body, _PREC_POST)
        if isinstance(term.body, SignalEmit):
            # '^ s[...]' would read the bracket as a parameter of s
            body = f"({body})"
        return body + "[" + ", ".join(pairs) + "]"
    if isinstance(term, SignalEmit):
        return (term_str(term.body, _PREC_POST) + " ^ "
                + name_str(term.signal))
    raise TypeError(f"not a term: {term!r}")


def _wrap(text: str, level: int, required: int) -> str:
    return f"({text})" if level < required else text


def spec_str(spec: SpecFile) -> str:
    env = spec.env
    lines = []
    if env.declared_signals:
        lines.append("signals { " + ", ".join(sorted(env.declared_signals)) + " }")
    if env.blocking:
        lines.append("blocking { " + ", ".join(sorted(env.blocking)) + " }")
    for rname, (lo, hi) in sorted(spec.ranges.items()):
        lines.append(f"range {rname} = {lo}..{hi}")
    for name, body in env.order:
        lines.append(f"{name_str(name)} = {term_str(body)}")
    lines.append(f"system = {term_str(spec.root)}")
    return "\n".join(lines) + "\n"
