"""Concrete syntax: parser, pretty-printer, and their round trip."""

import pytest
from hypothesis import given, settings, strategies as st

from ccss.errors import ParseError, ScopeError
from ccss.terms import (
    NIL, Name, Par, Prefix, Restrict, Sum, SignalEmit, Relabel, Ident,
    IndexedSum, act, coact, sig, TAU,
)
from ccss.syntax import parse, parse_term, spec_str, term_str

from _randterms import HANDSHAKES, SIGNALS, random_term
import random


def rt(text, signals=SIGNALS):
    return parse_term(text, signals=signals)


def test_action_prefix_and_nil():
    assert rt("a.0") == Prefix(act("a"), NIL)
    assert rt("'a.0") == Prefix(coact("a"), NIL)
    assert rt("tau.0") == Prefix(TAU, NIL)
    assert rt("s.0") == Prefix(sig("s"), NIL)


def test_precedence_prefix_binds_tighter_than_par_than_sum():
    term = rt("a.0 | b.0 + c.0")
    assert isinstance(term, Sum)
    assert isinstance(term.branches[0], Par)


def test_postfix_operators_bind_tightest():
    # postfix applies to the nearest subterm: a.0 ^ s is a.(0 ^ s)
    term = rt("a.0 ^ s")
    assert isinstance(term, Prefix)
    assert isinstance(term.body, SignalEmit)
    outer = rt("(a.0) ^ s")
    assert isinstance(outer, SignalEmit)
    inner = rt("(a.0) \\ {b} [c/b]")
    assert isinstance(inner, Relabel)
    assert isinstance(inner.body, Restrict)


def test_indexed_sum_with_guard():
    term = rt("sum k in 1..3 when k != 2 . pick_k.0")
    assert isinstance(term, IndexedSum)
    assert (term.var, term.lo, term.hi) == ("k", 1, 3)


def test_parameter_syntax_bracketed_head_and_underscore_tail():
    term = rt("get[1]_2.0")
    assert term == Prefix(act("get", 1, 2), NIL)


def test_identifier_with_parameters_vs_relabelling():
    spec = parse("""
A[1] = a.0
system = A[1] | (a.0)[b/a]
""")
    par = spec.root
    assert isinstance(par.left, Ident)
    assert isinstance(par.right, Relabel)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as exc:
        parse("system = a..0\n")
    assert exc.value.line == 1
    assert exc.value.column > 0


def test_unknown_range_identifier_is_a_scope_error():
    with pytest.raises((ScopeError, ParseError)):
        parse_term("sum k in N . a_k.0", signals=())


def test_full_file_round_trip_is_stable():
    source = """\
signals { s }
blocking { a }
range N = 1..2
A[k] = a[k].A[k+1] + s.0
system = (A[1] | 'a[1].0 ^ s) \\ {a}
"""
    spec = parse(source)
    printed = spec_str(spec)
    assert spec_str(parse(printed)) == printed


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_term_round_trip(seed):
    term = random_term(random.Random(seed))
    text = term_str(term)
    assert parse_term(text, signals=SIGNALS) == term


def test_printer_inserts_parentheses_only_where_needed():
    term = Par(Sum((Prefix(act("a"), NIL), Prefix(act("b"), NIL))),
               Prefix(act("c"), NIL))
    text = term_str(term)
    assert parse_term(text, signals=()) == term
    assert text.count("(") == 1
