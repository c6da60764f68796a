"""Deterministic random closed-term generation for property tests.

Terms are recursion-free (no agent identifiers), at most DEPTH levels deep,
over a small handshake alphabet and signal alphabet, so that every
generated system has a finite state space that explores in milliseconds.
"""

from __future__ import annotations

import random

from ccss.terms import (
    Action, Environment, Name, Nil, NIL, Par, Prefix, Relabel, Relabelling,
    Restrict, SignalEmit, Sum, TAU, act, coact, sig,
)

HANDSHAKES = ("a", "b", "c", "d")
SIGNALS = ("s", "t")
DEPTH = 5


def make_env(blocking=HANDSHAKES + SIGNALS) -> Environment:
    return Environment((), signals=SIGNALS, blocking=blocking)


ENV = make_env()


def random_action(rng: random.Random, alphabet, signals) -> Action:
    roll = rng.random()
    if roll < 0.35:
        return act(rng.choice(alphabet))
    if roll < 0.65:
        return coact(rng.choice(alphabet))
    if signals and roll < 0.85:
        return sig(rng.choice(signals))
    return TAU


def random_term(rng: random.Random, depth: int = DEPTH,
                alphabet=HANDSHAKES, signals=SIGNALS):
    """A closed term; `depth` bounds the operator nesting."""
    if depth == 0:
        return NIL if rng.random() < 0.5 else Prefix(
            random_action(rng, alphabet, signals), NIL)
    op = rng.choices(
        ("nil", "prefix", "sum", "par", "restrict", "relabel", "emit"),
        weights=(1, 5, 3, 3, 2, 2, 2))[0]
    if op == "nil":
        return NIL
    if op == "prefix":
        return Prefix(random_action(rng, alphabet, signals),
                      random_term(rng, depth - 1, alphabet, signals))
    if op == "sum":
        return Sum((random_term(rng, depth - 1, alphabet, signals),
                    random_term(rng, depth - 1, alphabet, signals)))
    if op == "par":
        return Par(random_term(rng, depth - 1, alphabet, signals),
                   random_term(rng, depth - 1, alphabet, signals))
    if op == "restrict":
        chosen = rng.sample(alphabet, rng.randint(1, min(2, len(alphabet))))
        return Restrict(random_term(rng, depth - 1, alphabet, signals),
                        frozenset(Name(n, ()) for n in chosen))
    if op == "relabel":
        image = rng.sample(alphabet, len(alphabet))
        handshake = tuple((Name(old, ()), Name(new, ()))
                          for old, new in zip(alphabet, image) if old != new)
        sig_image = rng.sample(signals, len(signals)) if signals else ()
        signal = tuple((Name(old, ()), Name(new, ()))
                       for old, new in zip(signals, sig_image) if old != new)
        return Relabel(random_term(rng, depth - 1, alphabet, signals),
                       Relabelling.make(handshake, signal))
    if signals:
        return SignalEmit(random_term(rng, depth - 1, alphabet, signals),
                          Name(rng.choice(signals), ()))
    return random_term(rng, depth - 1, alphabet, signals)


def sample_terms(count: int, seed: int = 20260826, **kwargs):
    rng = random.Random(seed)
    return [random_term(rng, **kwargs) for _ in range(count)]
