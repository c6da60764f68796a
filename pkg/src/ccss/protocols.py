"""Generators for the bundled mutual-exclusion models.

Each generator produces the model both as `.ccss` source text and as a
parsed, validated `ProtocolModel` with role metadata: which action marks
a process leaving its noncritical section, which one marks entry into
the critical section, and which leaf subterms count as "pending"
(noncritical section left, critical section not yet reached) or as
occupying the critical section.  Shared variables come in two flavors:
`ccs` variables answer reads by handshake, `ccss` variables emit their
value as a signal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParameterOutOfRange
from .terms import (
    Action, Environment, Ident, Name, Term, act, leaf_paths, subterm_at,
)
from .syntax import SpecFile, parse
from .lts import explore
from .sos import SosEngine

FLAVORS = ("ccs", "ccss")


@dataclass(frozen=True)
class Role:
    name: str
    noncrit: Action
    crit: Action
    leaf: tuple  # component address in the system term
    pending_terms: frozenset  # leaf subterms between noncrit and crit
    critical_terms: frozenset  # leaf subterms inside the critical section
    overflow_terms: frozenset = frozenset()  # leaf subterms to exclude


@dataclass
class ProtocolModel:
    env: Environment
    root: Term
    roles: tuple
    source: str
    meta: dict = field(default_factory=dict)

    @property
    def mode(self) -> str:
        """Justness mode matching the variable flavor."""
        return "ccss" if self.meta.get("flavor", "ccss") == "ccss" else "ccs"

    def excluded(self, state_term: Term) -> bool:
        """Whether the state is outside the intended model (overflow)."""
        return any(
            role.overflow_terms
            and subterm_at(state_term, role.leaf) in role.overflow_terms
            for role in self.roles)

    def in_critical(self, state_term: Term, role: Role) -> bool:
        return subterm_at(state_term, role.leaf) in role.critical_terms

    def pending(self, state_term: Term, role: Role) -> bool:
        return subterm_at(state_term, role.leaf) in role.pending_terms


# --------------------------------------------------------------------------
# role tagging

def _tag_role(env: Environment, name: str, agent: Term, noncrit: Action,
              crit: Action, leaf: tuple) -> Role:
    """Explore the agent on its own and classify its local states."""
    lts = explore(env, agent, max_states=200_000)
    adj = [[] for _ in lts.states]
    for t in lts.transitions:
        adj[t.src].append((t.label, t.tgt))
    started = {t.tgt for t in lts.transitions if t.label == noncrit}
    pending = set()
    stack = list(started)
    while stack:
        s = stack.pop()
        if s in pending:
            continue
        pending.add(s)
        for label, tgt in adj[s]:
            if label != crit:
                stack.append(tgt)
    critical = {t.tgt for t in lts.transitions if t.label == crit}
    overflow = set()
    for s in range(lts.num_states):
        hits = [tgt for label, tgt in adj[s]
                if not label.is_tau and label.name.base == "overflow"]
        if hits:
            overflow.add(s)
            overflow.update(hits)
    return Role(
        name, noncrit, crit, leaf,
        frozenset(lts.states[s] for s in pending),
        frozenset(lts.states[s] for s in critical),
        frozenset(lts.states[s] for s in overflow))


def _build(source: str, role_defs, meta) -> ProtocolModel:
    """role_defs: (role name, agent identifier, noncrit, crit) tuples."""
    spec = parse(source)
    leaves = {subterm_at(spec.root, p): p for p in leaf_paths(spec.root)}
    roles = []
    for rname, agent_name, noncrit, crit in role_defs:
        agent = Ident(agent_name)
        if agent not in leaves:
            raise ValueError(f"agent {agent_name} is not a component "
                             "of the system term")
        roles.append(_tag_role(spec.env, rname, agent, noncrit, crit,
                               leaves[agent]))
    return ProtocolModel(spec.env, spec.root, tuple(roles), source, meta)


# --------------------------------------------------------------------------
# the one-variable examples

_EX1 = """\
# One shared boolean variable x (initially true), a reader that polls for
# x = true, and a writer that writes false once.  Reads and writes are
# handshakes; the read loop can starve the writer without violating
# justness.
blocking { assign_x_true, assign_x_false, noti_x_true, noti_x_false }

X_true = assign_x_true.X_true + assign_x_false.X_false + 'noti_x_true.X_true
X_false = assign_x_false.X_false + assign_x_true.X_true + 'noti_x_false.X_false
R = noti_x_true.R
W = 'assign_x_false.0

system = (X_true | R | W) \\ {assign_x_true, assign_x_false, noti_x_true, noti_x_false}
"""

_EX2 = """\
# The same system with the variable's value emitted as a signal: reading
# no longer involves the variable, so the read loop leaves the variable
# resting with the write forever enabled, and pure read loops are unjust.
signals { noti_x_true, noti_x_false }
blocking { assign_x_true, assign_x_false, noti_x_true, noti_x_false }

X_true = (assign_x_true.X_true + assign_x_false.X_false) ^ noti_x_true
X_false = (assign_x_false.X_false + assign_x_true.X_true) ^ noti_x_false
R = noti_x_true.R
W = 'assign_x_false.0

system = (X_true | R | W) \\ {assign_x_true, assign_x_false, noti_x_true, noti_x_false}
"""


def example1() -> ProtocolModel:
    return _build(_EX1, (), {"family": "example1", "flavor": "ccs"})


def example2() -> ProtocolModel:
    return _build(_EX2, (), {"family": "example2", "flavor": "ccss"})


# --------------------------------------------------------------------------
# two-process mutual exclusion with a turn variable

def _bool_var_ccs(base: str, values=("true", "false")) -> list:
    """Handshake variable agents: accept any write, offer the current
    value for reading."""
    lines = []
    for v in values:
        branches = [f"assign_{base}_{w}.{_var_id(base, w)}" for w in values]
        branches.append(f"'noti_{base}_{v}.{_var_id(base, v)}")
        lines.append(f"{_var_id(base, v)} = " + " + ".join(branches))
    return lines


def _bool_var_ccss(base: str, values=("true", "false")) -> list:
    lines = []
    for v in values:
        branches = [f"assign_{base}_{w}.{_var_id(base, w)}" for w in values]
        lines.append(f"{_var_id(base, v)} = ("
                     + " + ".join(branches) + f") ^ noti_{base}_{v}")
    return lines


def _var_id(base: str, v) -> str:
    return f"{base[0].upper()}{base[1:]}_{v}"


def peterson2(flavor: str = "ccss") -> ProtocolModel:
    if flavor not in FLAVORS:
        raise ParameterOutOfRange(f"unknown flavor {flavor!r}")
    internal = []
    for base, values in (("readyA", ("true", "false")),
                         ("readyB", ("true", "false")),
                         ("turn", ("A", "B"))):
        for v in values:
            internal += [f"assign_{base}_{v}", f"noti_{base}_{v}"]
    lines = []
    if flavor == "ccss":
        signals = [n for n in internal if n.startswith("noti_")]
        lines.append("signals { " + ", ".join(signals) + " }")
    lines.append("blocking { noncritA, noncritB }")
    for me, other, turn_me, turn_other in (("A", "B", "A", "B"),
                                           ("B", "A", "B", "A")):
        exit_cs = f"crit{me}.'assign_ready{me}_false.{me}"
        lines.append(
            f"{me} = noncrit{me}.'assign_ready{me}_true.'assign_turn_{turn_other}"
            f".(noti_ready{other}_false.{exit_cs}"
            f" + noti_turn_{turn_me}.{exit_cs})")
    var = _bool_var_ccss if flavor == "ccss" else _bool_var_ccs
    lines += var("readyA") + var("readyB") + var("turn", ("A", "B"))
    lines.append(
        "system = (A | B | ReadyA_false | ReadyB_false | Turn_A) \\ {"
        + ", ".join(internal) + "}")
    source = "\n".join(lines) + "\n"
    roles = (("A", Name("A"), act("noncritA"), act("critA")),
             ("B", Name("B"), act("noncritB"), act("critB")))
    return _build(source, roles,
                  {"family": "peterson2", "flavor": flavor, "N": 2})


# --------------------------------------------------------------------------
# N-process filter lock

def filter_lock(n: int, flavor: str = "ccss", max_n: int = 4) -> ProtocolModel:
    """N processes pass through N-1 waiting rooms; room[i] is the room
    process i currently requests, last[j] the latest arrival in room j."""
    if flavor not in FLAVORS:
        raise ParameterOutOfRange(f"unknown flavor {flavor!r}")
    if not 2 <= n <= max_n:
        raise ParameterOutOfRange(f"filter lock supports 2..{max_n} "
                                  f"processes, got {n}")
    procs = range(1, n + 1)
    rooms = range(0, n)  # values of room[i]
    internal = []
    for i in procs:
        internal += [f"assign_room[{i}]_{v}" for v in rooms]
        internal += [f"noti_room[{i}]_{v}" for v in rooms]
    for j in range(1, n):
        internal += [f"assign_last[{j}]_{i}" for i in procs]
        internal += [f"noti_last[{j}]_{i}" for i in procs]
    lines = []
    if flavor == "ccss":
        lines.append("signals { noti_room, noti_last }")
    lines.append("blocking { noncrit }")
    for i in procs:
        lines.append(f"P[{i}] = noncrit[{i}].W[{i}]_1")
        for j in range(1, n):
            nxt = f"W[{i}]_{j + 1}" if j < n - 1 else f"C[{i}]"
            lines.append(f"W[{i}]_{j} = 'assign_room[{i}]_{j}"
                         f".'assign_last[{j}]_{i}.A[{i}]_{j}")
            others = [k for k in procs if k != i]
            branches = [f"noti_last[{j}]_{o}.{nxt}" for o in others]
            # scan the other processes' rooms in index order
            chain_ids = [f"K[{i}]_{j}_{k}" for k in others]
            branches.append(chain_ids[0])
            lines.append(f"A[{i}]_{j} = " + " + ".join(branches))
            for pos, k in enumerate(others):
                after = chain_ids[pos + 1] if pos + 1 < len(others) else nxt
                reads = [f"noti_room[{k}]_{v}.{after}" for v in range(j)]
                lines.append(f"K[{i}]_{j}_{k} = " + " + ".join(reads))
        lines.append(f"C[{i}] = crit[{i}].'assign_room[{i}]_0.P[{i}]")
    for i in procs:
        writes = [f"assign_room[{i}]_{w}.Room[{i}]_{w}" for w in rooms]
        for v in rooms:
            if flavor == "ccss":
                lines.append(f"Room[{i}]_{v} = (" + " + ".join(writes)
                             + f") ^ noti_room[{i}]_{v}")
            else:
                lines.append(f"Room[{i}]_{v} = " + " + ".join(
                    writes + [f"'noti_room[{i}]_{v}.Room[{i}]_{v}"]))
    for j in range(1, n):
        writes = [f"assign_last[{j}]_{w}.Last[{j}]_{w}" for w in procs]
        for v in procs:
            if flavor == "ccss":
                lines.append(f"Last[{j}]_{v} = (" + " + ".join(writes)
                             + f") ^ noti_last[{j}]_{v}")
            else:
                lines.append(f"Last[{j}]_{v} = " + " + ".join(
                    writes + [f"'noti_last[{j}]_{v}.Last[{j}]_{v}"]))
    components = ([f"P[{i}]" for i in procs]
                  + [f"Room[{i}]_0" for i in procs]
                  + [f"Last[{j}]_1" for j in range(1, n)])
    lines.append("system = (" + " | ".join(components) + ") \\ {"
                 + ", ".join(internal) + "}")
    source = "\n".join(lines) + "\n"
    roles = tuple((f"P{i}", Name("P", (i,)), act("noncrit", i),
                   act("crit", i)) for i in procs)
    return _build(source, roles,
                  {"family": "filter", "flavor": flavor, "N": n})


# --------------------------------------------------------------------------
# bakery algorithm with bounded tickets

def bakery(n: int = 2, ticket_bound: int = 4,
           flavor: str = "ccss") -> ProtocolModel:
    """Lamport's bakery algorithm: each process draws a ticket one above
    the maximum it saw, then enters in lexicographic (ticket, index)
    order.  Tickets live in 0..ticket_bound; drawing a larger one moves
    the process to a distinguished overflow dead end, which verdicts
    exclude and flag."""
    if flavor not in FLAVORS:
        raise ParameterOutOfRange(f"unknown flavor {flavor!r}")
    if n < 2:
        raise ParameterOutOfRange("bakery needs at least 2 processes")
    k_max = ticket_bound
    if k_max < n:
        raise ParameterOutOfRange("ticket bound must be at least N")
    procs = range(1, n + 1)
    tickets = range(0, k_max + 1)
    internal = []
    for i in procs:
        internal += [f"assign_choosing[{i}]_{v}" for v in (0, 1)]
        internal += [f"noti_choosing[{i}]_{v}" for v in (0, 1)]
        internal += [f"assign_number[{i}]_{v}" for v in tickets]
        internal += [f"noti_number[{i}]_{v}" for v in tickets]
    lines = []
    if flavor == "ccss":
        lines.append("signals { noti_choosing, noti_number }")
    lines.append("blocking { noncrit, overflow }")
    for i in procs:
        lines.append(f"P[{i}] = noncrit[{i}]"
                     f".'assign_choosing[{i}]_1.D[{i}]_0_1")
        # doorway: scan all tickets, remembering the maximum m seen
        for m in tickets:
            for j in procs:
                reads = [f"noti_number[{j}]_{k}.D[{i}]_{max(m, k)}_{j + 1}"
                         for k in tickets]
                lines.append(f"D[{i}]_{m}_{j} = " + " + ".join(reads))
            if m + 1 <= k_max:
                lines.append(
                    f"D[{i}]_{m}_{n + 1} = 'assign_number[{i}]_{m + 1}"
                    f".'assign_choosing[{i}]_0.B[{i}]_{m + 1}_1")
            else:
                lines.append(f"D[{i}]_{m}_{n + 1} = "
                             f"overflow[{i}].OV[{i}]")
        # bakery: wait until nobody with a smaller (ticket, index) competes
        for m in range(1, k_max + 1):
            for j in procs:
                allowed = [k for k in range(1, k_max + 1)
                           if k > m or (k == m and j >= i)]
                reads = [f"noti_number[{j}]_0.B[{i}]_{m}_{j + 1}"]
                reads += [f"noti_number[{j}]_{k}.B[{i}]_{m}_{j + 1}"
                          for k in allowed]
                lines.append(f"B[{i}]_{m}_{j} = noti_choosing[{j}]_0.("
                             + " + ".join(reads) + ")")
            lines.append(f"B[{i}]_{m}_{n + 1} = crit[{i}]"
                         f".'assign_number[{i}]_0.P[{i}]")
        lines.append(f"OV[{i}] = 0")
    for i in procs:
        ch_writes = [f"assign_choosing[{i}]_{w}.Ch[{i}]_{w}" for w in (0, 1)]
        num_writes = [f"assign_number[{i}]_{w}.Num[{i}]_{w}" for w in tickets]
        for v in (0, 1):
            if flavor == "ccss":
                lines.append(f"Ch[{i}]_{v} = (" + " + ".join(ch_writes)
                             + f") ^ noti_choosing[{i}]_{v}")
            else:
                lines.append(f"Ch[{i}]_{v} = " + " + ".join(
                    ch_writes + [f"'noti_choosing[{i}]_{v}.Ch[{i}]_{v}"]))
        for v in tickets:
            if flavor == "ccss":
                lines.append(f"Num[{i}]_{v} = (" + " + ".join(num_writes)
                             + f") ^ noti_number[{i}]_{v}")
            else:
                lines.append(f"Num[{i}]_{v} = " + " + ".join(
                    num_writes + [f"'noti_number[{i}]_{v}.Num[{i}]_{v}"]))
    components = ([f"P[{i}]" for i in procs]
                  + [f"Ch[{i}]_0" for i in procs]
                  + [f"Num[{i}]_0" for i in procs])
    lines.append("system = (" + " | ".join(components) + ") \\ {"
                 + ", ".join(internal) + "}")
    source = "\n".join(lines) + "\n"
    roles = tuple((f"P{i}", Name("P", (i,)), act("noncrit", i),
                   act("crit", i)) for i in procs)
    return _build(source, roles,
                  {"family": "bakery", "flavor": flavor, "N": n,
                   "ticketBound": k_max})


# --------------------------------------------------------------------------
# idempotent-write variable (Dekker-style)

_DEKKER = """\
# Variable flavor where only value-changing writes are actions; writing
# the value already held is realized by reading the variable's signal,
# so redundant writes never change or involve the variable.
signals { noti_x_true, noti_x_false }
blocking { assign_x_true, assign_x_false, noti_x_true, noti_x_false }

XD_true = (assign_x_false.XD_false) ^ noti_x_true
XD_false = (assign_x_true.XD_true) ^ noti_x_false
WriteTrue = 'assign_x_true.0 + noti_x_true.0

system = (XD_true | WriteTrue) \\ {assign_x_true, assign_x_false, noti_x_true, noti_x_false}
"""


def dekker_variable() -> SpecFile:
    """The idempotent-write variable pair plus a sample writer."""
    return parse(_DEKKER)
