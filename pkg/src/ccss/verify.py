"""Safety and liveness verdicts for mutual-exclusion models.

Safety is exhaustive reachability: no reachable (non-excluded) state may
have two roles inside the critical section at once.

Liveness ("every noncrit is eventually followed by crit") is checked per
role by searching for a complete, just counterexample lasso whose cycle
avoids the role's crit action.  The search works on strongly connected
components of the transition graph with the role's crit edges (and
excluded states) removed, and rests on a monotonicity property of the
justness analysis: turning a resting component into a moving one only
removes constraints.  Hence if any cycle inside an SCC is just, the
cycle that moves every component touched by the SCC is just too, and the
per-SCC configuration (touched components moving, all others resting at
their — necessarily constant — subterms) decides the existence question
exactly.  Terminal violations (a maximal state with only blocking
actions enabled while a role is stuck mid-protocol) are checked
separately.  The search is exhaustive whenever exploration was not
truncated.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .errors import TruncatedInput
from .lts import Lts, explore
from .justness import (
    JustnessVerdict, Lasso, analyze_configuration, is_complete, is_just,
)
from .protocols import ProtocolModel, Role
from .sos import SosEngine
from .terms import leaf_paths, subterm_at
from .syntax import action_str, term_str


@dataclass
class SafetyVerdict:
    holds: bool
    witness: Optional[Lasso] = None  # stem to the violating state
    roles: tuple = ()  # role names occupying the critical section
    excluded_states: int = 0

    def to_json(self):
        return {"holds": self.holds,
                "witness": list(self.witness.stem) if self.witness else None,
                "roles": list(self.roles),
                "excludedStates": self.excluded_states}


@dataclass
class LivenessVerdict:
    status: str  # "holds" | "violated" | "unknown"
    exhaustive: bool
    role: Optional[str] = None
    counterexample: Optional[tuple] = None  # (Lasso, JustnessVerdict)
    excluded_states: int = 0

    @property
    def holds(self) -> bool:
        return self.status == "holds"

    def to_json(self):
        lasso, verdict = self.counterexample or (None, None)
        return {
            "status": self.status,
            "exhaustive": self.exhaustive,
            "role": self.role,
            "counterexample": (
                {"stem": list(lasso.stem), "cycle": list(lasso.cycle),
                 "justness": verdict.to_json()}
                if lasso is not None else None),
            "excludedStates": self.excluded_states,
        }


# --------------------------------------------------------------------------

@dataclass
class _Workspace:
    model: ProtocolModel
    engine: SosEngine
    lts: Lts
    ok_states: list  # state ids that are not excluded
    excluded: set


def _prepare(model: ProtocolModel, max_states: int) -> _Workspace:
    engine = SosEngine(model.env)
    lts = explore(model.env, model.root, max_states=max_states,
                  engine=engine)
    excluded = {i for i, s in enumerate(lts.states) if model.excluded(s)}
    ok = [i for i in range(lts.num_states) if i not in excluded]
    return _Workspace(model, engine, lts, ok, excluded)


def _bfs_stem(lts: Lts, excluded, source: int, goals: set) -> Optional[list]:
    """Shortest transition-index path from source to any goal state,
    avoiding excluded states."""
    if source in goals:
        return []
    out = [[] for _ in lts.states]
    for i, t in enumerate(lts.transitions):
        out[t.src].append((i, t.tgt))
    seen = {source}
    queue = deque([(source, [])])
    while queue:
        s, path = queue.popleft()
        for i, tgt in out[s]:
            if tgt in excluded or tgt in seen:
                continue
            nxt = path + [i]
            if tgt in goals:
                return nxt
            seen.add(tgt)
            queue.append((tgt, nxt))
    return None


def check_safety(model: ProtocolModel,
                 max_states: int = 1_000_000) -> SafetyVerdict:
    ws = _prepare(model, max_states)
    if ws.lts.truncated:
        raise TruncatedInput("state space exceeds the exploration limit")
    bad = set()
    bad_roles = {}
    for sid in ws.ok_states:
        term = ws.lts.states[sid]
        inside = [r.name for r in model.roles if model.in_critical(term, r)]
        if len(inside) >= 2:
            bad.add(sid)
            bad_roles[sid] = tuple(inside)
    if not bad:
        return SafetyVerdict(True, excluded_states=len(ws.excluded))
    stem = _bfs_stem(ws.lts, ws.excluded, ws.lts.initial, bad)
    target = (ws.lts.transitions[stem[-1]].tgt if stem else ws.lts.initial)
    return SafetyVerdict(False, Lasso(tuple(stem), ()), bad_roles[target],
                         len(ws.excluded))


# --------------------------------------------------------------------------
# liveness

def _transition_indices(lts: Lts):
    return {id(t): i for i, t in enumerate(lts.transitions)}


def _sccs(num_states, edges_out, states):
    """Tarjan over the given subgraph (iterative)."""
    index = {}
    low = {}
    on_stack = set()
    stack = []
    out = []
    counter = [0]
    for root in states:
        if root in index:
            continue
        work = [(root, iter(edges_out(root)))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for t in it:
                w = t.tgt
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(edges_out(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.remove(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def _leaf_of(leaves, address):
    for leaf in leaves:
        if address[:len(leaf)] == leaf:
            return leaf
    raise ValueError(f"participant {'/'.join(address)} matches no component")


def _cycle_through(ws: _Workspace, allowed_edges, comp: set, anchor: int,
                   required_edges: list) -> list:
    """A closed walk (transition indices) from anchor through all required
    edges, staying inside the component."""
    tindex = {}
    adj = {}
    for t in allowed_edges:
        if t.src in comp and t.tgt in comp:
            adj.setdefault(t.src, []).append(t)
    def bfs(frm, to):
        if frm == to:
            return []
        seen = {frm}
        queue = deque([(frm, [])])
        while queue:
            s, path = queue.popleft()
            for t in adj.get(s, ()):
                if t.tgt in seen:
                    continue
                nxt = path + [t]
                if t.tgt == to:
                    return nxt
                seen.add(t.tgt)
                queue.append((t.tgt, nxt))
        raise ValueError("component is not strongly connected")
    walk = []
    at = anchor
    for edge in required_edges:
        walk += bfs(at, edge.src)
        walk.append(edge)
        at = edge.tgt
    walk += bfs(at, anchor)
    return walk


def check_liveness(model: ProtocolModel, max_states: int = 1_000_000,
                   max_assignments: int = 4096) -> LivenessVerdict:
    ws = _prepare(model, max_states)
    if ws.lts.truncated:
        return LivenessVerdict("unknown", exhaustive=False,
                               excluded_states=len(ws.excluded))
    mode = model.mode
    env = model.env
    lts = ws.lts
    index_of = {}
    for i, t in enumerate(lts.transitions):
        index_of[id(t)] = i
    leaves = leaf_paths(lts.states[lts.initial])
    config_cache = {}

    def config_just(anchor_term, movers):
        resting = tuple(
            (leaf, subterm_at(anchor_term, leaf))
            for leaf in leaves if leaf not in movers)
        key = (movers, resting)
        if key not in config_cache:
            config_cache[key] = analyze_configuration(
                ws.engine, env, anchor_term, movers, mode)
        return config_cache[key]

    for role in model.roles:
        candidates = []  # (score, kind, payload); cycles preferred
        allowed = [t for t in lts.transitions
                   if t.src not in ws.excluded and t.tgt not in ws.excluded
                   and t.label != role.crit]
        adj = {}
        for t in allowed:
            adj.setdefault(t.src, []).append(t)
        comps = _sccs(lts.num_states, lambda s: adj.get(s, ()),
                      list(ws.ok_states))
        for comp in comps:
            comp_set = set(comp)
            edges = [t for s in comp for t in adj.get(s, ())
                     if t.tgt in comp_set]
            if not edges:
                continue
            touched = frozenset(_leaf_of(leaves, p)
                                for t in edges for p in t.participants)
            anchor = min(comp_set)
            anchor_term = lts.states[anchor]
            # the role must be stuck mid-protocol on this cycle
            noncrit_edges = [t for t in edges if t.label == role.noncrit]
            pending_states = {s for s in comp_set
                              if model.pending(lts.states[s], role)}
            if not noncrit_edges and not pending_states:
                continue
            verdict = config_just(anchor_term, touched)
            if not verdict.just:
                continue
            # prefer informative witnesses: cycles over dead ends, then
            # SCCs showing the most other roles completing their rounds,
            # then ones where this role performs no transition at all
            other_crits = len({t.label for t in edges
                               if any(t.label == r.crit
                                      for r in model.roles if r is not role)})
            role_rests = role.leaf not in touched
            score = (1, other_crits, role_rests)
            candidates.append((score, "cycle",
                               (comp_set, edges, touched, anchor,
                                noncrit_edges, pending_states)))
        # terminal violations: a maximal, only-blocking state reached
        # while the role is still mid-protocol
        for sid in ws.ok_states:
            term = lts.states[sid]
            if not model.pending(term, role):
                continue
            if any(not env.is_blocking(t.label) for t in lts.outgoing(sid)):
                continue
            candidates.append(((0, 0, True), "terminal", sid))
        for score, kind, payload in sorted(candidates,
                                           key=lambda c: c[0], reverse=True):
            if kind == "terminal":
                stem = _bfs_stem(lts, ws.excluded, lts.initial, {payload})
                if stem is None:
                    continue  # only reachable through excluded states
                lasso = Lasso(tuple(stem), ())
                verdict = is_just(lts, env, lasso, mode, ws.engine)
                return LivenessVerdict(
                    "violated", exhaustive=True, role=role.name,
                    counterexample=(lasso, verdict),
                    excluded_states=len(ws.excluded))
            comp_set, edges, touched, anchor, noncrit_edges, pending = payload
            anchor_term = lts.states[anchor]
            # build a witness cycle covering every touched component
            required = []
            covered = set()
            if noncrit_edges and not pending:
                required.append(noncrit_edges[0])
                covered |= {_leaf_of(leaves, p)
                            for p in noncrit_edges[0].participants}
            elif pending:
                anchor = min(pending)
            for t in edges:
                extra = {_leaf_of(leaves, p) for p in t.participants}
                if extra - covered:
                    required.append(t)
                    covered |= extra
            walk = _cycle_through(ws, allowed, comp_set, anchor, required)
            stem = _bfs_stem(lts, ws.excluded, lts.initial, {anchor})
            if stem is None:
                continue
            lasso = Lasso(tuple(stem),
                          tuple(index_of[id(t)] for t in walk))
            full = is_just(lts, env, lasso, mode, ws.engine,
                           max_assignments=max_assignments)
            if not full.just:  # pragma: no cover - safeguarded by theory
                continue
            return LivenessVerdict(
                "violated", exhaustive=True, role=role.name,
                counterexample=(lasso, full),
                excluded_states=len(ws.excluded))
    return LivenessVerdict("holds", exhaustive=True,
                           excluded_states=len(ws.excluded))


# --------------------------------------------------------------------------

def classify_path(model: ProtocolModel, lts: Lts, lasso: Lasso,
                  engine: Optional[SosEngine] = None) -> dict:
    """Bundle completeness, justness and the per-role noncrit-to-crit
    check for a concrete lasso."""
    engine = engine or SosEngine(model.env)
    mode = model.mode
    verdict = is_just(lts, model.env, lasso, mode, engine)
    complete = is_complete(lts, model.env, lasso, mode, engine)
    anchor_term = lts.states[lasso.anchor(lts)]
    cycle_labels = [lts.transitions[i].label for i in lasso.cycle]
    live_ok = True
    broken = []
    for role in model.roles:
        crit_in_cycle = role.crit in cycle_labels
        noncrit_in_cycle = role.noncrit in cycle_labels
        pending = model.pending(anchor_term, role)
        if (noncrit_in_cycle or pending) and not crit_in_cycle:
            live_ok = False
            broken.append(role.name)
    return {
        "complete": complete,
        "just": verdict.just,
        "minimalY": (sorted(action_str(a) for a in verdict.minimal_y)
                     if verdict.minimal_y is not None else None),
        "witness": verdict.witness.to_json() if verdict.witness else None,
        "livenessOk": live_ok,
        "brokenRoles": broken,
    }
