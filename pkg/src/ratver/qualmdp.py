"""Qualitative analysis of MDPs: end components and conjunctions of parity atoms.

A conjunction of min-even parity objectives is treated as one Streett
objective: for each priority function and each odd value ``k`` it uses,
"``k`` seen infinitely often" must imply "something below ``k`` seen
infinitely often". Almost-sure Streett is decided on end components.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .automata import DEFAULT_MAX_STATES, Dpw, letter_mask, ltl_to_dpw, strongly_connected
from .ltl import LtlFormula
from .model import Mdp


class Mode(str, Enum):
    AS = "AS"
    NZ = "NZ"


@dataclass(frozen=True)
class Atom:
    priority: tuple[int, ...]
    mode: Mode = Mode.AS


@dataclass
class QualResult:
    holds: bool
    region: frozenset[int] = frozenset()
    # state -> actions the witness controller may use there
    controller: dict[int, tuple] = field(default_factory=dict)

    def __bool__(self):
        return self.holds


def parity_pairs(priority: Sequence[int], states: Iterable[int]) -> list[tuple[frozenset, frozenset]]:
    states = list(states)
    out = []
    for k in sorted({priority[s] for s in states if priority[s] % 2 == 1}):
        bad = frozenset(s for s in states if priority[s] == k)
        good = frozenset(s for s in states if priority[s] < k)
        out.append((bad, good))
    return out


class _View:
    """Supports of an MDP, cached, with deterministic action order."""

    def __init__(self, k: Mdp):
        self.k = k
        self.acts = [sorted(c, key=repr) for c in k.choices]
        self.supp = [{a: k.support(s, a) for a in c} for s, c in enumerate(k.choices)]

    def all_actions(self) -> dict[int, list]:
        return {s: list(self.acts[s]) for s in range(self.k.n_states)}


def _restrict(view: _View, states: set, allowed: dict) -> dict:
    return {s: [a for a in allowed[s] if view.supp[s][a] <= states] for s in states}


def _mecs(view: _View, states: Iterable[int], allowed: dict) -> list[tuple[frozenset, dict]]:
    S = set(states)
    A = _restrict(view, S, allowed)
    while True:
        dead = {s for s in S if not A[s]}
        if dead:
            S -= dead
            A = _restrict(view, S, A)
            continue
        comps = strongly_connected(sorted(S), lambda s: set().union(*(view.supp[s][a] for a in A[s])))
        comp_of = {}
        for c in comps:
            fc = frozenset(c)
            for s in c:
                comp_of[s] = fc
        changed = False
        for s in S:
            keep = [a for a in A[s] if view.supp[s][a] <= comp_of[s]]
            if len(keep) != len(A[s]):
                A[s] = keep
                changed = True
        if not changed:
            out = [(frozenset(c), {s: tuple(A[s]) for s in c}) for c in comps]
            return sorted(out, key=lambda e: min(e[0]))


def mec_decomposition(k: Mdp) -> list[tuple[frozenset, dict]]:
    """Maximal end components as ``(states, {state: actions})`` pairs."""
    view = _View(k)
    return _mecs(view, range(k.n_states), view.all_actions())


def _good_ecs(view: _View, states, allowed: dict, pairs) -> list[tuple[frozenset, dict]]:
    out = []
    for comp, acts in _mecs(view, states, allowed):
        bad = set()
        for r, g in pairs:
            if comp & r and not comp & g:
                bad |= comp & r
        if not bad:
            out.append((comp, acts))
        elif comp - bad:
            out.extend(_good_ecs(view, comp - bad, {s: list(a) for s, a in acts.items()}, pairs))
    return out


def _almost_sure_reach(view: _View, targets: set, states: set, allowed: dict) -> tuple[set, dict]:
    """States of ``states`` that reach ``targets`` with probability one.

    Returns the region and, for non-target states, an action making progress.
    """
    R = set(states)
    while True:
        A = _restrict(view, R, allowed)
        Z = set(targets) & R
        progress: dict[int, object] = {}
        frontier = True
        while frontier:
            frontier = False
            for s in sorted(R - Z):
                for a in A[s]:
                    if view.supp[s][a] & Z:
                        Z.add(s)
                        progress[s] = a
                        frontier = True
                        break
        if Z == R:
            return R, progress
        R = Z


def _as_streett(view: _View, pairs, states=None, allowed=None):
    states = set(range(view.k.n_states)) if states is None else set(states)
    allowed = view.all_actions() if allowed is None else allowed
    ecs = _good_ecs(view, states, allowed, pairs)
    target = set().union(*(c for c, _ in ecs)) if ecs else set()
    region, progress = _almost_sure_reach(view, target, states, allowed)
    controller = {}
    for c, acts in ecs:
        for s in c:
            controller[s] = tuple(acts[s])
    for s, a in progress.items():
        controller.setdefault(s, (a,))
    return region, controller


def as_region(k: Mdp, priorities: Sequence[Sequence[int]]) -> frozenset[int]:
    """States from which some controller satisfies every parity objective almost surely."""
    view = _View(k)
    pairs = [p for prio in priorities for p in parity_pairs(prio, range(k.n_states))]
    region, _ = _as_streett(view, pairs)
    return frozenset(region)


def nz_region(k: Mdp, priority: Sequence[int]) -> frozenset[int]:
    """States from which some controller satisfies the parity objective with positive probability."""
    view = _View(k)
    pairs = parity_pairs(priority, range(k.n_states))
    ecs = _good_ecs(view, range(k.n_states), view.all_actions(), pairs)
    good = set().union(*(c for c, _ in ecs)) if ecs else set()
    return frozenset(_backward_reach(view, good, set(range(k.n_states)), view.all_actions()))


def _backward_reach(view: _View, targets: set, states: set, allowed: dict) -> set:
    Z = set(targets) & states
    changed = True
    while changed:
        changed = False
        for s in sorted(states - Z):
            if any(view.supp[s][a] & Z for a in allowed[s]):
                Z.add(s)
                changed = True
    return Z


def _forward_reach(view: _View, start: int, allowed: dict) -> set:
    seen = {start}
    stack = [start]
    while stack:
        s = stack.pop()
        for a in allowed.get(s, ()):
            for t in view.supp[s][a]:
                if t not in seen and t in allowed:
                    seen.add(t)
                    stack.append(t)
    return seen


def mdp_satisfies(k: Mdp, atoms: Sequence[Atom]) -> QualResult:
    """Can one controller meet every AS atom surely-almost and every NZ atom positively?

    The AS atoms fix a sub-MDP of states and actions from which they stay
    achievable. Each NZ atom then needs a reachable end component of that
    sub-MDP which is good for the AS atoms and the NZ atom together; mixing
    one such witness per NZ atom at the start satisfies all of them.
    """
    if not atoms:
        raise ValueError("need at least one atom")
    view = _View(k)
    everything = range(k.n_states)
    as_pairs = [p for a in atoms if a.mode == Mode.AS for p in parity_pairs(a.priority, everything)]
    nz_atoms = [a for a in atoms if a.mode == Mode.NZ]

    if len(as_pairs) or any(a.mode == Mode.AS for a in atoms):
        region, controller = _as_streett(view, as_pairs)
    else:
        region, controller = set(everything), {}
    if k.init not in region:
        return QualResult(False, frozenset(region), controller)
    sub = _restrict(view, set(region), view.all_actions())
    reach = _forward_reach(view, k.init, sub)
    for atom in nz_atoms:
        pairs = as_pairs + parity_pairs(atom.priority, everything)
        ecs = [(c, acts) for c, acts in _good_ecs(view, region, sub, pairs) if c & reach]
        if not ecs:
            return QualResult(False, frozenset(region), controller)
        c, acts = ecs[0]
        for s in c:
            controller.setdefault(s, tuple(acts[s]))
    return QualResult(True, frozenset(region), controller)


def mdp_product(k: Mdp, dpws: Sequence[Dpw]) -> tuple[Mdp, list[tuple[int, ...]]]:
    """Product with automata (reading the label of the state being left)."""
    start = (k.init,) + tuple(d.initial for d in dpws)
    index = {start: 0}
    order = [start]
    choices = []
    masks = [[letter_mask(d.ap, lab) for lab in k.labels] for d in dpws]
    i = 0
    while i < len(order):
        v = order[i]
        s, qs = v[0], v[1:]
        nq = tuple(d.delta[q][masks[j][s]] for j, (d, q) in enumerate(zip(dpws, qs)))
        row = {}
        for a, dist in k.choices[s].items():
            out = {}
            for t, p in dist.items():
                if p == 0:
                    continue
                key = (t,) + nq
                if key not in index:
                    index[key] = len(order)
                    order.append(key)
                out[index[key]] = p
            row[a] = out
        choices.append(row)
        i += 1
    prod = Mdp(tuple((k.states[v[0]],) + v[1:] for v in order), 0, tuple(choices),
               tuple(k.labels[v[0]] for v in order), tuple(v[0] for v in order))
    prios = [tuple(d.priority[v[1 + j]] for v in order) for j, d in enumerate(dpws)]
    return prod, prios


def mdp_as_ltl(k: Mdp, f: LtlFormula, max_states: int = DEFAULT_MAX_STATES) -> bool:
    prod, (prio,) = mdp_product(k, [ltl_to_dpw(f, max_states)])
    return mdp_satisfies(prod, [Atom(prio, Mode.AS)]).holds


def mdp_nz_ltl(k: Mdp, f: LtlFormula, max_states: int = DEFAULT_MAX_STATES) -> bool:
    prod, (prio,) = mdp_product(k, [ltl_to_dpw(f, max_states)])
    return mdp_satisfies(prod, [Atom(prio, Mode.NZ)]).holds


def mdp_as_dpw(k: Mdp, d: Dpw) -> bool:
    prod, (prio,) = mdp_product(k, [d])
    return mdp_satisfies(prod, [Atom(prio, Mode.AS)]).holds


def mdp_nz_dpw(k: Mdp, d: Dpw) -> bool:
    prod, (prio,) = mdp_product(k, [d])
    return mdp_satisfies(prod, [Atom(prio, Mode.NZ)]).holds
