"""Qualitative checks on finite Markov chains.

Only supports matter: with probability one a run enters a bottom SCC and
visits all of its states infinitely often, so almost-sure parity reduces to
asking that every reachable bottom SCC has an even minimum priority.
"""
from __future__ import annotations

from typing import Sequence

from .automata import DEFAULT_MAX_STATES, Dpw, complement_dpw, letter_mask, ltl_to_dpw, strongly_connected
from .ltl import LtlFormula
from .model import Mc


def reachable(m: Mc, start: int | None = None) -> list[int]:
    start = m.init if start is None else start
    seen = {start}
    stack = [start]
    while stack:
        s = stack.pop()
        for t in m.successors(s):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return sorted(seen)


def bsccs(m: Mc) -> list[list[int]]:
    """Bottom SCCs reachable from the initial state, ordered by smallest member."""
    nodes = reachable(m)
    comps = strongly_connected(nodes, m.successors)
    out = []
    for comp in comps:
        members = set(comp)
        if all(t in members for s in comp for t in m.successors(s)):
            out.append(sorted(comp))
    return sorted(out, key=lambda c: c[0])


def mc_as_parity(m: Mc, priority: Sequence[int]) -> bool:
    return all(min(priority[s] for s in b) % 2 == 0 for b in bsccs(m))


def mc_product(m: Mc, d: Dpw) -> tuple[Mc, tuple[int, ...]]:
    """Chain over ``(state, automaton state)``; returns it with per-state priorities."""
    start = (m.init, d.initial)
    index = {start: 0}
    order = [start]
    rows = []
    masks = [letter_mask(d.ap, lab) for lab in m.labels]
    i = 0
    while i < len(order):
        s, q = order[i]
        q2 = d.delta[q][masks[s]]
        row = {}
        for t, p in m.trans[s].items():
            if p == 0:
                continue
            key = (t, q2)
            if key not in index:
                index[key] = len(order)
                order.append(key)
            row[index[key]] = p
        rows.append(row)
        i += 1
    prod = Mc(
        states=tuple((m.states[s], q) for s, q in order),
        init=0,
        trans=tuple(rows),
        labels=tuple(m.labels[s] for s, _ in order),
        base=tuple(s for s, _ in order),
    )
    prio = tuple(d.priority[q] for _, q in order)
    prod.priority = prio
    return prod, prio


def mc_as_dpw(m: Mc, d: Dpw) -> bool:
    prod, prio = mc_product(m, d)
    return mc_as_parity(prod, prio)


def mc_as_ltl(m: Mc, f: LtlFormula, max_states: int = DEFAULT_MAX_STATES) -> bool:
    """Does ``f`` hold with probability one from the initial state?"""
    return mc_as_dpw(m, ltl_to_dpw(f, max_states))


def mc_nz_ltl(m: Mc, f: LtlFormula, max_states: int = DEFAULT_MAX_STATES) -> bool:
    """Does ``f`` hold with positive probability? Computed as not AS(not f)."""
    return not mc_as_dpw(m, complement_dpw(ltl_to_dpw(f, max_states)))


def winners(m: Mc, goals: Sequence[LtlFormula], max_states: int = DEFAULT_MAX_STATES) -> list[int]:
    """Indices of goals satisfied almost surely."""
    return [i for i, g in enumerate(goals) if mc_as_ltl(m, g, max_states)]
