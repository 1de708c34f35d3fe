"""Almost-sure winning in two-player concurrent stochastic parity games.

Player 1 wins a play when the least priority seen infinitely often is even.
The almost-sure region is a nested fixpoint

    nu Y0 . mu X0 . nu Y1 . mu X1 ... body

where level ``k`` handles priorities ``2k`` and ``2k+1``. At a state of
priority ``2k+1`` player 1 must pick a support ``A`` of actions such that,
whatever support ``B`` player 2 uses, for some ``j <= k`` the successors stay
in ``Yj`` and hit ``Xj`` with positive probability. At priority ``2k`` the
same is required for ``j < k``, or alternatively the successors merely stay
in ``Yk``. Only supports matter, so everything is computed on bitmasks of
successor sets.
"""
from __future__ import annotations

import itertools
from typing import Sequence

from .automata import DEFAULT_MAX_STATES, compress_priorities, ltl_to_dpw
from .ltl import LtlFormula
from .model import Arena, Csg, ModelError, coalition_arena, product_with_automata


def _subsets(items: Sequence) -> list[tuple]:
    items = list(items)
    return [c for r in range(1, len(items) + 1) for c in itertools.combinations(items, r)]


def _mask(states) -> int:
    m = 0
    for t in states:
        m |= 1 << t
    return m


def _move_table(arena: Arena) -> list[list[tuple[int, ...]]]:
    """For each state, one tuple per player-1 support: successor masks over all player-2 supports."""
    if arena.n_players != 2:
        raise ModelError("expected a two-player arena")
    table = []
    for s in range(arena.n_states):
        g1, g2 = arena.available[s]
        single = {(a, b): _mask(arena.support(s, (a, b))) for a in g1 for b in g2}
        rows = set()
        for A in _subsets(g1):
            per_b = [0] * len(g2)
            for k, b in enumerate(g2):
                for a in A:
                    per_b[k] |= single[(a, b)]
            dests = set()
            for B in _subsets(range(len(g2))):
                m = 0
                for k in B:
                    m |= per_b[k]
                dests.add(m)
            rows.add(tuple(sorted(dests)))
        table.append(sorted(rows))
    return table


def as_winning_region(arena: Arena, priority: Sequence[int]) -> frozenset[int]:
    """States from which player 1 wins the parity objective with probability one."""
    n = arena.n_states
    if len(priority) != n:
        raise ModelError("priority must cover every state")
    if n == 0:
        return frozenset()
    remap = compress_priorities(priority)
    prio = [remap[p] for p in priority]
    levels = max(prio) // 2 + 1
    table = _move_table(arena)
    full = (1 << n) - 1
    order = list(range(n))

    def body(ys: list[int], xs: list[int]) -> int:
        out = 0
        for s in order:
            p = prio[s]
            k, odd = divmod(p, 2)
            top = k + 1 if odd else k
            for dests in table[s]:
                ok = True
                for d in dests:
                    good = False
                    for j in range(top):
                        if d & ~ys[j] == 0 and d & xs[j]:
                            good = True
                            break
                    if not good and not odd and d & ~ys[k] == 0:
                        good = True
                    if not good:
                        ok = False
                        break
                if ok:
                    out |= 1 << s
                    break
        return out

    def greatest(k: int, ys: list[int], xs: list[int]) -> int:
        y = full
        while True:
            y2 = least(k, ys + [y], xs)
            if y2 == y:
                return y
            y = y2

    def least(k: int, ys: list[int], xs: list[int]) -> int:
        x = 0
        while True:
            if k + 1 < levels:
                x2 = greatest(k + 1, ys, xs + [x])
            else:
                x2 = body(ys, xs + [x])
            if x2 == x:
                return x
            x = x2

    region = greatest(0, [], [])
    return frozenset(s for s in range(n) if region >> s & 1)


# ---------------------------------------------------------------------------
# Turn-based oracle

def _turn_based_view(arena: Arena):
    owner, succ = [], []
    for s in range(arena.n_states):
        g1, g2 = arena.available[s]
        if len(g1) > 1 and len(g2) > 1:
            raise ModelError(f"state {arena.states[s]} is not turn-based")
        owner.append(0 if len(g2) == 1 else 1)
        nxt = set()
        for d in arena.directions(s):
            sup = arena.support(s, d)
            if len(sup) != 1:
                raise ModelError(f"state {arena.states[s]} has a probabilistic move")
            nxt |= sup
        succ.append(nxt)
    return owner, succ


def _attractor(player: int, target: set, nodes: set, owner, succ) -> set:
    attr = set(target)
    changed = True
    while changed:
        changed = False
        for v in sorted(nodes - attr):
            out = succ[v] & nodes
            if (owner[v] == player and out & attr) or (owner[v] != player and out <= attr):
                attr.add(v)
                changed = True
    return attr


def zielonka_oracle(arena: Arena, priority: Sequence[int]) -> frozenset[int]:
    """Sure winning region of player 1 in a turn-based deterministic parity game.

    Player 1 owns states where player 2 has one action. Classical recursive
    algorithm with attractors, using the min-even convention.
    """
    owner, succ = _turn_based_view(arena)

    def solve(nodes: set) -> tuple[set, set]:
        if not nodes:
            return set(), set()
        p = min(priority[v] for v in nodes)
        i = p % 2
        top = {v for v in nodes if priority[v] == p}
        a = _attractor(i, top, nodes, owner, succ)
        w = list(solve(nodes - a))
        if not w[1 - i]:
            out = [set(), set()]
            out[i] = set(nodes)
            return out[0], out[1]
        b = _attractor(1 - i, w[1 - i], nodes, owner, succ)
        w2 = list(solve(nodes - b))
        w2[1 - i] |= b
        return w2[0], w2[1]

    return frozenset(solve(set(range(arena.n_states)))[0])


# ---------------------------------------------------------------------------
# Coalition games

def coalition_product(g: Csg, coalition, goal: LtlFormula, max_states: int = DEFAULT_MAX_STATES):
    """Two-player product of the coalition arena with the goal's automaton; returns (arena, priority)."""
    arena2 = coalition_arena(g.arena, coalition)
    d = ltl_to_dpw(goal, max_states)
    prod, _, qs = product_with_automata(arena2, g.labels, [d], max_states)
    return prod, tuple(d.priority[q[0]] for q in qs)


def is_winnable(g: Csg, coalition, goal: LtlFormula, max_states: int = DEFAULT_MAX_STATES) -> bool:
    """Can the coalition ensure ``goal`` with probability one against all other players?"""
    prod, prio = coalition_product(g, coalition, goal, max_states)
    return prod.init in as_winning_region(prod, prio)
