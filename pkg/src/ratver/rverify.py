"""Rational verification queries over concurrent stochastic games.

Non-cooperative queries (membership, E-/A-Nash, non-emptiness) work on the
parity product of the game with the automata of every goal and of the
property. Equilibria are found by guessing the set of losers, cutting the
product down to what those losers can be punished on, and asking a
qualitative MDP question on what remains. Cooperative queries (E-/A-Core,
core membership, beneficial deviation) combine MDP checks with coalition
games.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .automata import DEFAULT_MAX_STATES, complement_dpw, ltl_to_dpw
from .congame import as_winning_region, is_winnable
from .ltl import TRUE, LtlFormula, conj_all, neg
from .model import (Cspg, Csg, Mdp, ModelError, build_parity_game, coalition_arena, induced_markov_chain,
                    induced_mdp, normalize_profile, validate_model, validate_strategy)
from .qualmc import mc_as_ltl, mc_as_parity
from .qualmdp import Atom, Mode, mdp_as_ltl, mdp_nz_ltl, mdp_satisfies


@dataclass
class QueryVerdict:
    answer: bool
    witness: dict = field(default_factory=dict)

    def __bool__(self):
        return self.answer

    @property
    def text(self) -> str:
        return "yes" if self.answer else "no"

    def to_dict(self) -> dict:
        return {"answer": self.text, "witness": self.witness}


def _check_mode(mode: str) -> Mode:
    try:
        return Mode(mode.upper())
    except ValueError:
        raise ModelError(f"mode must be 'as' or 'nz', not {mode!r}") from None


def _check_game(g: Csg):
    problems = validate_model(g)
    if problems:
        raise ModelError("invalid model: " + "; ".join(problems))


def _check_profile(g: Csg, profile, players: Iterable[int] | None = None) -> dict:
    a = g.arena
    if isinstance(profile, dict):
        keyed = {a.player_index(k): v for k, v in profile.items()}
    else:
        keyed = dict(enumerate(normalize_profile(a, profile)))
    wanted = range(a.n_players) if players is None else players
    for i in wanted:
        if i not in keyed:
            raise ModelError(f"no strategy for player {a.players[i]}")
        problems = validate_strategy(g, i, keyed[i])
        if problems:
            raise ModelError("invalid strategy: " + "; ".join(problems))
    return keyed


def _names(g, idx) -> list[str]:
    return [g.arena.players[i] for i in sorted(idx)]


def _coalitions(n: int, pool: Sequence[int] | None = None) -> list[tuple[int, ...]]:
    """Subsets of ``pool`` by ascending size, then lexicographically."""
    pool = list(range(n)) if pool is None else sorted(pool)
    return [c for r in range(len(pool) + 1) for c in itertools.combinations(pool, r)]


# ---------------------------------------------------------------------------
# Membership

def membership(g: Csg, profile, max_states: int = DEFAULT_MAX_STATES) -> QueryVerdict:
    """Is ``profile`` a Nash equilibrium?

    A losing player breaks the equilibrium exactly when, with everyone
    else's strategy fixed, some strategy of theirs wins almost surely.
    """
    _check_game(g)
    strategies = _check_profile(g, profile)
    mc = induced_markov_chain(g, [strategies[i] for i in range(g.arena.n_players)])
    winners = []
    for i, goal in enumerate(g.goals):
        if mc_as_ltl(mc, goal, max_states):
            winners.append(i)
            continue
        fixed = {k: t for k, t in strategies.items() if k != i}
        if mdp_as_ltl(induced_mdp(g, fixed), goal, max_states):
            return QueryVerdict(False, {"deviator": g.arena.players[i]})
    return QueryVerdict(True, {"winners": _names(g, winners)})


# ---------------------------------------------------------------------------
# Punishment

class ParityContext:
    """The parity product of a game and a property, with punishing regions cached."""

    def __init__(self, g: Csg, phi: LtlFormula = TRUE, max_states: int = DEFAULT_MAX_STATES,
                 complement_phi: bool = False):
        _check_game(g)
        self.game = g
        d = ltl_to_dpw(phi, max_states)
        if complement_phi:
            d = complement_dpw(d)
        self.gp: Cspg = build_parity_game(g, phi_dpw=d, max_states=max_states)
        self._pun: dict[int, frozenset[int]] = {}

    def punishing_region(self, j: int) -> frozenset[int]:
        if j not in self._pun:
            arena = coalition_arena(self.gp.arena, [j])
            win = as_winning_region(arena, self.gp.priorities[j])
            self._pun[j] = frozenset(range(self.gp.arena.n_states)) - win
        return self._pun[j]


def punishing_region(ctx: ParityContext, player) -> frozenset[int]:
    """Product states from which the other players can keep ``player`` from winning almost surely."""
    return ctx.punishing_region(ctx.gp.arena.player_index(player))


def _secure(ctx: ParityContext, s: int, d: tuple, losers: Iterable[int]) -> bool:
    """Every unilateral change of a loser's action keeps the successors inside their punishing region."""
    arena = ctx.gp.arena
    for j in losers:
        pun = ctx.punishing_region(j)
        for alt in arena.available[s][j]:
            d2 = d[:j] + (alt,) + d[j + 1:]
            if not arena.support(s, d2) <= pun:
                return False
    return True


@dataclass
class Restriction:
    states: frozenset[int]
    edges: dict[int, tuple]  # state -> surviving directions
    empty: bool

    def mdp(self, ctx: ParityContext) -> tuple[Mdp, list[int]]:
        """Merged one-controller MDP over the surviving states; also returns product indices."""
        arena = ctx.gp.arena
        keep = sorted(self.states)
        index = {s: k for k, s in enumerate(keep)}
        choices = tuple({d: {index[t]: p for t, p in arena.succ(s, d).items() if p > 0}
                         for d in self.edges[s]} for s in keep)
        k = Mdp(tuple(arena.states[s] for s in keep), index[arena.init], choices,
                tuple(ctx.gp.labels[s] for s in keep), tuple(ctx.gp.base[s] for s in keep))
        return k, keep


def restrict_to_punishment(ctx: ParityContext, losers: Iterable[int]) -> Restriction:
    """Keep states punishing for every loser and directions that are punishing-secure.

    Directions whose successors leave the kept states are then dropped, as
    are states left without directions, until nothing changes.
    """
    arena = ctx.gp.arena
    losers = sorted(losers)
    alive = set(range(arena.n_states))
    for j in losers:
        alive &= ctx.punishing_region(j)
    edges = {s: [d for d in arena.directions(s) if _secure(ctx, s, d, losers)] for s in alive}
    changed = True
    while changed:
        changed = False
        for s in sorted(alive):
            kept = [d for d in edges[s] if arena.support(s, d) <= alive]
            if len(kept) != len(edges[s]):
                edges[s] = kept
                changed = True
            if not kept:
                alive.discard(s)
                changed = True
    if arena.init not in alive:
        return Restriction(frozenset(), {}, True)
    return Restriction(frozenset(alive), {s: tuple(edges[s]) for s in alive}, False)


# ---------------------------------------------------------------------------
# Nash queries

def _sweep(ctx: ParityContext, phi_mode: Mode, detail: bool = True):
    """First (winners, losers, restriction, result) with a supporting equilibrium, else None."""
    gp = ctx.gp
    n = gp.arena.n_players
    for losers in _coalitions(n):
        winners = [i for i in range(n) if i not in losers]
        r = restrict_to_punishment(ctx, losers)
        if r.empty:
            continue
        k, keep = r.mdp(ctx)
        atoms = [Atom(tuple(gp.phi_priority[s] for s in keep), phi_mode)]
        atoms += [Atom(tuple(gp.priorities[i][s] for s in keep), Mode.AS) for i in winners]
        res = mdp_satisfies(k, atoms)
        if res:
            return winners, list(losers), r, res
    return None


def _nash_witness(ctx: ParityContext, found) -> dict:
    winners, losers, r, res = found
    g = ctx.game
    return {
        "winners": _names(g, winners),
        "winner_set": "supported winner set",
        "punished": _names(g, losers),
        "restricted_states": len(r.states),
        "restricted_directions": sum(len(v) for v in r.edges.values()),
        "controller_states": len(res.controller),
    }


def e_nash(g: Csg, phi: LtlFormula, mode: str = "as", max_states: int = DEFAULT_MAX_STATES) -> QueryVerdict:
    """Does some Nash equilibrium satisfy ``phi`` (almost surely, or with positive probability)?"""
    m = _check_mode(mode)
    ctx = ParityContext(g, phi, max_states)
    found = _sweep(ctx, m)
    if found is None:
        return QueryVerdict(False, {})
    return QueryVerdict(True, _nash_witness(ctx, found))


def a_nash(g: Csg, phi: LtlFormula, mode: str = "as", max_states: int = DEFAULT_MAX_STATES) -> QueryVerdict:
    """Do all Nash equilibria satisfy ``phi``?

    Searches for a counterexample equilibrium satisfying the dual of the
    requirement on the complemented property automaton.
    """
    m = _check_mode(mode)
    ctx = ParityContext(g, phi, max_states, complement_phi=True)
    found = _sweep(ctx, Mode.NZ if m == Mode.AS else Mode.AS)
    if found is None:
        return QueryVerdict(True, {})
    w = _nash_witness(ctx, found)
    w["counterexample"] = True
    return QueryVerdict(False, w)


def non_emptiness(g: Csg, max_states: int = DEFAULT_MAX_STATES) -> QueryVerdict:
    return e_nash(g, TRUE, "as", max_states)


def punishing_secure_check(g: Csg, profile, max_states: int = DEFAULT_MAX_STATES,
                           ctx: ParityContext | None = None) -> QueryVerdict:
    """Check the one-step punishment criterion directly on the parity product.

    For every player who loses under ``profile``, every (state, direction)
    pair played with positive probability must be punishing-secure for
    that player. Answers "yes" when all pairs pass. Pass ``ctx`` to reuse
    punishing regions across many profiles of the same game.
    """
    ctx = ctx or ParityContext(g, TRUE, max_states)
    strategies = _check_profile(g, profile)
    gp = ctx.gp
    mc = induced_markov_chain(gp, [strategies[i] for i in range(gp.arena.n_players)])
    losers = [j for j in range(gp.arena.n_players)
              if not mc_as_parity(mc, tuple(gp.priorities[j][b] for b in mc.base))]
    for v in range(mc.n_states):
        s = mc.base[v]
        for d in sorted(mc.state_directions[v]):
            for j in losers:
                if not _secure(ctx, s, d, [j]):
                    return QueryVerdict(False, {"player": g.arena.players[j], "state": str(gp.view(s)),
                                                "direction": list(d)})
    return QueryVerdict(True, {"winners": _names(g, set(range(gp.arena.n_players)) - set(losers))})


# ---------------------------------------------------------------------------
# Cooperative queries

def _goal_conjunction(g: Csg, coalition) -> LtlFormula:
    return conj_all(g.goals[i] for i in sorted(coalition))


def _core_search(g: Csg, phi: LtlFormula, phi_mode: Mode, complement_phi: bool, max_states: int):
    _check_game(g)
    n = g.arena.n_players
    d = ltl_to_dpw(phi, max_states)
    if complement_phi:
        d = complement_dpw(d)
    gp = build_parity_game(g, phi_dpw=d, max_states=max_states)
    k = induced_mdp(gp)
    base = k.base
    winnable: dict[tuple, bool] = {}

    def coalition_wins(b: tuple) -> bool:
        if b not in winnable:
            winnable[b] = is_winnable(g, b, _goal_conjunction(g, b), max_states)
        return winnable[b]

    for size in range(n, -1, -1):
        for a in itertools.combinations(range(n), size):
            atoms = [Atom(tuple(gp.phi_priority[s] for s in base), phi_mode)]
            for i in range(n):
                prio = tuple(gp.priorities[i][s] for s in base)
                if i in a:
                    atoms.append(Atom(prio, Mode.AS))
                else:
                    atoms.append(Atom(tuple(p + 1 for p in prio), Mode.NZ))
            if not mdp_satisfies(k, atoms):
                continue
            rest = [i for i in range(n) if i not in a]
            blocking = next((b for b in _coalitions(n, rest) if b and coalition_wins(b)), None)
            if blocking is None:
                return list(a), winnable
    return None, winnable


def e_core(g: Csg, phi: LtlFormula, mode: str = "as", max_states: int = DEFAULT_MAX_STATES) -> QueryVerdict:
    """Is there a core profile satisfying ``phi``?

    A profile with winner set ``A`` is in the core iff no nonempty coalition
    of losers can win its joint goal outright, so it suffices to find some
    ``A`` whose exact-winner requirement is realisable together with ``phi``
    and for which no coalition outside ``A`` is winnable.
    """
    m = _check_mode(mode)
    a, _ = _core_search(g, phi, m, False, max_states)
    if a is None:
        return QueryVerdict(False, {})
    return QueryVerdict(True, {"winners": _names(g, a)})


def a_core(g: Csg, phi: LtlFormula, mode: str = "as", max_states: int = DEFAULT_MAX_STATES) -> QueryVerdict:
    """Do all core profiles satisfy ``phi``? Answered by searching for a core counterexample."""
    m = _check_mode(mode)
    a, _ = _core_search(g, phi, Mode.NZ if m == Mode.AS else Mode.AS, True, max_states)
    if a is None:
        return QueryVerdict(True, {})
    return QueryVerdict(False, {"winners": _names(g, a), "counterexample": True})


def core_membership(g: Csg, profile, max_states: int = DEFAULT_MAX_STATES) -> QueryVerdict:
    """Is ``profile`` in the core, i.e. without a beneficial deviation of any losing coalition?"""
    _check_game(g)
    strategies = _check_profile(g, profile)
    n = g.arena.n_players
    mc = induced_markov_chain(g, [strategies[i] for i in range(n)])
    winners = [i for i in range(n) if mc_as_ltl(mc, g.goals[i], max_states)]
    losers = [i for i in range(n) if i not in winners]
    for b in _coalitions(n, losers):
        if b and is_winnable(g, b, _goal_conjunction(g, b), max_states):
            return QueryVerdict(False, {"coalition": _names(g, b), "winners": _names(g, winners)})
    return QueryVerdict(True, {"winners": _names(g, winners)})


def beneficial_deviation(g: Csg, profile, coalition, deviation, max_states: int = DEFAULT_MAX_STATES) -> QueryVerdict:
    """Is ``deviation`` (strategies for ``coalition``) a beneficial deviation from ``profile``?

    Every member must lose under ``profile`` and win almost surely under the
    deviation whatever the other players do; the others are merged into a
    single controller that tries to deny some member with positive probability.
    """
    _check_game(g)
    a = sorted({g.arena.player_index(p) for p in coalition})
    if not a:
        raise ModelError("coalition must be nonempty")
    strategies = _check_profile(g, profile)
    dev = _check_profile(g, deviation, a)
    n = g.arena.n_players
    mc = induced_markov_chain(g, [strategies[i] for i in range(n)])
    k = induced_mdp(g, {i: dev[i] for i in a})
    for i in a:
        name = g.arena.players[i]
        if mc_as_ltl(mc, g.goals[i], max_states):
            return QueryVerdict(False, {"player": name, "reason": "already wins under the profile"})
        if mdp_nz_ltl(k, neg(g.goals[i]), max_states):
            return QueryVerdict(False, {"player": name, "reason": "others can deny the goal"})
    return QueryVerdict(True, {"coalition": _names(g, a)})
