"""Game models and the product constructions built on them.

States, players and actions are referred to by index internally; names are
kept for I/O and diagnostics. All probabilities are ``Fraction``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

from .automata import DEFAULT_MAX_STATES, Dpw, AutomatonTooLarge, letter_mask, ltl_to_dpw
from .ltl import LtlFormula

Direction = tuple  # one action name per player
Dist = dict  # target -> Fraction


class ModelError(ValueError):
    """Inconsistent model, profile or query arguments."""


@dataclass
class Arena:
    """A concurrent stochastic game arena.

    ``trans`` maps ``(state index, direction)`` to a distribution over state
    indices; it is defined exactly on the available directions.
    """

    players: tuple[str, ...]
    states: tuple[Hashable, ...]
    init: int
    actions: tuple[tuple[str, ...], ...]
    available: tuple[tuple[tuple[str, ...], ...], ...]  # available[s][i]
    trans: dict[tuple[int, Direction], Dist]

    @property
    def n_players(self) -> int:
        return len(self.players)

    @property
    def n_states(self) -> int:
        return len(self.states)

    def state_index(self, name) -> int:
        try:
            return self._state_index[name]
        except AttributeError:
            self._state_index = {s: i for i, s in enumerate(self.states)}
            return self.state_index(name)
        except KeyError:
            raise ModelError(f"unknown state {name!r}") from None

    def player_index(self, name) -> int:
        if isinstance(name, int) and 0 <= name < self.n_players:
            return name
        try:
            return self.players.index(name)
        except ValueError:
            raise ModelError(f"unknown player {name!r}") from None

    def directions(self, s: int) -> list[Direction]:
        return list(itertools.product(*self.available[s]))

    def succ(self, s: int, d: Direction) -> Dist:
        return self.trans[(s, d)]

    def support(self, s: int, d: Direction) -> frozenset[int]:
        return frozenset(t for t, p in self.trans[(s, d)].items() if p > 0)


Csga = Arena


def slice_direction(d: Direction, coalition: Sequence[int]) -> tuple:
    return tuple(d[i] for i in coalition)


def compose_direction(n: int, coalition: Sequence[int], a_slice: Sequence, rest_slice: Sequence) -> Direction:
    """Direction taking coalition actions from ``a_slice`` and the rest from ``rest_slice``."""
    out = [None] * n
    rest = [i for i in range(n) if i not in coalition]
    for i, a in zip(coalition, a_slice):
        out[i] = a
    for i, a in zip(rest, rest_slice):
        out[i] = a
    return tuple(out)


@dataclass
class Csg:
    arena: Arena
    labels: tuple[frozenset[str], ...]
    goals: tuple[LtlFormula, ...]

    @property
    def players(self):
        return self.arena.players

    def view(self, s: int):
        """The state name strategies observe at state index ``s``."""
        return self.arena.states[s]


@dataclass
class StrategyTransducer:
    """A finite-memory randomized strategy ``(Q, q0, delta, tau)``.

    ``delta`` and ``tau`` are keyed by ``(memory state, game state name)``.
    """

    states: tuple[Hashable, ...]
    init: Hashable
    delta: dict[tuple[Hashable, Hashable], Hashable]
    tau: dict[tuple[Hashable, Hashable], dict[str, Fraction]]

    @classmethod
    def memoryless(cls, choice: Mapping[Hashable, Mapping[str, object] | str]) -> "StrategyTransducer":
        """One memory state; ``choice[s]`` is an action name or a distribution."""
        tau = {}
        for s, c in choice.items():
            if isinstance(c, str):
                tau[(0, s)] = {c: Fraction(1)}
            else:
                tau[(0, s)] = {a: Fraction(p) for a, p in c.items()}
        return cls((0,), 0, {(0, s): 0 for s in choice}, tau)

    def move(self, q, s):
        try:
            return self.delta[(q, s)]
        except KeyError:
            raise ModelError(f"strategy has no memory update for ({q!r}, {s!r})") from None

    def act(self, q, s) -> dict[str, Fraction]:
        try:
            return self.tau[(q, s)]
        except KeyError:
            raise ModelError(f"strategy has no action distribution for ({q!r}, {s!r})") from None


@dataclass
class Mc:
    states: tuple[Hashable, ...]
    init: int
    trans: tuple[dict[int, Fraction], ...]
    labels: tuple[frozenset[str], ...]
    base: tuple[int, ...] = ()
    priority: tuple[int, ...] | None = None
    # (source, target) -> directions of the game that carry mass on the edge
    edge_directions: dict[tuple[int, int], frozenset] = field(default_factory=dict)
    # state -> directions played there with positive probability
    state_directions: tuple[frozenset, ...] = ()

    @property
    def n_states(self) -> int:
        return len(self.states)

    def successors(self, s: int) -> list[int]:
        return sorted(t for t, p in self.trans[s].items() if p > 0)


@dataclass
class Mdp:
    """A one-controller arena. ``choices[s]`` maps action labels to distributions."""

    states: tuple[Hashable, ...]
    init: int
    choices: tuple[dict[Hashable, dict[int, Fraction]], ...]
    labels: tuple[frozenset[str], ...]
    base: tuple[int, ...] = ()

    @property
    def n_states(self) -> int:
        return len(self.states)

    def support(self, s: int, a) -> frozenset[int]:
        return frozenset(t for t, p in self.choices[s][a].items() if p > 0)

    @classmethod
    def from_mc(cls, m: Mc) -> "Mdp":
        return cls(m.states, m.init, tuple({"-": dict(row)} for row in m.trans), m.labels, m.base)


@dataclass
class Cspg:
    """Product of a game with parity automata for each goal and a property.

    Product states are ``(base state name, q_1, ..., q_n, q_phi)``.
    """

    arena: Arena
    labels: tuple[frozenset[str], ...]
    base: tuple[int, ...]
    priorities: tuple[tuple[int, ...], ...]  # per player
    phi_priority: tuple[int, ...]
    source: Csg

    def view(self, s: int):
        return self.source.arena.states[self.base[s]]

    @property
    def players(self):
        return self.arena.players


# ---------------------------------------------------------------------------
# Validation

def validate_model(g: Csg) -> list[str]:
    """Return diagnostics; an empty list means the model is well formed."""
    out: list[str] = []
    a = g.arena
    if not a.players:
        out.append("model has no players")
    if len(g.goals) != a.n_players:
        out.append(f"expected {a.n_players} goals, found {len(g.goals)}")
    if len(g.labels) != a.n_states:
        out.append(f"labeling covers {len(g.labels)} of {a.n_states} states")
    if not 0 <= a.init < a.n_states:
        out.append("initial state out of range")
    if len(a.available) != a.n_states:
        out.append("availability map does not cover every state")
        return out
    for s, name in enumerate(a.states):
        for i, p in enumerate(a.players):
            avail = a.available[s][i]
            if not avail:
                out.append(f"state {name}: player {p} has no available action")
            for act in avail:
                if act not in a.actions[i]:
                    out.append(f"state {name}: action {act} is not an action of player {p}")
        for d in a.directions(s):
            if (s, d) not in a.trans:
                out.append(f"state {name}: no transition for direction {d}")
                continue
            out.extend(_check_dist(a.trans[(s, d)], range(a.n_states), f"state {name}, direction {d}"))
    for (s, d) in a.trans:
        if not (0 <= s < a.n_states) or d not in set(a.directions(s)):
            where = a.states[s] if 0 <= s < a.n_states else s
            out.append(f"state {where}: transition given for unavailable direction {d}")
    return out


def _check_dist(dist: Mapping, domain, where: str) -> list[str]:
    out = []
    dom = set(domain)
    total = Fraction(0)
    for t, p in dist.items():
        if t not in dom:
            out.append(f"{where}: unknown target {t!r}")
        if not isinstance(p, Fraction) or p < 0 or p > 1:
            out.append(f"{where}: probability {p} not a rational in [0, 1]")
        total += Fraction(p)
    if total != 1:
        out.append(f"{where}: row sum != 1 (got {total})")
    if not any(p > 0 for p in dist.values()):
        out.append(f"{where}: empty support")
    return out


def validate_strategy(g: Csg, player: int, t: StrategyTransducer) -> list[str]:
    out = []
    a = g.arena
    pname = a.players[player]
    if t.init not in t.states:
        out.append(f"strategy of {pname}: initial memory state not declared")
    for q in t.states:
        for s in range(a.n_states):
            key = (q, a.states[s])
            if key not in t.delta:
                out.append(f"strategy of {pname}: delta undefined on {key}")
            elif t.delta[key] not in t.states:
                out.append(f"strategy of {pname}: delta leads to unknown memory state {t.delta[key]!r}")
            if key not in t.tau:
                out.append(f"strategy of {pname}: tau undefined on {key}")
                continue
            dist = t.tau[key]
            out.extend(_check_dist(dist, a.actions[player], f"strategy of {pname} at {key}"))
            bad = [x for x, p in dist.items() if p > 0 and x not in a.available[s][player]]
            if bad:
                out.append(f"strategy of {pname} at {key}: support violates availability ({', '.join(map(str, bad))})")
    return out


def normalize_profile(arena: Arena, profile) -> tuple[StrategyTransducer, ...]:
    if isinstance(profile, Mapping):
        unknown = [k for k in profile if k not in arena.players and not isinstance(k, int)]
        if unknown:
            raise ModelError(f"profile names unknown players {unknown}")
        out = []
        for i, p in enumerate(arena.players):
            t = profile.get(p, profile.get(i))
            if t is None:
                raise ModelError(f"profile lacks a strategy for {p}")
            out.append(t)
        return tuple(out)
    profile = tuple(profile)
    if len(profile) != arena.n_players:
        raise ModelError(f"profile has {len(profile)} strategies for {arena.n_players} players")
    return profile


def _strategy_game(game) -> tuple[Arena, tuple]:
    """Arena and labels of a Csg or Cspg."""
    return game.arena, game.labels


# ---------------------------------------------------------------------------
# Induced chains and decision processes

def induced_markov_chain(game, profile) -> Mc:
    """Resolve all choices of ``game`` (a Csg or Cspg) with a full profile.

    MC states are ``(state index, memory states...)``; only the fragment
    reachable from the initial state is built.
    """
    arena, labels = _strategy_game(game)
    strategies = normalize_profile(arena, profile)
    n = arena.n_players
    start = (arena.init,) + tuple(t.init for t in strategies)
    index = {start: 0}
    order = [start]
    rows: list[dict[int, Fraction]] = []
    edge_dirs: dict[tuple[int, int], set] = {}
    state_dirs: list[frozenset] = []
    i = 0
    while i < len(order):
        v = order[i]
        s, qs = v[0], v[1:]
        name = game.view(s)
        nxt_q = tuple(strategies[k].move(qs[k], name) for k in range(n))
        dists = []
        for k in range(n):
            dk = {x: Fraction(p) for x, p in strategies[k].act(qs[k], name).items() if p > 0}
            bad = [x for x in dk if x not in arena.available[s][k]]
            if bad:
                raise ModelError(f"strategy of {arena.players[k]} plays unavailable {bad} at {name!r}")
            dists.append(sorted(dk.items()))
        row: dict[int, Fraction] = {}
        played = set()
        for combo in itertools.product(*dists):
            d = tuple(x for x, _ in combo)
            w = Fraction(1)
            for _, p in combo:
                w *= p
            played.add(d)
            for t, p in arena.succ(s, d).items():
                if p == 0:
                    continue
                target = (t,) + nxt_q
                if target not in index:
                    index[target] = len(order)
                    order.append(target)
                j = index[target]
                row[j] = row.get(j, Fraction(0)) + w * p
                edge_dirs.setdefault((i, j), set()).add(d)
        rows.append(row)
        state_dirs.append(frozenset(played))
        i += 1
    names = tuple((arena.states[v[0]],) + v[1:] for v in order)
    return Mc(
        states=names,
        init=0,
        trans=tuple(rows),
        labels=tuple(labels[v[0]] for v in order),
        base=tuple(v[0] for v in order),
        edge_directions={k: frozenset(v) for k, v in edge_dirs.items()},
        state_directions=tuple(state_dirs),
    )


def induced_mdp(game, fixed: Mapping[int, StrategyTransducer] | None = None) -> Mdp:
    """Fix strategies for some players; the rest act as a single controller.

    Controller actions are tuples of actions of the free players (in player
    order). With nothing fixed the controller picks whole directions.
    """
    arena, labels = _strategy_game(game)
    fixed = {arena.player_index(k): v for k, v in (fixed or {}).items()}
    bound = sorted(fixed)
    free = [i for i in range(arena.n_players) if i not in fixed]
    n = arena.n_players
    start = (arena.init,) + tuple(fixed[k].init for k in bound)
    index = {start: 0}
    order = [start]
    choices: list[dict] = []
    i = 0
    while i < len(order):
        v = order[i]
        s, qs = v[0], v[1:]
        name = game.view(s)
        nxt_q = tuple(fixed[k].move(q, name) for k, q in zip(bound, qs))
        fixed_dists = []
        for k, q in zip(bound, qs):
            dk = {x: Fraction(p) for x, p in fixed[k].act(q, name).items() if p > 0}
            bad = [x for x in dk if x not in arena.available[s][k]]
            if bad:
                raise ModelError(f"strategy of {arena.players[k]} plays unavailable {bad} at {name!r}")
            fixed_dists.append(sorted(dk.items()))
        acts: dict = {}
        for free_slice in itertools.product(*(arena.available[s][k] for k in free)):
            dist: dict[int, Fraction] = {}
            for combo in itertools.product(*fixed_dists):
                w = Fraction(1)
                for _, p in combo:
                    w *= p
                d = compose_direction(n, bound, [x for x, _ in combo], free_slice)
                for t, p in arena.succ(s, d).items():
                    if p == 0:
                        continue
                    target = (t,) + nxt_q
                    if target not in index:
                        index[target] = len(order)
                        order.append(target)
                    j = index[target]
                    dist[j] = dist.get(j, Fraction(0)) + w * p
            acts[tuple(free_slice)] = dist
        choices.append(acts)
        i += 1
    names = tuple((arena.states[v[0]],) + v[1:] for v in order)
    return Mdp(names, 0, tuple(choices), tuple(labels[v[0]] for v in order), tuple(v[0] for v in order))


def coalition_arena(arena: Arena, coalition: Iterable) -> Arena:
    """Two-player arena: the coalition against everyone else.

    Actions of each side are tuples of member actions. If the coalition is
    the whole player set, the opponent has a single dummy action ``()``.
    """
    A = sorted({arena.player_index(p) for p in coalition})
    if not A:
        raise ModelError("coalition must be nonempty")
    rest = [i for i in range(arena.n_players) if i not in A]
    n = arena.n_players
    avail = []
    trans = {}
    for s in range(arena.n_states):
        a1 = tuple(itertools.product(*(arena.available[s][i] for i in A)))
        a2 = tuple(itertools.product(*(arena.available[s][i] for i in rest)))
        avail.append((a1, a2))
        for x in a1:
            for y in a2:
                trans[(s, (x, y))] = arena.trans[(s, compose_direction(n, A, x, y))]
    acts1 = tuple(itertools.product(*(arena.actions[i] for i in A)))
    acts2 = tuple(itertools.product(*(arena.actions[i] for i in rest)))
    names = ("+".join(arena.players[i] for i in A), "+".join(arena.players[i] for i in rest))
    return Arena(names, arena.states, arena.init, (acts1, acts2), tuple(avail), trans)


def product_with_automata(arena: Arena, labels: Sequence[frozenset], dpws: Sequence[Dpw],
                          max_states: int = DEFAULT_MAX_STATES):
    """Reachable product of an arena with deterministic automata.

    Automata read the label of the state being left, so product state
    ``(s, q...)`` carries the automaton states reached before reading ``s``.
    Returns ``(arena, base index per state, automaton states per state)``.
    """
    start = (arena.init,) + tuple(d.initial for d in dpws)
    index = {start: 0}
    order = [start]
    trans = {}
    masks = [[letter_mask(d.ap, labels[s]) for s in range(arena.n_states)] for d in dpws]
    i = 0
    while i < len(order):
        v = order[i]
        s, qs = v[0], v[1:]
        nq = tuple(d.delta[q][masks[k][s]] for k, (d, q) in enumerate(zip(dpws, qs)))
        for dirn in arena.directions(s):
            dist = {}
            for t, p in arena.succ(s, dirn).items():
                key = (t,) + nq
                if key not in index:
                    index[key] = len(order)
                    order.append(key)
                    if len(order) > max_states:
                        raise AutomatonTooLarge(f"product exceeds {max_states} states")
                dist[index[key]] = dist.get(index[key], Fraction(0)) + p
            trans[(i, dirn)] = dist
        i += 1
    names = tuple((arena.states[v[0]],) + v[1:] for v in order)
    prod = Arena(arena.players, names, 0, arena.actions,
                 tuple(arena.available[v[0]] for v in order), trans)
    return prod, tuple(v[0] for v in order), tuple(v[1:] for v in order)


def build_parity_game(g: Csg, phi: LtlFormula | None = None, phi_dpw: Dpw | None = None,
                      max_states: int = DEFAULT_MAX_STATES) -> Cspg:
    """Product of ``g`` with the automata of every goal and of ``phi``."""
    goal_dpws = [ltl_to_dpw(f, max_states) for f in g.goals]
    if phi_dpw is None:
        if phi is None:
            raise ModelError("need a property formula or automaton")
        phi_dpw = ltl_to_dpw(phi, max_states)
    dpws = goal_dpws + [phi_dpw]
    prod, base, qs = product_with_automata(g.arena, g.labels, dpws, max_states)
    prios = tuple(tuple(goal_dpws[i].priority[q[i]] for q in qs) for i in range(len(goal_dpws)))
    phi_prio = tuple(phi_dpw.priority[q[-1]] for q in qs)
    return Cspg(prod, tuple(g.labels[b] for b in base), base, prios, phi_prio, g)
