"""Ready-made games for tests, examples and regression checks.

Includes the sender/receiver transmission game, the two reduction gadgets
that turn MDP model checking into a membership or a deviation question,
a matching-pennies style concurrent game, a two-server lossy channel
system, and random generators for small games.
"""
from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Sequence

from .io import csg_from_dict, format_prob
from .model import Arena, Csg, Mdp, StrategyTransducer


# ---------------------------------------------------------------------------
# Sender / receiver

def transmission_dict(n: int = 3, p: Fraction | str = Fraction(1, 2)) -> dict:
    """Model document for the n-block transmission game.

    In ``s_i`` with ``i < n`` a joint (c_S, c_R) moves on to ``s_{i+1}``
    with probability ``1 - p`` and falls back to ``s0`` otherwise; any other
    action pair restarts at ``s0``. ``s_n`` is absorbing and labelled psi.
    """
    p = Fraction(p)
    if n < 1 or not 0 < p < 1:
        raise ValueError("need n >= 1 and 0 < p < 1")
    states = [f"s{i}" for i in range(n + 1)]
    trans = []
    for i in range(n + 1):
        for a_s, a_r in itertools.product(("c_S", "i_S"), ("c_R", "i_R")):
            if i == n:
                dist = {states[n]: "1"}
            elif (a_s, a_r) == ("c_S", "c_R"):
                dist = {states[i + 1]: format_prob(1 - p), "s0": format_prob(p)}
            else:
                dist = {"s0": "1"}
            trans.append({"state": states[i], "profile": {"S": a_s, "R": a_r}, "dist": dist})
    return {
        "players": ["S", "R"],
        "states": states,
        "init": "s0",
        "actions": {"S": ["c_S", "i_S"], "R": ["c_R", "i_R"]},
        "transitions": trans,
        "labels": {states[n]: ["psi"]},
        "goals": {"S": "F psi", "R": "F psi"},
    }


def transmission_game(n: int = 3, p: Fraction | str = Fraction(1, 2)) -> Csg:
    return csg_from_dict(transmission_dict(n, p))


def constant_strategy(g: Csg, player: str, action: str) -> StrategyTransducer:
    """Memoryless strategy playing ``action`` wherever it is available, else the first available action."""
    i = g.arena.player_index(player)
    choice = {}
    for s, name in enumerate(g.arena.states):
        avail = g.arena.available[s][i]
        choice[name] = action if action in avail else avail[0]
    return StrategyTransducer.memoryless(choice)


def mixed_strategy(g: Csg, player: str, dist: dict) -> StrategyTransducer:
    i = g.arena.player_index(player)
    choice = {}
    for s, name in enumerate(g.arena.states):
        avail = g.arena.available[s][i]
        d = {a: Fraction(x) for a, x in dist.items() if a in avail}
        choice[name] = d if sum(d.values()) == 1 else avail[0]
    return StrategyTransducer.memoryless(choice)


def both_communicate(g: Csg) -> dict:
    return {"S": constant_strategy(g, "S", "c_S"), "R": constant_strategy(g, "R", "c_R")}


def both_idle(g: Csg) -> dict:
    return {"S": constant_strategy(g, "S", "i_S"), "R": constant_strategy(g, "R", "i_R")}


# ---------------------------------------------------------------------------
# Reduction gadgets

def _mdp_rows(k: Mdp, prefix: str) -> list[str]:
    return [f"{prefix}{i}" for i in range(k.n_states)]


def membership_gadget(k: Mdp, phi: str, fresh: str = "entered") -> tuple[Csg, dict]:
    """One-player game whose membership answer decides AS(phi) on ``k``.

    From ``start`` the player either commits to a dead loop (action ``a``)
    or enters ``k`` (action ``abar``). The goal ``X (phi & fresh)`` can only
    be met by entering, so the profile "play a" is an equilibrium exactly
    when no controller of ``k`` satisfies phi almost surely.
    """
    names = _mdp_rows(k, "k")
    acts = sorted({str(a) for c in k.choices for a in c})
    states = ["start", "dead"] + names
    available = {"start": {"P": ["a", "abar"]}, "dead": {"P": ["a"]}}
    trans = [
        {"state": "start", "profile": ["a"], "dist": {"dead": "1"}},
        {"state": "start", "profile": ["abar"], "dist": {names[k.init]: "1"}},
        {"state": "dead", "profile": ["a"], "dist": {"dead": "1"}},
    ]
    for s, row in enumerate(k.choices):
        available[names[s]] = {"P": sorted(str(a) for a in row)}
        for a, dist in row.items():
            trans.append({"state": names[s], "profile": [str(a)],
                          "dist": {names[t]: format_prob(x) for t, x in dist.items() if x > 0}})
    labels = {names[s]: sorted(k.labels[s]) for s in range(k.n_states)}
    labels[names[k.init]] = sorted(set(k.labels[k.init]) | {fresh})
    doc = {
        "players": ["P"],
        "states": states,
        "init": "start",
        "actions": {"P": ["a", "abar"] + [a for a in acts if a not in ("a", "abar")]},
        "available": available,
        "transitions": trans,
        "labels": labels,
        "goals": {"P": f"X (({phi}) & {fresh})"},
    }
    g = csg_from_dict(doc)
    return g, {"P": constant_strategy(g, "P", "a")}


def deviation_gadget(k: Mdp, phi: str, sat_word: Sequence[Sequence[str]],
                     unsat_word: Sequence[Sequence[str]]) -> tuple[Csg, dict, dict]:
    """Two-player game whose deviation answer is decided by model checking ``k``.

    ``sat_word`` and ``unsat_word`` are cycles of letters whose infinite
    repetition does, respectively does not, satisfy phi; they form the two
    deterministic chains next to ``k``. Player 1 wants ``X phi``, player 2
    wants its negation. The profile plays (a, b) at the start, and the
    deviation of player 2 switches to ``bbar``.
    """
    names = _mdp_rows(k, "k")
    sat = [f"yes{i}" for i in range(len(sat_word))]
    uns = [f"no{i}" for i in range(len(unsat_word))]
    acts1 = sorted({str(a) for c in k.choices for a in c} | {"a", "abar"})
    states = ["start"] + sat + uns + names
    available = {"start": {"P1": ["a", "abar"], "P2": ["b", "bbar"]}}
    trans = [
        {"state": "start", "profile": ["a", "b"], "dist": {sat[0]: "1"}},
        {"state": "start", "profile": ["a", "bbar"], "dist": {uns[0]: "1"}},
        {"state": "start", "profile": ["abar", "b"], "dist": {names[k.init]: "1"}},
        {"state": "start", "profile": ["abar", "bbar"], "dist": {names[k.init]: "1"}},
    ]
    labels = {}
    for cyc, word in ((sat, sat_word), (uns, unsat_word)):
        for i, s in enumerate(cyc):
            available[s] = {"P1": ["a"], "P2": ["b"]}
            trans.append({"state": s, "profile": ["a", "b"], "dist": {cyc[(i + 1) % len(cyc)]: "1"}})
            labels[s] = sorted(word[i])
    for s, row in enumerate(k.choices):
        available[names[s]] = {"P1": sorted(str(a) for a in row), "P2": ["b"]}
        for a, dist in row.items():
            trans.append({"state": names[s], "profile": [str(a), "b"],
                          "dist": {names[t]: format_prob(x) for t, x in dist.items() if x > 0}})
        labels[names[s]] = sorted(k.labels[s])
    doc = {
        "players": ["P1", "P2"],
        "states": states,
        "init": "start",
        "actions": {"P1": acts1, "P2": ["b", "bbar"]},
        "available": available,
        "transitions": trans,
        "labels": labels,
        "goals": {"P1": f"X ({phi})", "P2": f"!X ({phi})"},
    }
    g = csg_from_dict(doc)
    profile = {"P1": constant_strategy(g, "P1", "a"), "P2": constant_strategy(g, "P2", "b")}
    deviation = {"P2": constant_strategy(g, "P2", "bbar")}
    return g, profile, deviation


# ---------------------------------------------------------------------------
# Matching game

def matching_arena() -> tuple[Arena, tuple[int, ...]]:
    """Two-player concurrent arena with priorities for player 1.

    In ``s0`` both players pick heads or tails; a match moves to the
    even-priority sink, a mismatch stays in odd-priority ``s0``.
    """
    trans = {}
    for x, y in itertools.product("ht", "ht"):
        trans[(0, ((x,), (y,)))] = {1 if x == y else 0: Fraction(1)}
    trans[(1, (("h",), ("h",)))] = {1: Fraction(1)}
    acts = (tuple((c,) for c in "ht"),) * 2
    avail = (acts, ((("h",),), (("h",),)))
    arena = Arena(("P1", "P2"), ("s0", "sink"), 0, acts, avail, trans)
    return arena, (1, 0)


def matching_game() -> Csg:
    """Matching pennies with exclusive goals: P1 wants a match, P2 a mismatch, both forever after."""
    trans = []
    for x, y in itertools.product(("h1", "t1"), ("h2", "t2")):
        same = x[0] == y[0]
        trans.append({"state": "s0", "profile": [x, y], "dist": {"match" if same else "miss": "1"}})
    for s in ("match", "miss"):
        trans.append({"state": s, "profile": ["h1", "h2"], "dist": {s: "1"}})
    doc = {
        "players": ["P1", "P2"],
        "states": ["s0", "match", "miss"],
        "init": "s0",
        "actions": {"P1": ["h1", "t1"], "P2": ["h2", "t2"]},
        "available": {"match": {"P1": ["h1"], "P2": ["h2"]}, "miss": {"P1": ["h1"], "P2": ["h2"]}},
        "transitions": trans,
        "labels": {"match": ["m"], "miss": ["x"]},
        "goals": {"P1": "F m", "P2": "F x"},
    }
    return csg_from_dict(doc)


# ---------------------------------------------------------------------------
# Lossy channel system with two servers

def lossy_channel_dict(p: Fraction | str = Fraction(1, 2)) -> dict:
    """Two servers, inboxes of capacity one, a single message kind.

    A state records which inboxes hold a message. ``snd`` puts a message in
    the other server's inbox, failing with probability ``p``; ``pop``
    empties one's own inbox and is forced when it is full; ``idle`` does
    nothing. Propositions ``snd_i_j`` and ``pop_j_i`` mark the step just
    taken, so states also remember the last actions.
    """
    p = Fraction(p)
    acts = {0: ["snd0", "pop0", "idle0"], 1: ["snd1", "pop1", "idle1"]}

    def name(box, last):
        return f"b{box[0]}{box[1]}_{last[0]}_{last[1]}"

    def avail(box, i):
        return [f"pop{i}"] if box[i] else [f"snd{i}", f"idle{i}"]

    start = ((0, 0), ("idle0", "idle1"))
    seen = {start}
    order = [start]
    trans = []
    k = 0
    while k < len(order):
        box, last = order[k]
        k += 1
        for a0, a1 in itertools.product(avail(box, 0), avail(box, 1)):
            base = list(box)
            for i, a in ((0, a0), (1, a1)):
                if a.startswith("pop"):
                    base[i] = 0
            outcomes = [(tuple(base), Fraction(1))]
            for i, a in ((0, a0), (1, a1)):
                if a.startswith("snd"):
                    j = 1 - i
                    nxt = []
                    for b, w in outcomes:
                        ok = list(b)
                        ok[j] = 1
                        nxt.append((tuple(ok), w * (1 - p)))
                        nxt.append((b, w * p))
                    outcomes = nxt
            dist: dict = {}
            for b, w in outcomes:
                v = (b, (a0, a1))
                if v not in seen:
                    seen.add(v)
                    order.append(v)
                key = name(*v)
                dist[key] = dist.get(key, Fraction(0)) + w
            trans.append({"state": name(box, last), "profile": [a0, a1],
                          "dist": {t: format_prob(w) for t, w in dist.items()}})
    labels = {}
    for box, last in order:
        lab = []
        if last[0] == "snd0":
            lab.append("snd_0_1")
        if last[1] == "snd1":
            lab.append("snd_1_0")
        if last[0] == "pop0":
            lab.append("pop_0_1")
        if last[1] == "pop1":
            lab.append("pop_1_0")
        if lab:
            labels[name(box, last)] = lab
    return {
        "players": ["S0", "S1"],
        "states": [name(*v) for v in order],
        "init": name(*start),
        "actions": {"S0": acts[0], "S1": acts[1]},
        "available": {name(*v): {"S0": avail(v[0], 0), "S1": avail(v[0], 1)} for v in order},
        "transitions": trans,
        "labels": labels,
        "goals": {"S0": "G (snd_0_1 -> F pop_1_0)", "S1": "G (snd_1_0 -> F pop_0_1)"},
    }


def lossy_channel_game(p: Fraction | str = Fraction(1, 2)) -> Csg:
    return csg_from_dict(lossy_channel_dict(p))


# ---------------------------------------------------------------------------
# Random small games

def random_game(rng: random.Random, n_players: int = 2, max_states: int = 3, max_actions: int = 2,
                props: Sequence[str] = ("p",), goal_pool: Sequence[str] = ("F p", "G p", "G !p", "F !p"),
                dirac_bias: float = 0.6) -> Csg:
    n_states = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n_states)]
    players = [f"P{i}" for i in range(n_players)]
    actions = {p: [f"{p.lower()}{k}" for k in range(max_actions)] for p in players}
    available = {s: {p: actions[p][:rng.randint(1, max_actions)] for p in players} for s in states}
    trans = []
    for s in states:
        for prof in itertools.product(*(available[s][p] for p in players)):
            if rng.random() < dirac_bias:
                dist = {rng.choice(states): "1"}
            else:
                targets = rng.sample(states, rng.randint(1, n_states))
                weights = [rng.randint(1, 3) for _ in targets]
                total = sum(weights)
                dist = {t: format_prob(Fraction(w, total)) for t, w in zip(targets, weights)}
            trans.append({"state": s, "profile": list(prof), "dist": dist})
    labels = {s: sorted(q for q in props if rng.random() < 0.5) for s in states}
    doc = {
        "players": players,
        "states": states,
        "init": "s0",
        "actions": actions,
        "available": available,
        "transitions": trans,
        "labels": labels,
        "goals": {p: rng.choice(list(goal_pool)) for p in players},
    }
    return csg_from_dict(doc)


def pure_memoryless_profiles(g: Csg):
    """Every profile where each player picks one available action per state."""
    a = g.arena
    per_player = []
    for i in range(a.n_players):
        options = [a.available[s][i] for s in range(a.n_states)]
        strategies = []
        for pick in itertools.product(*options):
            strategies.append(StrategyTransducer.memoryless(dict(zip(a.states, pick))))
        per_player.append(strategies)
    for combo in itertools.product(*per_player):
        yield dict(zip(a.players, combo))


def perturb(g: Csg, rng: random.Random) -> Csg:
    """Same supports, fresh positive probabilities."""
    trans = {}
    for key, dist in g.arena.trans.items():
        support = [t for t, x in sorted(dist.items()) if x > 0]
        weights = [rng.randint(1, 9) for _ in support]
        total = sum(weights)
        trans[key] = {t: Fraction(w, total) for t, w in zip(support, weights)}
    a = g.arena
    return Csg(Arena(a.players, a.states, a.init, a.actions, a.available, trans), g.labels, g.goals)


def random_mdp(rng: random.Random, n_states: int = 3, n_actions: int = 2, props: Sequence[str] = ("p",)) -> Mdp:
    choices = []
    for _ in range(n_states):
        row = {}
        for a in range(rng.randint(1, n_actions)):
            targets = rng.sample(range(n_states), rng.randint(1, n_states))
            row[f"m{a}"] = {t: Fraction(1, len(targets)) for t in targets}
        choices.append(row)
    labels = tuple(frozenset(q for q in props if rng.random() < 0.5) for _ in range(n_states))
    return Mdp(tuple(range(n_states)), 0, tuple(choices), labels, tuple(range(n_states)))
