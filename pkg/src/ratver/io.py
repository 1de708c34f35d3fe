"""JSON model and strategy formats.

Probabilities are written as exact fraction strings such as ``"1/2"``;
integers are accepted too. Floats are rejected because they are not exact.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .ltl import LtlSyntaxError, parse_ltl
from .model import Arena, Csg, ModelError, StrategyTransducer


def parse_prob(x: Any, where: str = "") -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise ModelError(f"{where}: probability {x!r} must be an integer or a fraction string")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise ModelError(f"{where}: cannot read probability {x!r}") from None


def format_prob(p: Fraction) -> str:
    p = Fraction(p)
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def _need(d: Mapping, key: str, where: str = "model"):
    if key not in d:
        raise ModelError(f"{where}: missing field {key!r}")
    return d[key]


def csg_from_dict(d: Mapping) -> Csg:
    """Build a game from the JSON document structure.

    Structural problems (unknown names, malformed fields) raise
    ``ModelError``; semantic ones such as bad row sums are left for
    ``validate_model`` so they can be reported together.
    """
    players = tuple(str(p) for p in _need(d, "players"))
    states = tuple(str(s) for s in _need(d, "states"))
    if len(set(players)) != len(players):
        raise ModelError("duplicate player names")
    if len(set(states)) != len(states):
        raise ModelError("duplicate state names")
    sidx = {s: i for i, s in enumerate(states)}
    init = _need(d, "init")
    if init not in sidx:
        raise ModelError(f"initial state {init!r} is not a declared state")

    raw_actions = _need(d, "actions")
    if isinstance(raw_actions, Mapping):
        actions = tuple(tuple(str(a) for a in raw_actions.get(p, ())) for p in players)
    else:
        actions = tuple(tuple(str(a) for a in acts) for acts in raw_actions)
    if len(actions) != len(players):
        raise ModelError("actions must be given for every player")

    raw_avail = d.get("available")
    available = []
    for s in states:
        if raw_avail is None:
            available.append(actions)
            continue
        entry = raw_avail.get(s) if isinstance(raw_avail, Mapping) else raw_avail[sidx[s]]
        if entry is None:
            available.append(actions)
        elif isinstance(entry, Mapping):
            available.append(tuple(tuple(str(a) for a in entry.get(p, actions[i])) for i, p in enumerate(players)))
        else:
            available.append(tuple(tuple(str(a) for a in acts) for acts in entry))
    if isinstance(raw_avail, Mapping):
        unknown = [s for s in raw_avail if s not in sidx]
        if unknown:
            raise ModelError(f"availability given for unknown states {unknown}")

    trans: dict = {}
    for k, row in enumerate(_need(d, "transitions")):
        where = f"transition #{k}"
        s = _need(row, "state", where)
        if s not in sidx:
            raise ModelError(f"{where}: unknown state {s!r}")
        prof = _need(row, "profile", where)
        if isinstance(prof, Mapping):
            missing = [p for p in players if p not in prof]
            if missing:
                raise ModelError(f"{where}: profile lacks actions for {missing}")
            direction = tuple(str(prof[p]) for p in players)
        else:
            direction = tuple(str(a) for a in prof)
            if len(direction) != len(players):
                raise ModelError(f"{where}: profile has {len(direction)} actions for {len(players)} players")
        dist = {}
        for t, p in _need(row, "dist", where).items():
            if t not in sidx:
                raise ModelError(f"{where}: unknown target {t!r}")
            dist[sidx[t]] = dist.get(sidx[t], Fraction(0)) + parse_prob(p, where)
        key = (sidx[s], direction)
        if key in trans:
            raise ModelError(f"{where}: duplicate transition for {s} under {direction}")
        trans[key] = dist

    raw_labels = d.get("labels", {})
    if isinstance(raw_labels, Mapping):
        unknown = [s for s in raw_labels if s not in sidx]
        if unknown:
            raise ModelError(f"labels given for unknown states {unknown}")
        labels = tuple(frozenset(raw_labels.get(s, ())) for s in states)
    else:
        labels = tuple(frozenset(x) for x in raw_labels)

    raw_goals = _need(d, "goals")
    texts = [raw_goals.get(p) for p in players] if isinstance(raw_goals, Mapping) else list(raw_goals)
    goals = []
    for p, text in zip(players, texts):
        if text is None:
            raise ModelError(f"no goal for player {p}")
        try:
            goals.append(parse_ltl(text))
        except LtlSyntaxError as e:
            raise ModelError(f"goal of {p}: {e}") from None
    arena = Arena(players, states, sidx[init], actions, tuple(available), trans)
    return Csg(arena, labels, tuple(goals))


def csg_to_dict(g: Csg) -> dict:
    a = g.arena
    return {
        "players": list(a.players),
        "states": list(a.states),
        "init": a.states[a.init],
        "actions": {p: list(a.actions[i]) for i, p in enumerate(a.players)},
        "available": {s: {p: list(a.available[k][i]) for i, p in enumerate(a.players)}
                      for k, s in enumerate(a.states)},
        "transitions": [
            {"state": a.states[s],
             "profile": {p: d[i] for i, p in enumerate(a.players)},
             "dist": {a.states[t]: format_prob(x) for t, x in sorted(dist.items())}}
            for (s, d), dist in sorted(a.trans.items(), key=lambda kv: (kv[0][0], kv[0][1]))
        ],
        "labels": {a.states[s]: sorted(lab) for s, lab in enumerate(g.labels) if lab},
        "goals": {p: str(f) for p, f in zip(a.players, g.goals)},
    }


def strategy_from_dict(d: Mapping, where: str = "strategy") -> StrategyTransducer:
    """Read a transducer.

    Either the full form ``{states, init, delta: {q: {s: q'}}, tau: {q: {s: {a: p}}}}``
    or the shorthand ``{"memoryless": {s: action or {a: p}}}``.
    """
    if "memoryless" in d:
        choice = {}
        for s, c in d["memoryless"].items():
            choice[s] = c if isinstance(c, str) else {a: parse_prob(p, where) for a, p in c.items()}
        return StrategyTransducer.memoryless(choice)
    states = tuple(str(q) for q in _need(d, "states", where))
    init = str(_need(d, "init", where))
    delta = {}
    for q, row in _need(d, "delta", where).items():
        for s, q2 in row.items():
            delta[(q, s)] = str(q2)
    tau = {}
    for q, row in _need(d, "tau", where).items():
        for s, dist in row.items():
            tau[(q, s)] = {a: parse_prob(p, where) for a, p in dist.items()}
    return StrategyTransducer(states, init, delta, tau)


def strategy_to_dict(t: StrategyTransducer) -> dict:
    delta: dict = {}
    for (q, s), q2 in t.delta.items():
        delta.setdefault(str(q), {})[s] = str(q2)
    tau: dict = {}
    for (q, s), dist in t.tau.items():
        tau.setdefault(str(q), {})[s] = {a: format_prob(p) for a, p in dist.items()}
    return {"states": [str(q) for q in t.states], "init": str(t.init), "delta": delta, "tau": tau}


def profile_from_dict(d: Mapping) -> dict[str, StrategyTransducer]:
    """A profile or deviation file maps player names to strategies."""
    return {str(p): strategy_from_dict(s, f"strategy of {p}") for p, s in d.items()}


def load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise ModelError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ModelError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from None


def load_model(path: str | Path) -> Csg:
    return csg_from_dict(load_json(path))


def load_profile(path: str | Path) -> dict[str, StrategyTransducer]:
    return profile_from_dict(load_json(path))
