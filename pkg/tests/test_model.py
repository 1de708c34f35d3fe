import random
from fractions import Fraction

import pytest

from ratver.fixtures import (both_communicate, both_idle, constant_strategy, mixed_strategy, pure_memoryless_profiles,
                             random_game, transmission_dict, transmission_game)
from ratver.io import csg_from_dict, csg_to_dict, profile_from_dict, strategy_from_dict, strategy_to_dict
from ratver.ltl import TRUE, parse_ltl
from ratver.model import (ModelError, StrategyTransducer, build_parity_game, coalition_arena, induced_markov_chain,
                          induced_mdp, validate_model, validate_strategy)
from ratver.qualmc import mc_as_ltl, mc_as_parity

half = Fraction(1, 2)


@pytest.fixture
def game():
    return transmission_game(3, half)


def test_transmission_game_is_valid(game):
    assert validate_model(game) == []
    assert game.arena.n_states == 4 and game.arena.players == ("S", "R")


def test_row_sum_diagnostic():
    doc = transmission_dict()
    doc["transitions"][0]["dist"] = {"s1": "9/20", "s0": "9/20"}
    problems = validate_model(csg_from_dict(doc))
    assert any("row sum != 1" in m for m in problems)


def test_missing_direction_and_unavailable_direction():
    doc = transmission_dict()
    doc["transitions"].pop(0)
    assert any("no transition for direction" in m for m in validate_model(csg_from_dict(doc)))
    doc = transmission_dict()
    doc["available"] = {"s0": {"S": ["c_S"]}}
    assert any("unavailable direction" in m for m in validate_model(csg_from_dict(doc)))


def test_strategy_support_must_respect_availability(game):
    doc = transmission_dict()
    doc["available"] = {"s1": {"R": ["i_R"]}}
    g = csg_from_dict(doc)
    problems = validate_strategy(g, 1, constant_strategy(game, "R", "c_R"))
    assert any("support violates availability" in m for m in problems)


def test_structural_errors_raise():
    doc = transmission_dict()
    doc["init"] = "nowhere"
    with pytest.raises(ModelError):
        csg_from_dict(doc)
    doc = transmission_dict()
    doc["transitions"][0]["dist"] = {"s1": 0.5, "s0": 0.5}
    with pytest.raises(ModelError):
        csg_from_dict(doc)
    doc = transmission_dict()
    doc["goals"]["S"] = "F ("
    with pytest.raises(ModelError):
        csg_from_dict(doc)


def test_communicating_chain_is_the_random_walk(game):
    m = induced_markov_chain(game, both_communicate(game))
    assert sorted(s[0] for s in m.states) == ["s0", "s1", "s2", "s3"]
    by_name = {s[0]: i for i, s in enumerate(m.states)}
    for k in range(3):
        row = m.trans[by_name[f"s{k}"]]
        assert row[by_name[f"s{k + 1}"]] == half
        assert row[by_name["s0"]] == half
    assert m.trans[by_name["s3"]] == {by_name["s3"]: 1}


def test_idle_chain_is_a_self_loop(game):
    m = induced_markov_chain(game, both_idle(game))
    assert m.n_states == 1 and m.trans[0] == {0: 1}
    assert m.state_directions[0] == {("i_S", "i_R")}


def test_mixed_sender_distribution(game):
    prof = {"S": mixed_strategy(game, "S", {"c_S": half, "i_S": half}), "R": constant_strategy(game, "R", "c_R")}
    m = induced_markov_chain(game, prof)
    by_name = {s[0]: i for i, s in enumerate(m.states)}
    assert m.trans[0] == {by_name["s1"]: half * (1 - half), 0: 1 - half * (1 - half)}
    assert m.edge_directions[(0, by_name["s1"])] == {("c_S", "c_R")}


def test_profile_errors(game):
    with pytest.raises(ModelError):
        induced_markov_chain(game, [constant_strategy(game, "S", "c_S")])
    with pytest.raises(ModelError):
        induced_markov_chain(game, {"S": constant_strategy(game, "S", "c_S")})
    partial = StrategyTransducer.memoryless({"s0": "c_S"})
    with pytest.raises(ModelError):
        induced_markov_chain(game, {"S": partial, "R": constant_strategy(game, "R", "c_R")})


def test_induced_mdp_with_idle_sender_never_leaves_s0(game):
    k = induced_mdp(game, {"S": constant_strategy(game, "S", "i_S")})
    assert k.n_states == 1
    assert all(dist == {0: 1} for dist in k.choices[0].values())


def test_induced_mdp_with_communicating_sender(game):
    k = induced_mdp(game, {"S": constant_strategy(game, "S", "c_S")})
    by_name = {s[0]: i for i, s in enumerate(k.states)}
    assert k.choices[0][("c_R",)] == {by_name["s1"]: half, 0: half}
    assert k.choices[0][("i_R",)] == {0: 1}


def test_full_cooperation_mdp_matches_arena(game):
    k = induced_mdp(game)
    assert k.n_states == 4
    for s in range(4):
        assert set(k.choices[s]) == set(game.arena.directions(s))


def test_coalition_arena_sides(game):
    both = coalition_arena(game.arena, ["S", "R"])
    assert both.available[0][1] == ((),)
    assert ("c_S", "c_R") in both.available[0][0]
    receiver = coalition_arena(game.arena, ["R"])
    assert receiver.players == ("R", "S")
    assert receiver.succ(0, (("c_R",), ("i_S",))) == {0: 1}
    with pytest.raises(ModelError):
        coalition_arena(game.arena, [])


def test_coalition_arena_symmetry(game):
    a = coalition_arena(game.arena, ["S"])
    b = coalition_arena(game.arena, ["R"])
    for (s, (x, y)), dist in a.trans.items():
        assert b.trans[(s, (y, x))] == dist


def test_trivial_parity_product_is_the_arena():
    doc = transmission_dict()
    doc["goals"] = {"S": "true", "R": "true"}
    g = csg_from_dict(doc)
    gp = build_parity_game(g, TRUE)
    assert gp.arena.n_states == g.arena.n_states
    assert all(p % 2 == 0 for prio in gp.priorities for p in prio)


def test_product_tracks_the_eventually_phase(game):
    gp = build_parity_game(game, parse_ltl("F psi"))
    phases = {s[1] for s in gp.arena.states}
    assert len(phases) == 2
    assert set(gp.priorities[0]) == {0, 1}


def test_product_and_base_chains_agree():
    """Projections of product chains are base chains, and winners coincide."""
    rng = random.Random(3)
    for _ in range(40):
        g = random_game(rng)
        gp = build_parity_game(g, TRUE)
        for prof in list(pure_memoryless_profiles(g))[:6]:
            base = induced_markov_chain(g, prof)
            prod = induced_markov_chain(gp, prof)
            assert {gp.view(prod.base[v]) for v in range(prod.n_states)} == {s[0] for s in base.states}
            base_edges = {(base.states[v][0], base.states[t][0]) for v in range(base.n_states) for t in base.successors(v)}
            prod_edges = {(gp.view(prod.base[v]), gp.view(prod.base[t])) for v in range(prod.n_states)
                          for t in prod.successors(v)}
            assert base_edges == prod_edges
            for i, goal in enumerate(g.goals):
                prio = tuple(gp.priorities[i][b] for b in prod.base)
                assert mc_as_parity(prod, prio) == mc_as_ltl(base, goal)


def test_rows_sum_to_one():
    rng = random.Random(5)
    for _ in range(30):
        g = random_game(rng)
        for prof in list(pure_memoryless_profiles(g))[:3]:
            m = induced_markov_chain(g, prof)
            assert all(sum(row.values()) == 1 for row in m.trans)


def test_json_round_trip(game):
    again = csg_from_dict(csg_to_dict(game))
    assert again.arena.trans == game.arena.trans
    assert again.labels == game.labels and again.goals == game.goals


def test_strategy_file_forms(game):
    full = {"states": ["m0", "m1"], "init": "m0",
            "delta": {"m0": {s: "m1" for s in game.arena.states}, "m1": {s: "m0" for s in game.arena.states}},
            "tau": {"m0": {s: {"c_S": "1"} for s in game.arena.states},
                    "m1": {s: {"c_S": "1/3", "i_S": "2/3"} for s in game.arena.states}}}
    t = strategy_from_dict(full)
    assert validate_strategy(game, 0, t) == []
    assert strategy_from_dict(strategy_to_dict(t)).tau == t.tau
    prof = profile_from_dict({"S": full, "R": {"memoryless": {s: "c_R" for s in game.arena.states}}})
    m = induced_markov_chain(game, prof)
    assert any(v[1] == "m1" for v in m.states)
