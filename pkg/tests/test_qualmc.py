import random
from fractions import Fraction

from gen import random_formula, random_mc
from ratver.fixtures import both_communicate, both_idle, transmission_game
from ratver.ltl import LassoWord, evaluate_on_lasso, neg, parse_ltl
from ratver.model import Mc, induced_markov_chain
from ratver.qualmc import bsccs, mc_as_ltl, mc_as_parity, mc_nz_ltl, reachable, winners

half = Fraction(1, 2)


def chain(rows, labels):
    n = len(rows)
    return Mc(tuple(range(n)), 0, tuple(rows), tuple(frozenset(x) for x in labels), tuple(range(n)))


def run_of(m):
    """Lasso word of a chain whose rows are all Dirac."""
    seen, path, s = {}, [], m.init
    while s not in seen:
        seen[s] = len(path)
        path.append(s)
        (s,) = m.trans[s]
    k = seen[s]
    word = [m.labels[v] for v in path]
    return LassoWord(tuple(word[:k]), tuple(word[k:]))


def test_bottom_components():
    m = chain([{1: half, 2: half}, {1: 1}, {3: 1}, {2: 1}], [[], [], [], []])
    assert bsccs(m) == [[1], [2, 3]]
    assert reachable(m) == [0, 1, 2, 3]
    assert reachable(m, 2) == [2, 3]


def test_parity_on_chain():
    m = chain([{1: half, 2: half}, {1: 1}, {3: 1}, {2: 1}], [[], [], [], []])
    assert mc_as_parity(m, (1, 0, 2, 3))
    assert not mc_as_parity(m, (0, 0, 3, 3))


def test_unreachable_bottom_is_ignored():
    m = chain([{0: 1}, {1: 1}], [["p"], []])
    assert mc_as_ltl(m, parse_ltl("G p"))


def test_example_chains():
    g = transmission_game(3, half)
    comm = induced_markov_chain(g, both_communicate(g))
    idle = induced_markov_chain(g, both_idle(g))
    f = parse_ltl("F psi")
    assert mc_as_ltl(comm, f) and mc_nz_ltl(comm, f)
    assert not mc_nz_ltl(idle, f)
    assert winners(comm, g.goals) == [0, 1] and winners(idle, g.goals) == []


def test_nonzero_without_almost_sure():
    m = chain([{1: half, 2: half}, {1: 1}, {2: 1}], [[], ["p"], []])
    f = parse_ltl("F p")
    assert mc_nz_ltl(m, f) and not mc_as_ltl(m, f)
    assert mc_nz_ltl(m, neg(f))


def test_duality_on_random_chains():
    rng = random.Random(11)
    for _ in range(200):
        m = random_mc(rng, rng.randint(1, 5))
        f = random_formula(rng, rng.randint(1, 5))
        assert mc_as_ltl(m, f) == (not mc_nz_ltl(m, neg(f)))
        if mc_as_ltl(m, f):
            assert mc_nz_ltl(m, f)


def test_dirac_chains_follow_their_run():
    rng = random.Random(12)
    for _ in range(200):
        m = random_mc(rng, rng.randint(1, 5), dirac=True)
        f = random_formula(rng, rng.randint(1, 5))
        truth = evaluate_on_lasso(f, run_of(m))
        assert mc_as_ltl(m, f) == truth == mc_nz_ltl(m, f)


def test_only_supports_matter():
    rng = random.Random(13)
    for _ in range(100):
        m = random_mc(rng, rng.randint(1, 5))
        rows = []
        for row in m.trans:
            ws = {t: Fraction(rng.randint(1, 9)) for t in row}
            total = sum(ws.values())
            rows.append({t: w / total for t, w in ws.items()})
        m2 = Mc(m.states, m.init, tuple(rows), m.labels, m.base)
        f = random_formula(rng, rng.randint(1, 5))
        assert mc_as_ltl(m, f) == mc_as_ltl(m2, f)
