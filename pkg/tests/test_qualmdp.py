import itertools
import random
from fractions import Fraction

import pytest

from gen import random_formula, random_mc, random_one_sided
from ratver.fixtures import constant_strategy, random_mdp, transmission_game
from ratver.ltl import parse_ltl
from ratver.model import Mc, Mdp, induced_mdp
from ratver.qualmc import bsccs, mc_as_ltl, mc_as_parity
from ratver.qualmdp import (Atom, Mode, as_region, mdp_as_ltl, mdp_nz_ltl, mdp_product, mdp_satisfies,
                            mec_decomposition, nz_region)
from ratver.automata import ltl_to_dpw

half = Fraction(1, 2)


@pytest.fixture(scope="module")
def coop():
    g = transmission_game(3, half)
    return g, induced_mdp(g)


def product_atom(k, text, mode=Mode.AS):
    prod, (prio,) = mdp_product(k, [ltl_to_dpw(parse_ltl(text))])
    return prod, Atom(prio, mode)


def test_mecs_of_a_chain_are_bottom_components():
    rng = random.Random(21)
    for _ in range(50):
        m = random_mc(rng, rng.randint(1, 5))
        mecs = {c for c, _ in mec_decomposition(Mdp.from_mc(m))}
        assert {frozenset(b) for b in bsccs(m)} <= mecs


def test_single_state_two_loops():
    k = Mdp(("s",), 0, ({"a": {0: Fraction(1)}, "b": {0: Fraction(1)}},), (frozenset(),), (0,))
    (comp, acts), = mec_decomposition(k)
    assert comp == {0} and set(acts[0]) == {"a", "b"}


def test_full_cooperation_mecs(coop):
    g, k = coop
    mecs = {c for c, _ in mec_decomposition(k)}
    names = {frozenset(k.states[s][0] for s in c) for c in mecs}
    assert frozenset({"s3"}) in names
    assert frozenset({"s0", "s1", "s2"}) in names


def test_example_satisfaction(coop):
    g, k = coop
    phi_dpw, bad_dpw = ltl_to_dpw(parse_ltl("F psi")), ltl_to_dpw(parse_ltl("G !psi"))
    prod, (a, b) = mdp_product(k, [phi_dpw, bad_dpw])
    assert mdp_satisfies(prod, [Atom(a)])
    assert mdp_satisfies(prod, [Atom(b)])
    assert not mdp_satisfies(prod, [Atom(a), Atom(b)])
    # both with positive probability is fine: mix at the start
    assert mdp_satisfies(prod, [Atom(a, Mode.NZ), Atom(b, Mode.NZ)])
    assert not mdp_satisfies(prod, [Atom(a), Atom(b, Mode.NZ)])


def test_ltl_front_ends(coop):
    g, k = coop
    assert mdp_as_ltl(k, parse_ltl("F psi"))
    assert mdp_nz_ltl(k, parse_ltl("G !psi"))
    stuck = induced_mdp(g, {"S": constant_strategy(g, "S", "i_S")})
    assert not mdp_as_ltl(stuck, parse_ltl("F psi"))
    assert not mdp_nz_ltl(stuck, parse_ltl("F psi"))


def test_empty_conjunction_rejected(coop):
    with pytest.raises(ValueError):
        mdp_satisfies(coop[1], [])


def test_witness_region_contains_init(coop):
    g, k = coop
    prod, atom = product_atom(k, "F psi")
    r = mdp_satisfies(prod, [atom])
    assert prod.init in r.region
    assert all(set(acts) <= set(prod.choices[s]) for s, acts in r.controller.items())


def test_agrees_with_chains():
    rng = random.Random(22)
    for _ in range(200):
        m = random_mc(rng, rng.randint(1, 5))
        prio = tuple(rng.randrange(4) for _ in range(m.n_states))
        k = Mdp.from_mc(m)
        assert bool(mdp_satisfies(k, [Atom(prio)])) == mc_as_parity(m, prio)
        f = random_formula(rng, rng.randint(1, 4))
        assert mdp_as_ltl(k, f) == mc_as_ltl(m, f)


def memoryless_chains(k):
    for pick in itertools.product(*[sorted(c, key=str) for c in k.choices]):
        rows = tuple(dict(k.choices[s][a]) for s, a in enumerate(pick))
        yield Mc(k.states, k.init, rows, k.labels, k.base)


def test_single_parity_against_memoryless_enumeration():
    """Pure memoryless controllers suffice for one parity objective."""
    rng = random.Random(23)
    for _ in range(200):
        _, k, prio = random_one_sided(rng, rng.randint(1, 4), 4)
        chains = list(memoryless_chains(k))
        as_truth = any(mc_as_parity(m, prio) for m in chains)
        nz_truth = any(any(min(prio[s] for s in b) % 2 == 0 for b in bsccs(m)) for m in chains)
        assert (k.init in as_region(k, [prio])) == as_truth
        assert (k.init in nz_region(k, prio)) == nz_truth
        assert bool(mdp_satisfies(k, [Atom(prio, Mode.NZ)])) == nz_truth


def test_almost_sure_implies_nonzero():
    rng = random.Random(24)
    for _ in range(200):
        k = random_mdp(rng, rng.randint(1, 5), 2, ("p", "q"))
        f = random_formula(rng, rng.randint(1, 4))
        if mdp_as_ltl(k, f):
            assert mdp_nz_ltl(k, f)


def test_dropping_an_atom_preserves_satisfiability():
    rng = random.Random(25)
    checked = 0
    for _ in range(300):
        _, k, _ = random_one_sided(rng, rng.randint(1, 4), 3)
        atoms = [Atom(tuple(rng.randrange(4) for _ in range(k.n_states)), rng.choice(list(Mode)))
                 for _ in range(rng.randint(2, 3))]
        if mdp_satisfies(k, atoms):
            checked += 1
            for i in range(len(atoms)):
                assert mdp_satisfies(k, atoms[:i] + atoms[i + 1:])
    assert checked > 20


def test_support_invariance():
    rng = random.Random(26)
    for _ in range(100):
        k = random_mdp(rng, rng.randint(1, 4), 2, ("p",))
        choices = []
        for row in k.choices:
            new = {}
            for a, dist in row.items():
                ws = {t: Fraction(rng.randint(1, 7)) for t in dist}
                total = sum(ws.values())
                new[a] = {t: w / total for t, w in ws.items()}
            choices.append(new)
        k2 = Mdp(k.states, k.init, tuple(choices), k.labels, k.base)
        f = random_formula(rng, rng.randint(1, 4), ("p",))
        assert mdp_as_ltl(k, f) == mdp_as_ltl(k2, f)
        assert mdp_nz_ltl(k, f) == mdp_nz_ltl(k2, f)
