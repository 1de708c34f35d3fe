"""Rational verification of concurrent stochastic games with LTL goals."""
from .automata import AutomatonTooLarge, Dpw, complement_dpw, dpw_accepts_lasso, ltl_to_dpw
from .congame import as_winning_region, is_winnable, zielonka_oracle
from .io import load_model, load_profile
from .ltl import LassoWord, LtlFormula, LtlSyntaxError, evaluate_on_lasso, lasso, parse_ltl
from .model import (Arena, Csg, Cspg, Mc, Mdp, ModelError, StrategyTransducer, build_parity_game,
                    coalition_arena, induced_markov_chain, induced_mdp, validate_model)
from .qualmc import bsccs, mc_as_ltl, mc_nz_ltl
from .qualmdp import Atom, Mode, mdp_as_ltl, mdp_nz_ltl, mdp_satisfies, mec_decomposition
from .rverify import (QueryVerdict, a_core, a_nash, beneficial_deviation, core_membership, e_core, e_nash,
                      membership, non_emptiness)

__all__ = [name for name in dir() if not name.startswith("_")]
