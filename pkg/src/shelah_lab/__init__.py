"""Finite-structure lab for debt-rescheduling isomorphism games.

Exact solvers for the ISO/AIS game on finite structures, the equivalence
relations and sentences it induces, and property suites that check the
game's basic facts and composition theorems on exhaustive small corpora.
"""
from .equivalence import (Family, Partition, SentenceL1, back_and_forth_equiv, e1_partition,
                          ef_equiv_fo, models_sentence, sentence_and, sentence_not,
                          sentence_or, theta_cover_check)
from .errors import BudgetExceeded, LabError, RestrictionUndefined
from .game import AIS, ISO, STABLE, TOP, AisMove, Game, GameConfig, State
from .harness import (check_game_facts, check_product_theorem, check_rigidity,
                      check_sum_theorem, compose_product_state, gen_exhaustive)
from .solver import AisWinsAt, IsoStable, Solver, e0_equiv, rank, solve
from .structures import (GammaMode, Structure, Vocabulary, direct_product, disjoint_sum,
                         find_isomorphism, isomorphic, preserves_gamma, reduct, rename,
                         restrict_to_predicate, validate_structure)

__version__ = "0.1.0"
