import itertools

import pytest

from shelah_lab.equivalence import (Family, SentenceL1, UnionFind, back_and_forth_equiv,
                                    cached_equiv, e1_partition, ef_equiv_fo, models_sentence,
                                    satisfaction_set, sentence_and, sentence_not, sentence_or,
                                    theta_cover_check, verify_witnesses)
from shelah_lab.errors import LabError
from shelah_lab.game import GameConfig
from shelah_lab.harness import gen_exhaustive, gen_linear_order, parse_vocab_tokens
from shelah_lab.solver import e0_equiv
from shelah_lab.structures import (Const, GammaMode, Rel, Structure, Vocabulary, eval_atomic,
                                   isomorphic, preserves_gamma_slow, relabel)

import oracles

E = Vocabulary({"E": 2})
PQC = Vocabulary({"P": 1, "Q": 1}, {"c": 0})


def pqc(name, p, q):
    return Structure(name, PQC, ["a"], {"P": [("a",)] if p else [], "Q": [("a",)] if q else []},
                     {"c": {(): "a"}})


def by_size(m1, m2, cfg):
    """Toy relation: sizes differ by at most one (reflexive, symmetric, not transitive)."""
    return abs(len(m1) - len(m2)) <= 1


def pure(name, k):
    return Structure(name, Vocabulary(), [str(i) for i in range(k)])


def test_union_find():
    uf = UnionFind("abcd")
    uf.union("c", "d")
    uf.union("b", "d")
    assert uf.groups() == [["a"], ["b", "c", "d"]]
    assert uf.find("d") == "b"


def test_isomorphic_copies_form_one_e0_block():
    g = Structure("g", E, ["1", "2"], {"E": [("1", "2")]})
    fam = Family("copies", [g, relabel(g, {"1": "x", "2": "y"}, "h"),
                            relabel(g, {"1": "p", "2": "q"}, "k")])
    part = e1_partition(fam, GameConfig(GammaMode.BS, 2, 3))
    assert part.blocks == [["g", "h", "k"]]
    assert all(part.cell(x, y) == "E0" for x in "ghk" for y in "ghk")


def _atomic_theory(m):
    sentences = [Rel(p, (Const("c"),)) for p in ("P", "Q")]
    return tuple(eval_atomic(m, phi, {}) for phi in sentences)


def test_blocks_at_clock_zero_follow_atomic_theories():
    ms = [pqc("pq", 1, 1), pqc("q", 0, 1), pqc("none", 0, 0)]
    part = e1_partition(Family("f", ms), GameConfig(GammaMode.BS, 1, 0))
    theories = {m.name: _atomic_theory(m) for m in ms}
    assert len(set(theories.values())) == 3
    assert part.blocks == [["none"], ["pq"], ["q"]]
    same = Family("g", [pqc("x", 1, 0), pqc("y", 1, 0)])
    assert len(e1_partition(same, GameConfig(GammaMode.BS, 1, 0)).blocks) == 1


def test_transitive_closure_with_witness_chain():
    fam = Family("sizes", [pure("s1", 1), pure("s2", 2), pure("s3", 3), pure("s5", 5)])
    cfg = GameConfig(GammaMode.BS, 1, 1)
    part = e1_partition(fam, cfg, equiv=by_size)
    assert part.blocks == [["s1", "s2", "s3"], ["s5"]]
    assert part.cell("s1", "s3") == "E1-only"
    assert part.cell("s1", "s2") == "E0"
    assert part.cell("s1", "s5") == "distinct"
    assert part.witnesses[("s1", "s3")] == ["s1", "s2", "s3"]
    assert verify_witnesses(part, fam, cfg, equiv=by_size)
    assert len(part.blocks) <= len(fam)


def test_empty_family():
    part = e1_partition(Family("none", []), GameConfig(GammaMode.BS, 1, 1))
    assert part.blocks == [] and part.witnesses == {}


def test_cached_equiv_is_symmetric_and_counts_once():
    calls = []

    def spy(m1, m2, cfg):
        calls.append((m1.name, m2.name))
        return True

    eq = cached_equiv(spy)
    a, b = pure("a", 1), pure("b", 2)
    cfg = GameConfig(GammaMode.BS, 1, 1)
    assert eq(a, b, cfg) and eq(b, a, cfg)
    assert len(calls) == 1


def test_sentences():
    fam = Family("sizes", [pure("s1", 1), pure("s2", 2), pure("s3", 3), pure("s5", 5)])
    psi = SentenceL1(GammaMode.BS, 1, 1, (fam.get("s1"),))
    assert models_sentence(fam.get("s1"), psi, fam, by_size)
    assert satisfaction_set(psi, fam, by_size) == {"s1", "s2", "s3"}
    nothing = SentenceL1(GammaMode.BS, 1, 1, ())
    assert not any(models_sentence(m, nothing, fam, by_size) for m in fam)
    neg = sentence_not(psi, fam, by_size)
    assert satisfaction_set(neg, fam, by_size) == {"s5"}
    contra = sentence_and(psi, neg, fam, by_size)
    assert satisfaction_set(contra, fam, by_size) == set()
    both = sentence_or(psi, neg, fam, by_size)
    assert satisfaction_set(both, fam, by_size) == {"s1", "s2", "s3", "s5"}
    assert SentenceL1.from_json(psi.to_json(), fam) == psi
    outsider = SentenceL1(GammaMode.BS, 1, 1, (pure("s9", 9),))
    with pytest.raises(LabError) as exc:
        sentence_not(outsider, fam, by_size)
    assert exc.value.code == "representative-outside-family"
    with pytest.raises(LabError):
        models_sentence(Structure("e", E, ["1"], {"E": []}), psi, fam, by_size)


def test_back_and_forth_basics():
    l2, l3 = gen_linear_order(2), gen_linear_order(3)
    for d in range(3):
        for w in range(1, 3):
            assert back_and_forth_equiv(l3, l3, d, w)
    assert back_and_forth_equiv(l2, l3, 0, 3)
    assert not back_and_forth_equiv(l2, l3, 1, 3)
    a, b = pqc("a", 1, 0), pqc("b", 0, 0)
    assert not back_and_forth_equiv(a, b, 0, 1)


@pytest.mark.parametrize("spec", ["un:3", "bin:2", "un+const:2"])
def test_depth_one_with_full_width_decides_isomorphism(spec):
    vocab_tokens, k = spec.rsplit(":", 1)
    ms = gen_exhaustive(parse_vocab_tokens(vocab_tokens), int(k)).structures
    for m1, m2 in itertools.combinations_with_replacement(ms, 2):
        w = max(len(m1), len(m2))
        assert back_and_forth_equiv(m1, m2, 1, w) == isomorphic(m1, m2)


def test_depth_zero_is_atomic_agreement():
    ms = gen_exhaustive(parse_vocab_tokens("un+const"), 2).structures
    for m1, m2 in itertools.product(ms, repeat=2):
        assert back_and_forth_equiv(m1, m2, 0, 1) == preserves_gamma_slow(m1, m2, {})


def test_ef_on_linear_orders():
    for r in range(4):
        lo = 2 ** r - 1
        for m in range(max(lo, 1), lo + 2):
            for n in range(m, lo + 3):
                assert ef_equiv_fo(gen_linear_order(m), gen_linear_order(n), r)


def test_ef_threshold_is_tight_for_small_rounds():
    for r in (1, 2, 3):
        lo = 2 ** r - 1
        if lo >= 2:
            assert not ef_equiv_fo(gen_linear_order(lo - 1), gen_linear_order(lo), r)


def test_ef_agrees_with_unmemoized_oracle():
    ms = gen_exhaustive(E, 2).structures
    for m1, m2 in itertools.combinations(ms, 2):
        for r in (0, 1, 2):
            assert ef_equiv_fo(m1, m2, r) == oracles.ef_duplicator_wins(m1, m2, r)


def test_back_and_forth_implies_solver_win():
    ms = gen_exhaustive(E, 2).structures
    for m1, m2 in itertools.combinations_with_replacement(ms, 2):
        for beta, theta in itertools.product((0, 1, 2), (1, 2)):
            if back_and_forth_equiv(m1, m2, beta, theta):
                assert e0_equiv(m1, m2, GameConfig(GammaMode.BS, theta, beta))


def test_theta_cover():
    v = Vocabulary({"R": 2})
    empty = Structure("e", v, ["a"], {"R": []})
    assert theta_cover_check(empty, "R", 1)
    star = Structure("s", v, ["a", "b", "c"], {"R": [("a", "c"), ("b", "c")]})
    assert not theta_cover_check(star, "R", 1)
    assert theta_cover_check(star, "R", 2)
    kb = Structure("k", v, ["a", "b", "x", "y"],
                   {"R": [(p, q) for p in "ab" for q in "xy"]})
    assert theta_cover_check(kb, "R", 2)
    with pytest.raises(LabError):
        theta_cover_check(kb, "S", 2)
