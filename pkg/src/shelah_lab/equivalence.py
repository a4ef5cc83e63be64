"""Equivalence classes over a finite family, sentences given by representatives,
and classical back-and-forth baselines.

The transitive closure of "ISO wins" is taken inside the supplied family,
not over all structures, so blocks can be finer than the true classes.
Every same-block pair carries a chain of ISO-winning links as evidence.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import LabError
from .game import STABLE, GameConfig
from .solver import e0_equiv
from .structures import GammaMode, Structure, preserves_gamma


class UnionFind:
    def __init__(self, items=()):
        self.parent = {}
        for x in items:
            self.add(x)

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            # smaller name wins so block roots are deterministic
            if ry < rx:
                rx, ry = ry, rx
            self.parent[ry] = rx
        return rx

    def groups(self):
        out = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return sorted((sorted(v) for v in out.values()), key=lambda b: b[0])


@dataclass
class Family:
    name: str
    structures: list

    def __post_init__(self):
        names = [m.name for m in self.structures]
        if len(set(names)) != len(names):
            raise LabError("duplicate-name")
        if self.structures:
            vocab = self.structures[0].vocab
            if any(m.vocab != vocab for m in self.structures):
                raise LabError("vocab-mismatch")

    def __len__(self):
        return len(self.structures)

    def __iter__(self):
        return iter(self.structures)

    def get(self, name):
        for m in self.structures:
            if m.name == name:
                return m
        raise LabError("unknown-name", name)

    @property
    def vocab(self):
        return self.structures[0].vocab if self.structures else None

    def extended(self, extra):
        """This family plus any structures of ``extra`` not already present by name."""
        have = {m.name for m in self.structures}
        more = []
        for m in extra:
            if m.name not in have:
                have.add(m.name)
                more.append(m)
        return Family(self.name, list(self.structures) + more)


@dataclass
class Partition:
    blocks: list
    e0: dict = field(default_factory=dict)        # frozenset({x, y}) -> bool for x != y
    witnesses: dict = field(default_factory=dict)  # (x, y) with x < y -> [x, ..., y]

    def block_of(self, name):
        for b in self.blocks:
            if name in b:
                return b
        raise LabError("unknown-name", name)

    def same_block(self, x, y):
        return y in self.block_of(x)

    def cell(self, x, y):
        """``"E0"``, ``"E1-only"`` or ``"distinct"``."""
        if x == y or self.e0.get(frozenset((x, y))):
            return "E0"
        return "E1-only" if self.same_block(x, y) else "distinct"


def cached_equiv(equiv=None):
    """Wrap a pairwise verdict function with a symmetric cache keyed by structure content."""
    equiv = equiv or e0_equiv
    memo = {}

    def run(m1, m2, cfg):
        k1, k2 = m1.content_key(), m2.content_key()
        key = (frozenset((k1, k2)) if k1 != k2 else k1, cfg)
        if key not in memo:
            memo[key] = equiv(m1, m2, cfg)
        return memo[key]

    return run


def _chain(adj, src, dst):
    prev = {src: None}
    queue = deque([src])
    while queue:
        x = queue.popleft()
        if x == dst:
            break
        for y in sorted(adj[x]):
            if y not in prev:
                prev[y] = x
                queue.append(y)
    path = [dst]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def e1_partition(fam: Family, cfg: GameConfig, equiv=None) -> Partition:
    """Blocks of the transitive closure of ISO-winning pairs within ``fam``.

    ``equiv(m1, m2, cfg)`` defaults to the exact solver.
    """
    equiv = equiv or e0_equiv
    names = [m.name for m in fam]
    uf = UnionFind(names)
    adj = {x: set() for x in names}
    e0 = {}
    for m1, m2 in itertools.combinations(fam.structures, 2):
        ok = equiv(m1, m2, cfg)
        e0[frozenset((m1.name, m2.name))] = ok
        if ok:
            uf.union(m1.name, m2.name)
            adj[m1.name].add(m2.name)
            adj[m2.name].add(m1.name)
    blocks = uf.groups()
    witnesses = {}
    for b in blocks:
        for x, y in itertools.combinations(b, 2):
            witnesses[(x, y)] = _chain(adj, x, y)
    return Partition(blocks, e0, witnesses)


def verify_witnesses(part: Partition, fam: Family, cfg, equiv=None) -> bool:
    """Re-run every link of every witness chain."""
    equiv = equiv or e0_equiv
    for chain in part.witnesses.values():
        for x, y in zip(chain, chain[1:]):
            if not equiv(fam.get(x), fam.get(y), cfg):
                return False
    return True


@dataclass(frozen=True)
class SentenceL1:
    """A sentence given by a defining triple and representative structures.

    A structure satisfies it when it shares a block with some representative.
    No representatives means the constant-false sentence.
    """

    mode: GammaMode
    theta: int
    alpha: int | str
    representatives: tuple = ()

    @property
    def config(self):
        return GameConfig(self.mode, self.theta, self.alpha)

    def to_json(self):
        return {"mode": self.mode.value, "theta": self.theta, "alpha": self.alpha,
                "representatives": [m.name for m in self.representatives]}

    @classmethod
    def from_json(cls, doc, fam: Family):
        return cls(GammaMode(doc["mode"]), doc["theta"], doc["alpha"],
                   tuple(fam.get(n) for n in doc["representatives"]))


def _check_vocab(ms, vocab):
    if any(m.vocab != vocab for m in ms):
        raise LabError("vocab-mismatch")


def models_sentence(m: Structure, psi: SentenceL1, fam: Family, equiv=None) -> bool:
    _check_vocab(psi.representatives, m.vocab)
    if fam.structures:
        _check_vocab(fam.structures, m.vocab)
    if not psi.representatives:
        return False
    universe = fam.extended(psi.representatives).extended([m])
    part = e1_partition(universe, psi.config, equiv)
    block = part.block_of(m.name)
    return any(r.name in block for r in psi.representatives)


def satisfaction_set(psi: SentenceL1, fam: Family, equiv=None):
    return {m.name for m in fam if models_sentence(m, psi, fam, equiv)}


def _common_mode(a, b):
    return a if a == b else GammaMode.BS


def _max_clock(a, b):
    if STABLE in (a, b):
        return STABLE
    return max(a, b)


def _require_in_family(psi, fam):
    names = {m.name for m in fam}
    if any(r.name not in names for r in psi.representatives):
        raise LabError("representative-outside-family")


def sentence_and(psi1: SentenceL1, psi2: SentenceL1, fam: Family, equiv=None) -> SentenceL1:
    """Conjunction at the common refinement triple (larger width, larger clock)."""
    _require_in_family(psi1, fam)
    _require_in_family(psi2, fam)
    both = satisfaction_set(psi1, fam, equiv) & satisfaction_set(psi2, fam, equiv)
    reps = tuple(m for m in fam if m.name in both)
    return SentenceL1(_common_mode(psi1.mode, psi2.mode), max(psi1.theta, psi2.theta),
                      _max_clock(psi1.alpha, psi2.alpha), reps)


def sentence_not(psi: SentenceL1, fam: Family, equiv=None) -> SentenceL1:
    """Negation: the family members of the complementary blocks."""
    _require_in_family(psi, fam)
    sat = satisfaction_set(psi, fam, equiv)
    return SentenceL1(psi.mode, psi.theta, psi.alpha,
                      tuple(m for m in fam if m.name not in sat))


def sentence_or(psi1, psi2, fam, equiv=None):
    return sentence_not(sentence_and(sentence_not(psi1, fam, equiv),
                                     sentence_not(psi2, fam, equiv), fam, equiv), fam, equiv)


def back_and_forth_equiv(m1: Structure, m2: Structure, depth: int, width: int) -> bool:
    """Depth-stratified back-and-forth with sets of up to ``width`` elements per round.

    Each round the challenger picks up to ``width`` elements on either side;
    the map must extend over them as a partial isomorphism, ``depth`` times.
    """
    if m1.vocab != m2.vocab:
        raise LabError("vocab-mismatch")

    @lru_cache(maxsize=None)
    def holds(pairs, d):
        g = dict(pairs)
        if not preserves_gamma(m1, m2, g):
            return False
        if d == 0:
            return True
        for side, src, dst, fwd in ((1, m1, m2, g), (2, m2, m1, {b: a for a, b in pairs})):
            for k in range(1, width + 1):
                for chosen in itertools.combinations(src.universe, k):
                    new = [a for a in chosen if a not in fwd]
                    free = [b for b in dst.universe if b not in fwd.values()]
                    ok = False
                    for images in itertools.permutations(free, len(new)):
                        ext = dict(fwd)
                        ext.update(zip(new, images))
                        if side == 2:
                            ext = {b: a for a, b in ext.items()}
                        if holds(tuple(sorted(ext.items())), d - 1):
                            ok = True
                            break
                    if not ok:
                        return False
        return True

    return holds((), depth)


def ef_equiv_fo(m1: Structure, m2: Structure, rounds: int) -> bool:
    """Duplicator wins the classical r-round one-pebble EF game."""
    if m1.vocab != m2.vocab:
        raise LabError("vocab-mismatch")

    @lru_cache(maxsize=None)
    def dup(pairs, r):
        g = dict(pairs)
        if not preserves_gamma(m1, m2, g):
            return False
        if r == 0:
            return True
        inv = {b: a for a, b in pairs}
        for a in m1.universe:
            options = [g[a]] if a in g else [b for b in m2.universe if b not in inv]
            if not any(dup(tuple(sorted({**g, a: b}.items())), r - 1) for b in options):
                return False
        for b in m2.universe:
            options = [inv[b]] if b in inv else [a for a in m1.universe if a not in g]
            if not any(dup(tuple(sorted({**g, a: b}.items())), r - 1) for a in options):
                return False
        return True

    return dup((), rounds)


def theta_cover_check(m: Structure, rel: str, theta: int) -> bool:
    """Is the family of sets ``{a : a R b}`` a (theta, countable)-cover of dom(R)?

    For a finite structure the countable-union requirement always holds, so
    this reduces to every such set having at most ``theta`` elements.
    """
    if m.vocab.predicates.get(rel) != 2:
        raise LabError("bad-predicate", rel)
    pairs = m.relations[rel]
    neighbourhoods = {}
    for a, b in pairs:
        neighbourhoods.setdefault(b, set()).add(a)
    if any(len(s) > theta for s in neighbourhoods.values()):
        return False
    dom = {a for a, _ in pairs}
    covered = set().union(*neighbourhoods.values()) if neighbourhoods else set()
    return covered == dom
