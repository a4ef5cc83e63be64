"""Finite vocabularies and structures.

Element ids are opaque strings.  Relations are frozensets of tuples,
functions are total maps from argument tuples to elements; an individual
constant is a 0-ary function whose single key is the empty tuple.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Mapping

from .errors import LabError, RestrictionUndefined


class GammaMode(enum.Enum):
    """Which quantifier-free formulas a partial map must preserve."""

    AT = "at"
    BS = "bs"


class Vocabulary:
    """Predicate and function symbols with arities."""

    __slots__ = ("predicates", "functions")

    def __init__(self, predicates: Mapping[str, int] | None = None,
                 functions: Mapping[str, int] | None = None):
        predicates = dict(predicates or {})
        functions = dict(functions or {})
        clash = set(predicates) & set(functions)
        if clash:
            raise LabError("bad-vocabulary", f"symbol used twice: {sorted(clash)}")
        for name, arity in predicates.items():
            if not isinstance(arity, int) or arity < 1:
                raise LabError("bad-vocabulary", f"predicate {name} needs arity >= 1")
        for name, arity in functions.items():
            if not isinstance(arity, int) or arity < 0:
                raise LabError("bad-vocabulary", f"function {name} needs arity >= 0")
        self.predicates = predicates
        self.functions = functions

    def _key(self):
        return (tuple(sorted(self.predicates.items())),
                tuple(sorted(self.functions.items())))

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"Vocabulary(predicates={self.predicates!r}, functions={self.functions!r})"

    @property
    def constants(self):
        return sorted(f for f, k in self.functions.items() if k == 0)

    @property
    def is_relational(self):
        return not self.functions

    def symbols(self):
        return {**self.predicates, **self.functions}

    def issubset(self, other: "Vocabulary") -> bool:
        return (all(other.predicates.get(p) == k for p, k in self.predicates.items())
                and all(other.functions.get(f) == k for f, k in self.functions.items()))

    def union(self, other: "Vocabulary") -> "Vocabulary":
        return Vocabulary({**self.predicates, **other.predicates},
                          {**self.functions, **other.functions})


class Structure:
    """A finite structure; treat instances as immutable."""

    __slots__ = ("name", "vocab", "universe", "relations", "functions", "_hash")

    def __init__(self, name, vocab: Vocabulary, universe, relations=None, functions=None):
        self.name = str(name)
        self.vocab = vocab
        self.universe = tuple(sorted(set(universe)))
        self.relations = {p: frozenset(tuple(t) for t in ts)
                          for p, ts in (relations or {}).items()}
        self.functions = {f: {tuple(k): v for k, v in table.items()}
                          for f, table in (functions or {}).items()}
        self._hash = None

    def content_key(self):
        """Hashable key of everything except the name."""
        return (self.vocab._key(), self.universe,
                tuple(sorted((p, tuple(sorted(ts))) for p, ts in self.relations.items())),
                tuple(sorted((f, tuple(sorted(t.items()))) for f, t in self.functions.items())))

    def __eq__(self, other):
        return (isinstance(other, Structure) and self.name == other.name
                and self.content_key() == other.content_key())

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.name, self.content_key()))
        return self._hash

    def __repr__(self):
        return f"<Structure {self.name} |{len(self.universe)}|>"

    def __len__(self):
        return len(self.universe)

    def holds(self, pred, args) -> bool:
        return tuple(args) in self.relations[pred]

    def apply(self, func, args):
        return self.functions[func][tuple(args)]

    def constant(self, c):
        return self.functions[c][()]

    def with_name(self, name) -> "Structure":
        return Structure(name, self.vocab, self.universe, self.relations, self.functions)


@dataclass(frozen=True)
class Violation:
    kind: str
    symbol: str | None = None
    detail: object = None

    def __str__(self):
        bits = [self.kind]
        if self.symbol is not None:
            bits.append(self.symbol)
        if self.detail is not None:
            bits.append(repr(self.detail))
        return ": ".join(bits)


def validate_structure(s: Structure) -> Violation | None:
    """Return the first violated structure invariant, or None if ``s`` is well formed."""
    if not s.universe:
        return Violation("empty-universe")
    for a in s.universe:
        if not isinstance(a, str) or not a or "," in a:
            return Violation("bad-element-id", detail=a)
    uni = set(s.universe)
    voc = s.vocab
    for p in s.relations:
        if p not in voc.predicates:
            return Violation("unknown-symbol", p)
    for f in s.functions:
        if f not in voc.functions:
            return Violation("unknown-symbol", f)
    for p, arity in sorted(voc.predicates.items()):
        if p not in s.relations:
            return Violation("missing-symbol", p)
        for t in sorted(s.relations[p]):
            if len(t) != arity:
                return Violation("arity-mismatch", p, t)
            if not all(x in uni for x in t):
                return Violation("tuple-out-of-universe", p, t)
    for f, arity in sorted(voc.functions.items()):
        if f not in s.functions:
            return Violation("missing-symbol", f)
        table = s.functions[f]
        for t, v in sorted(table.items()):
            if len(t) != arity:
                return Violation("arity-mismatch", f, t)
            if not all(x in uni for x in t):
                return Violation("tuple-out-of-universe", f, t)
            if v not in uni:
                return Violation("value-out-of-universe", f, (t, v))
        for t in itertools.product(s.universe, repeat=arity):
            if t not in table:
                return Violation("function-not-total", f, t)
    return None


def reduct(s: Structure, sub: Vocabulary) -> Structure:
    if not sub.issubset(s.vocab):
        raise LabError("not-subvocabulary")
    return Structure(s.name, sub, s.universe,
                     {p: s.relations[p] for p in sub.predicates},
                     {f: s.functions[f] for f in sub.functions})


def rename(s: Structure, pi: Mapping[str, str], target: Vocabulary | None = None) -> Structure:
    """Transport the interpretations of ``s`` along the symbol bijection ``pi``.

    When ``target`` is given, each image symbol must exist there with the
    same kind and arity as its source symbol.
    """
    src = s.vocab.symbols()
    if set(pi) != set(src) or len(set(pi.values())) != len(pi):
        raise LabError("not-bijection")
    if target is None:
        target = Vocabulary({pi[p]: k for p, k in s.vocab.predicates.items()},
                            {pi[f]: k for f, k in s.vocab.functions.items()})
    if set(target.symbols()) != set(pi.values()):
        raise LabError("not-bijection")
    for p, k in s.vocab.predicates.items():
        if target.predicates.get(pi[p]) != k:
            raise LabError("arity-mismatch", f"{p} -> {pi[p]}")
    for f, k in s.vocab.functions.items():
        if target.functions.get(pi[f]) != k:
            raise LabError("arity-mismatch", f"{f} -> {pi[f]}")
    return Structure(s.name, target, s.universe,
                     {pi[p]: ts for p, ts in s.relations.items()},
                     {pi[f]: t for f, t in s.functions.items()})


def restrict_to_predicate(s: Structure, pred: str) -> Structure:
    """The substructure with universe ``pred``'s extension.

    Raises RestrictionUndefined when that extension is empty or not closed
    under some function (functions must stay total).
    """
    if s.vocab.predicates.get(pred) != 1:
        raise LabError("bad-predicate", pred)
    uni = {t[0] for t in s.relations[pred]}
    if not uni:
        raise RestrictionUndefined("empty-restriction")
    rels = {p: frozenset(t for t in ts if all(x in uni for x in t))
            for p, ts in s.relations.items()}
    funcs = {}
    for f, table in s.functions.items():
        kept = {t: v for t, v in table.items() if v in uni and all(x in uni for x in t)}
        if len(kept) != len(uni) ** s.vocab.functions[f]:
            raise RestrictionUndefined("not-closed", f)
        funcs[f] = kept
    return Structure(f"{s.name}|{pred}", s.vocab, uni, rels, funcs)


def tag(side, a):
    return f"{side}:{a}"


def disjoint_sum(*parts: Structure) -> Structure:
    """Tagged disjoint union of relational structures; part i's elements become ``"i:a"``."""
    if not parts:
        raise LabError("empty-sum")
    vocab = parts[0].vocab
    if any(p.vocab != vocab for p in parts):
        raise LabError("vocab-mismatch")
    if vocab.functions:
        raise LabError("functions-in-sum")
    universe = [tag(i, a) for i, p in enumerate(parts, 1) for a in p.universe]
    rels = {r: [tuple(tag(i, x) for x in t) for i, p in enumerate(parts, 1)
                for t in p.relations[r]]
            for r in vocab.predicates}
    return Structure("+".join(p.name for p in parts), vocab, universe, rels)


def pair_id(a, b):
    return f"({a}*{b})"


def direct_product(m1: Structure, m2: Structure) -> Structure:
    if m1.vocab != m2.vocab:
        raise LabError("vocab-mismatch")
    vocab = m1.vocab
    universe = [pair_id(a, b) for a in m1.universe for b in m2.universe]
    rels = {}
    for p in vocab.predicates:
        rels[p] = [tuple(pair_id(x, y) for x, y in zip(t1, t2))
                   for t1 in m1.relations[p] for t2 in m2.relations[p]]
    funcs = {}
    for f, k in vocab.functions.items():
        table = {}
        for t1 in itertools.product(m1.universe, repeat=k):
            for t2 in itertools.product(m2.universe, repeat=k):
                key = tuple(pair_id(x, y) for x, y in zip(t1, t2))
                table[key] = pair_id(m1.apply(f, t1), m2.apply(f, t2))
        funcs[f] = table
    return Structure(f"{m1.name}x{m2.name}", vocab, universe, rels, funcs)


def product_coordinates(m1: Structure, m2: Structure) -> dict:
    """Map each element id of ``direct_product(m1, m2)`` to its coordinate pair."""
    return {pair_id(a, b): (a, b) for a in m1.universe for b in m2.universe}


# -- atomic formulas ---------------------------------------------------------

@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Rel:
    symbol: str
    args: tuple


@dataclass(frozen=True)
class Equals:
    left: object
    right: object


@dataclass(frozen=True)
class FunEq:
    """``target = symbol(args)``"""
    target: object
    symbol: str
    args: tuple


@dataclass(frozen=True)
class Not:
    body: object


def _term(s, t, assignment):
    if isinstance(t, Const):
        return s.constant(t.name)
    try:
        return assignment[t]
    except KeyError:
        raise LabError("unbound-variable", str(t)) from None


def eval_atomic(s: Structure, phi, assignment: Mapping) -> bool:
    """Truth of an atomic (or negated atomic) formula; variables are plain strings."""
    if isinstance(phi, Not):
        return not eval_atomic(s, phi.body, assignment)
    if isinstance(phi, Rel):
        return s.holds(phi.symbol, [_term(s, t, assignment) for t in phi.args])
    if isinstance(phi, Equals):
        return _term(s, phi.left, assignment) == _term(s, phi.right, assignment)
    if isinstance(phi, FunEq):
        return (_term(s, phi.target, assignment)
                == s.apply(phi.symbol, [_term(s, t, assignment) for t in phi.args]))
    raise TypeError(f"not an atomic formula: {phi!r}")


def gamma_formulas(vocab: Vocabulary, variables, mode=GammaMode.BS):
    """Every formula of the chosen kind whose terms are ``variables`` or constants."""
    terms = list(variables) + [Const(c) for c in vocab.constants]
    out = []
    for p, k in sorted(vocab.predicates.items()):
        out.extend(Rel(p, args) for args in itertools.product(terms, repeat=k))
    out.extend(Equals(a, b) for a, b in itertools.product(terms, repeat=2))
    for f, k in sorted(vocab.functions.items()):
        out.extend(FunEq(t, f, args) for t in terms
                   for args in itertools.product(terms, repeat=k))
    if mode is GammaMode.BS:
        out += [Not(phi) for phi in out]
    return out


def preserves_gamma_slow(m1, m2, g: Mapping, mode=GammaMode.BS) -> bool:
    """Reference check by explicit formula enumeration (one variable per element of dom g)."""
    dom = sorted(g)
    variables = [f"x{i}" for i in range(len(dom))]
    a1 = dict(zip(variables, dom))
    a2 = {v: g[a] for v, a in a1.items()}
    return all(eval_atomic(m1, phi, a1) == eval_atomic(m2, phi, a2)
               for phi in gamma_formulas(m1.vocab, variables, mode))


def preserves_gamma(m1: Structure, m2: Structure, g: Mapping, mode=GammaMode.BS) -> bool:
    """Does the partial map ``g`` preserve every atomic formula over dom(g) and constants?

    Preservation is a biconditional, so the atomic and basic modes agree.
    """
    pairs = dict(g)
    for c in m1.vocab.constants:
        a, b = m1.constant(c), m2.constant(c)
        if pairs.setdefault(a, b) != b:
            return False
    inv = {b: a for a, b in pairs.items()}
    if len(inv) != len(pairs):
        return False
    for p in m1.vocab.predicates:
        r1, r2 = m1.relations[p], m2.relations[p]
        for t in r1:
            if all(x in pairs for x in t) and tuple(pairs[x] for x in t) not in r2:
                return False
        for t in r2:
            if all(y in inv for y in t) and tuple(inv[y] for y in t) not in r1:
                return False
    for f, k in m1.vocab.functions.items():
        f1, f2 = m1.functions[f], m2.functions[f]
        for t in itertools.product(pairs, repeat=k):
            v1 = f1[t]
            v2 = f2[tuple(pairs[x] for x in t)]
            if v1 in pairs:
                if pairs[v1] != v2:
                    return False
            elif v2 in inv:
                return False
    return True


def _signature(s: Structure, a):
    sig = []
    for p in sorted(s.vocab.predicates):
        k = s.vocab.predicates[p]
        ts = s.relations[p]
        sig.append(tuple(sum(1 for t in ts if t[i] == a) for i in range(k)))
        sig.append(sum(1 for t in ts if all(x == a for x in t)))
    for f in sorted(s.vocab.functions):
        table = s.functions[f]
        sig.append(sum(1 for v in table.values() if v == a))
        if s.vocab.functions[f] == 1:
            sig.append(table[(a,)] == a)
    return tuple(sig)


def find_isomorphism(m1: Structure, m2: Structure) -> dict | None:
    """Backtracking search for an isomorphism, pruned by per-element degree signatures."""
    if m1.vocab != m2.vocab:
        raise LabError("vocab-mismatch")
    if len(m1) != len(m2):
        return None
    sig1 = {a: _signature(m1, a) for a in m1.universe}
    sig2 = {b: _signature(m2, b) for b in m2.universe}
    if sorted(sig1.values()) != sorted(sig2.values()):
        return None
    order = sorted(m1.universe, key=lambda a: (sum(1 for b in sig2.values() if b == sig1[a]), a))
    g = {}

    def extend(i):
        if i == len(order):
            return True
        a = order[i]
        used = set(g.values())
        for b in m2.universe:
            if b in used or sig2[b] != sig1[a]:
                continue
            g[a] = b
            if preserves_gamma(m1, m2, g) and extend(i + 1):
                return True
            del g[a]
        return False

    return dict(g) if extend(0) else None


def isomorphic(m1: Structure, m2: Structure) -> bool:
    return find_isomorphism(m1, m2) is not None


def relabel(s: Structure, mapping: Mapping, name=None) -> Structure:
    """Copy of ``s`` with element ids replaced through the bijection ``mapping``."""
    return Structure(name or s.name, s.vocab, [mapping[a] for a in s.universe],
                     {p: [tuple(mapping[x] for x in t) for t in ts]
                      for p, ts in s.relations.items()},
                     {f: {tuple(mapping[x] for x in t): mapping[v] for t, v in table.items()}
                      for f, table in s.functions.items()})


def canonical_key(s: Structure):
    """Isomorphism-invariant key: the least encoding over all relabelings by 0..k-1.

    Brute force over permutations, so meant for small universes only.
    """
    best = None
    for perm in itertools.permutations(range(len(s.universe))):
        m = dict(zip(s.universe, perm))
        key = (tuple(sorted((p, tuple(sorted(tuple(m[x] for x in t) for t in ts)))
                            for p, ts in s.relations.items())),
               tuple(sorted((f, tuple(sorted((tuple(m[x] for x in t), m[v])
                                             for t, v in table.items())))
                            for f, table in s.functions.items())))
        if best is None or key < best:
            best = key
    return (s.vocab._key(), len(s.universe), best)
