"""Corpus generators and property suites over small structures.

Each suite returns a SuiteReport.  A failing check keeps its first
counterexample as a JSON transcript that ``replay`` re-evaluates.
"""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field

from . import workspace
from .equivalence import Family
from .errors import BudgetExceeded, LabError
from .game import AIS, ISO, Game, GameConfig, State
from .solver import IsoStable, Solver, rank
from .structures import (GammaMode, Structure, Vocabulary, canonical_key, direct_product,
                         disjoint_sum, isomorphic, pair_id, product_coordinates, reduct, relabel)

BIN = Vocabulary({"E": 2})
VOCAB_TOKENS = {"bin": ({"E": 2}, {}), "un": ({"P": 1}, {}), "const": ({}, {"c": 0}),
                "fun": ({}, {"F": 1}), "empty": ({}, {})}
CORPUS_BUDGET = 100_000


@dataclass
class Corpus:
    spec: str
    family: Family

    @property
    def structures(self):
        return self.family.structures


def _count(vocab, k):
    total = 2 ** sum(k ** a for a in vocab.predicates.values())
    for a in vocab.functions.values():
        total *= k ** (k ** a)
    return total


def gen_exhaustive(vocab: Vocabulary, max_size: int, budget=CORPUS_BUDGET) -> Corpus:
    """Every interpretation of ``vocab`` on ``{1..k}`` for ``1 <= k <= max_size``."""
    if sum(_count(vocab, k) for k in range(1, max_size + 1)) > budget:
        raise BudgetExceeded("corpus-too-large")
    out = []
    preds = sorted(vocab.predicates.items())
    funcs = sorted(vocab.functions.items())
    for k in range(1, max_size + 1):
        uni = [str(i) for i in range(1, k + 1)]
        rel_spaces = [list(itertools.product(uni, repeat=a)) for _, a in preds]
        fun_spaces = [list(itertools.product(uni, repeat=a)) for _, a in funcs]
        rel_choices = [itertools.product((False, True), repeat=len(sp)) for sp in rel_spaces]
        rel_choices = list(itertools.product(*[list(c) for c in rel_choices]))
        fun_choices = list(itertools.product(*[list(itertools.product(uni, repeat=len(sp)))
                                               for sp in fun_spaces]))
        i = 0
        for rc in rel_choices:
            rels = {p: [t for t, on in zip(sp, bits) if on]
                    for (p, _), sp, bits in zip(preds, rel_spaces, rc)}
            for fc in fun_choices:
                fns = {f: dict(zip(sp, vals)) for (f, _), sp, vals in zip(funcs, fun_spaces, fc)}
                out.append(Structure(f"s{k}_{i}", vocab, uni, rels, fns))
                i += 1
    return Corpus(f"exhaustive:{max_size}", Family("exhaustive", out))


def parse_vocab_tokens(text) -> Vocabulary:
    preds, funcs = {}, {}
    for tok in text.split("+"):
        if tok not in VOCAB_TOKENS:
            raise LabError("bad-corpus", f"unknown vocabulary token {tok!r}")
        p, f = VOCAB_TOKENS[tok]
        preds.update(p)
        funcs.update(f)
    return Vocabulary(preds, funcs)


def parse_corpus(spec: str, budget=CORPUS_BUDGET) -> Corpus:
    """``exhaustive:<tokens>:<k>`` (tokens from bin, un, const, fun, empty joined by +)
    or ``file:<workspace path>``."""
    kind, _, rest = spec.partition(":")
    if kind == "exhaustive":
        toks, _, k = rest.rpartition(":")
        try:
            size = int(k)
        except ValueError:
            raise LabError("bad-corpus", spec) from None
        c = gen_exhaustive(parse_vocab_tokens(toks), size, budget)
        return Corpus(spec, c.family)
    if kind == "file":
        ws = workspace.load(rest)
        return Corpus(spec, ws.family)
    raise LabError("bad-corpus", spec)


def gen_linear_order(n, name=None) -> Structure:
    uni = [str(i) for i in range(n)]
    return Structure(name or f"L{n}", Vocabulary({"<": 2}), uni,
                     {"<": [(a, b) for a in uni for b in uni if int(a) < int(b)]})


def gen_alpha_order(alpha) -> Structure:
    """The finite ordinal ``alpha`` as the order on ``{0, ..., alpha-1}``."""
    return gen_linear_order(alpha, name=f"ord{alpha}")


def gen_m_n_alpha(n, alpha, max_idx) -> Structure:
    """Universe ``{0..alpha}``, constant ``c = 0``, ``<`` strict except that ``0 < 0``,
    ``F_k`` the identity for ``k == n`` and constantly 0 otherwise, for ``k <= max_idx``."""
    uni = [str(i) for i in range(alpha + 1)]
    vocab = Vocabulary({"<": 2}, {"c": 0, **{f"F{k}": 1 for k in range(max_idx + 1)}})
    order = [("0", "0")] + [(a, b) for a in uni for b in uni if int(a) < int(b)]
    funcs = {"c": {(): "0"}}
    for k in range(max_idx + 1):
        funcs[f"F{k}"] = {(a,): (a if k == n else "0") for a in uni}
    return Structure(f"M{n}_{alpha}", vocab, uni, {"<": order}, funcs)


# -- reports -----------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    instances: int = 0
    failures: int = 0
    skipped: int = 0
    counterexample: dict | None = None

    @property
    def passed(self):
        return self.failures == 0

    def record(self, ok, transcript=None):
        self.instances += 1
        if not ok:
            self.failures += 1
            if self.counterexample is None:
                self.counterexample = transcript() if callable(transcript) else transcript


@dataclass
class SuiteReport:
    suite: str
    corpus: str
    checks: list = field(default_factory=list)
    # recorded facts that are neither asserted nor refuted, e.g. transitivity
    observations: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        c = CheckResult(name)
        self.checks.append(c)
        return c

    def to_json(self):
        return {"suite": self.suite, "corpus": self.corpus, "passed": self.passed,
                "checks": [{"name": c.name, "instances": c.instances, "failures": c.failures,
                            "skipped": c.skipped, "passed": c.passed,
                            "counterexample": c.counterexample} for c in self.checks],
                "observations": self.observations}

    def to_text(self):
        lines = [f"suite {self.suite} on {self.corpus}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            extra = f", {c.skipped} skipped" if c.skipped else ""
            lines.append(f"  {'ok  ' if c.passed else 'FAIL'} {c.name}: "
                         f"{c.instances} instances, {c.failures} failures{extra}")
        for k, val in sorted(self.observations.items()):
            lines.append(f"  note {k}: {val}")
        return "\n".join(lines)


class Verdicts:
    """Shared solvers so one pair is explored once per width across all clocks."""

    def __init__(self, mode=GammaMode.BS, **solver_opts):
        self.mode = mode
        self.solver_opts = solver_opts
        self._solvers = {}

    def solver(self, m1, m2, theta, mode=None):
        mode = mode or self.mode
        key = (m1.content_key(), m2.content_key(), theta, mode)
        if key not in self._solvers:
            self._solvers[key] = Solver(m1, m2, mode, theta, **self.solver_opts)
        return self._solvers[key]

    def iso(self, m1, m2, theta, alpha, mode=None):
        return self.solver(m1, m2, theta, mode).winner(alpha) == ISO

    def both(self, m1, m2, theta, alpha):
        """(ISO wins, AIS wins) computed by the two independent recursions."""
        sv = self.solver(m1, m2, theta)
        init = sv.game.initial_state(alpha)
        if init is None:
            return False, True
        return sv.iso_wins(init), sv.ais_wins(init)


def _pair_transcript(check, m1, m2, theta, alpha, **verdicts):
    return {"check": check, "left": workspace.structure_to_json(m1),
            "right": workspace.structure_to_json(m2),
            "vocabulary": workspace.vocab_to_json(m1.vocab),
            "theta": theta, "alpha": alpha, "verdicts": verdicts}


def _permuted(s: Structure, rng) -> Structure:
    ids = list(s.universe)
    fresh = [f"p{i}" for i in range(len(ids))]
    rng.shuffle(fresh)
    return relabel(s, dict(zip(ids, fresh)), name=f"{s.name}'")


def _drop_one(vocab: Vocabulary):
    for sym in sorted(vocab.symbols()):
        yield sym, Vocabulary({p: k for p, k in vocab.predicates.items() if p != sym},
                              {f: k for f, k in vocab.functions.items() if f != sym})


def check_game_facts(corpus: Corpus, thetas=(1, 2), alphas=(0, 1, 2, 3), *, seed=0,
                     mode=GammaMode.BS, **solver_opts) -> SuiteReport:
    """Determinacy, reflexivity, symmetry, isomorphism invariance, monotonicity, reducts."""
    rng = random.Random(seed)
    report = SuiteReport("facts", corpus.spec)
    for name in ("determinacy", "reflexivity", "symmetry", "isomorphic-implies-e0",
                 "isomorphism-invariance", "monotonicity", "reduct"):
        report.check(name)
    v = Verdicts(mode, **solver_opts)
    ms = corpus.structures
    copies = {m.name: _permuted(m, rng) for m in ms}
    links = {}
    for m in ms:
        for theta, alpha in itertools.product(thetas, alphas):
            report.check("reflexivity").record(
                v.iso(m, m, theta, alpha),
                lambda: _pair_transcript("reflexivity", m, m, theta, alpha))
    for i, m1 in enumerate(ms):
        for m2 in ms[i:]:
            iso_pair = isomorphic(m1, m2)
            for theta, alpha in itertools.product(thetas, alphas):
                fwd = v.iso(m1, m2, theta, alpha)
                links[(m1.name, m2.name, theta, alpha)] = fwd
                for a, b in ((m1, m2), (m2, m1)):
                    iw, aw = v.both(a, b, theta, alpha)
                    report.check("determinacy").record(
                        iw != aw, lambda: _pair_transcript("determinacy", a, b, theta, alpha,
                                                           iso=iw, ais=aw))
                bwd = v.iso(m2, m1, theta, alpha)
                report.check("symmetry").record(
                    fwd == bwd, lambda: _pair_transcript("symmetry", m1, m2, theta, alpha,
                                                         forward=fwd, backward=bwd))
                if iso_pair:
                    report.check("isomorphic-implies-e0").record(
                        fwd, lambda: _pair_transcript("isomorphic-implies-e0", m1, m2,
                                                      theta, alpha, forward=fwd))
                c1, c2 = copies[m1.name], copies[m2.name]
                moved = v.iso(c1, c2, theta, alpha)
                report.check("isomorphism-invariance").record(
                    moved == fwd, lambda: {**_pair_transcript("isomorphism-invariance", m1, m2,
                                                              theta, alpha, forward=fwd,
                                                              copies=moved),
                                           "copies": [workspace.structure_to_json(c1),
                                                      workspace.structure_to_json(c2)]})
                if fwd:
                    for t2, a2 in itertools.product(thetas, alphas):
                        if t2 <= theta and a2 <= alpha:
                            low = v.iso(m1, m2, t2, a2)
                            report.check("monotonicity").record(
                                low, lambda: _pair_transcript(
                                    "monotonicity", m1, m2, theta, alpha,
                                    high=fwd, low_theta=t2, low_alpha=a2, low=low))
                    for sym, sub in _drop_one(m1.vocab):
                        r1, r2 = reduct(m1, sub), reduct(m2, sub)
                        red = v.iso(r1, r2, theta, alpha)
                        report.check("reduct").record(
                            red, lambda: _pair_transcript("reduct", m1, m2, theta, alpha,
                                                          dropped=sym, full=fwd, reduct=red))
                    if mode is GammaMode.BS:
                        weak = v.iso(m1, m2, theta, alpha, GammaMode.AT)
                        report.check("reduct").record(
                            weak, lambda: _pair_transcript("reduct", m1, m2, theta, alpha,
                                                           full=fwd, atomic_only=weak))
    report.observations["e0-transitivity-violations"] = _transitivity(ms, thetas, alphas, links)
    _stamp(report, mode, solver_opts)
    return report


def _transitivity(ms, thetas, alphas, links):
    """Count triples linked a-b and b-c but not a-c; E0 is not claimed transitive."""
    def linked(a, b, theta, alpha):
        return links.get((a, b, theta, alpha), links.get((b, a, theta, alpha)))

    names = [m.name for m in ms]
    count, first = 0, None
    for theta, alpha in itertools.product(thetas, alphas):
        for a, b, c in itertools.permutations(names, 3):
            if linked(a, b, theta, alpha) and linked(b, c, theta, alpha) \
                    and not linked(a, c, theta, alpha):
                count += 1
                first = first or [a, b, c, theta, alpha]
    return {"count": count, "first": first}


def _stamp(report, mode, solver_opts):
    """Record what a replay needs to rebuild the same solvers."""
    for c in report.checks:
        if c.counterexample is not None:
            c.counterexample.setdefault("mode", mode.value)
            c.counterexample.setdefault("solver_opts", dict(solver_opts))


def check_rigidity(corpus: Corpus, theta=2, mode=GammaMode.BS, **rank_opts) -> SuiteReport:
    """Stable ISO wins exactly for isomorphic pairs of structures of size at most theta."""
    report = SuiteReport("rigidity", corpus.spec)
    chk = report.check("stable-iff-isomorphic")
    ms = corpus.structures
    for i, m1 in enumerate(ms):
        for m2 in ms[i:]:
            if len(m1) > theta or len(m2) > theta:
                chk.skipped += 1
                continue
            r = rank(m1, m2, theta, mode, **rank_opts)
            iso_pair = isomorphic(m1, m2)
            stable = isinstance(r, IsoStable)
            chk.record(stable == iso_pair,
                       lambda: _pair_transcript("stable-iff-isomorphic", m1, m2, theta, "stable",
                                                rank=repr(r), isomorphic=iso_pair))
    _stamp(report, mode, rank_opts)
    return report


# -- strategy composition ----------------------------------------------------

def compose_product_state(s1: State, s2: State) -> State:
    """Product-game state from two component states.

    Chosen sets are products, a pair is matched when both coordinates are,
    and a pair's debt is the larger of its coordinates' debts.
    """
    if s1.n != s2.n:
        raise LabError("counter-mismatch")
    sides = []
    for side in (1, 2):
        h1, h2 = s1.debts(side), s2.debts(side)
        a = {pair_id(b, c): (b, c) for b in s1.chosen(side) for c in s2.chosen(side)}
        h = {x: max(h1[b], h2[c]) for x, (b, c) in a.items()}
        sides.append((set(a), h))
    g1, g2 = s1.gmap(), s2.gmap()
    g = {pair_id(b, c): pair_id(g1[b], g2[c]) for b in g1 for c in g2}
    return State.make(sides[0][0], sides[1][0], sides[0][1], sides[1][1], g,
                      min(s1.beta, s2.beta), s1.n)


@dataclass
class Playout:
    winner: str
    reason: str | None
    moves: list

    def to_json(self):
        return {"winner": self.winner, "reason": self.reason, "moves": self.moves}


def _random_ais_move(game, s, rng):
    moves = game.ais_moves(s)
    top = [m for m in moves if m.beta_next == s.beta - 1]
    return rng.choice(top if rng.random() < 0.8 else moves)


def product_playout(a1, a2, b1, b2, cfg: GameConfig, rng, solvers=None) -> Playout:
    """Random AIS against ISO composing component strategies in ``a1 x b1`` vs ``a2 x b2``."""
    p1, p2 = direct_product(a1, b1), direct_product(a2, b2)
    coords = {1: product_coordinates(a1, b1), 2: product_coordinates(a2, b2)}
    big = Game(p1, p2, cfg)
    solvers = solvers or {}
    comps = []
    for x, y in ((a1, a2), (b1, b2)):
        key = (x.content_key(), y.content_key(), cfg.theta, cfg.mode)
        if key not in solvers:
            solvers[key] = Solver(x, y, cfg.mode, cfg.theta)
        comps.append((Game(x, y, cfg), solvers[key]))
    states = [g.initial_state() for g, _ in comps]
    s = big.initial_state()
    log = []
    if s is None or any(c is None for c in states):
        return Playout(AIS if s is None else ISO, "initial", log)
    while s.beta > 0:
        mv = _random_ais_move(big, s, rng)
        iota, n = mv.iota, s.n
        comp_moves = []
        for k, (g, _) in enumerate(comps):
            extra = {coords[iota][x][k] for x in mv.a_prime}
            a = states[k].chosen(iota) | extra
            if len(a) > cfg.theta:
                log.append({"ais": mv.to_json()})
                return Playout(AIS, "component-set-too-large", log)
            comp_moves.append(type(mv)(mv.beta_next, iota, frozenset(a)))
        nxt = []
        for (g, sv), st, cm in zip(comps, states, comp_moves):
            t = sv.best_response(st, cm)
            if t is None:
                log.append({"ais": mv.to_json()})
                return Playout(AIS, "component-stuck", log)
            nxt.append(t)
        h_side = s.debts(iota)
        h_other = s.debts(3 - iota)
        g_side = s.gmap(iota)
        cg = [t.gmap(iota) for t in nxt]
        ch = [t.debts(iota) for t in nxt]
        images = {}
        for x in s.chosen(iota):
            if h_side[x] <= n and x not in g_side:
                b, c = coords[iota][x]
                if b not in cg[0] or c not in cg[1]:
                    log.append({"ais": mv.to_json()})
                    return Playout(AIS, "component-unmatched", log)
                images[x] = pair_id(cg[0][b], cg[1][c])
        for x in mv.a_prime - s.chosen(iota):
            b, c = coords[iota][x]
            h_side[x] = max(ch[0][b], ch[1][c], n + 1)
        g_side.update(images)
        other = set(s.chosen(3 - iota))
        for y in images.values():
            if y not in other:
                other.add(y)
                h_other[y] = 0
        g1 = g_side if iota == 1 else {y: x for x, y in g_side.items()}
        if iota == 1:
            t = State.make(mv.a_prime, other, h_side, h_other, g1, mv.beta_next, n + 1)
        else:
            t = State.make(other, mv.a_prime, h_other, h_side, g1, mv.beta_next, n + 1)
        log.append({"ais": mv.to_json(), "iso": t.to_json()})
        bad = big.response_violation(s, mv, t)
        if bad:
            return Playout(AIS, f"illegal-composed-response:{bad}", log)
        s, states = t, nxt
    return Playout(ISO, None, log)


def sum_playout(parts1, parts2, cfg: GameConfig, rng, solvers=None) -> Playout:
    """Random AIS against ISO playing each summand's component strategy side by side."""
    big = Game(disjoint_sum(*parts1), disjoint_sum(*parts2), cfg)
    solvers = solvers or {}
    comps = []
    for x, y in zip(parts1, parts2):
        key = (x.content_key(), y.content_key(), cfg.theta, cfg.mode)
        if key not in solvers:
            solvers[key] = Solver(x, y, cfg.mode, cfg.theta)
        comps.append((Game(x, y, cfg), solvers[key]))

    def split(x):
        k, _, a = x.partition(":")
        return int(k) - 1, a

    states = [g.initial_state() for g, _ in comps]
    s = big.initial_state()
    log = []
    if s is None or any(c is None for c in states):
        return Playout(AIS if s is None else ISO, "initial", log)
    while s.beta > 0:
        mv = _random_ais_move(big, s, rng)
        nxt = []
        for k, ((g, sv), st) in enumerate(zip(comps, states)):
            own = {a for j, a in map(split, mv.a_prime) if j == k}
            cm = type(mv)(mv.beta_next, mv.iota, frozenset(st.chosen(mv.iota) | own))
            t = sv.best_response(st, cm)
            if t is None:
                log.append({"ais": mv.to_json()})
                return Playout(AIS, "component-stuck", log)
            nxt.append(t)
        a = [set(), set()]
        h = [{}, {}]
        g = {}
        for k, t in enumerate(nxt, 1):
            for side in (1, 2):
                a[side - 1] |= {f"{k}:{x}" for x in t.chosen(side)}
                h[side - 1].update({f"{k}:{x}": d for x, d in t.debts(side).items()})
            g.update({f"{k}:{x}": f"{k}:{y}" for x, y in t.g})
        t = State.make(a[0], a[1], h[0], h[1], g, mv.beta_next, s.n + 1)
        log.append({"ais": mv.to_json(), "iso": t.to_json()})
        bad = big.response_violation(s, mv, t)
        if bad:
            return Playout(AIS, f"illegal-composed-response:{bad}", log)
        s, states = t, nxt
    return Playout(ISO, None, log)


def _quad_transcript(check, quad, theta, alpha, **verdicts):
    return {"check": check, "vocabulary": workspace.vocab_to_json(quad[0].vocab),
            "structures": [workspace.structure_to_json(m) for m in quad],
            "theta": theta, "alpha": alpha, "verdicts": verdicts}


class _ClassVerdicts:
    """Verdicts memoized per pair of isomorphism classes.

    Sound because verdicts are isomorphism invariant, which the facts suite checks.
    """

    def __init__(self, v: Verdicts):
        self.v = v
        self._keys = {}
        self._memo = {}

    def key(self, m):
        ck = m.content_key()
        if ck not in self._keys:
            self._keys[ck] = canonical_key(m)
        return self._keys[ck]

    def iso(self, m1, m2, theta, alpha):
        k = (self.key(m1), self.key(m2), theta, alpha)
        if k not in self._memo:
            self._memo[k] = self.v.iso(m1, m2, theta, alpha)
        return self._memo[k]


def _component_pairs(v, ms, theta, alpha):
    return [(x, y) for x in ms for y in ms if v.iso(x, y, theta, alpha)]


def _combination_check(report, kind, corpus, grid, playouts, seed, v, combine, playout):
    rng = random.Random(seed)
    theorem = report.check(f"{kind}-preserves-e0")
    plays = report.check(f"{kind}-composed-playouts")
    ms = corpus.structures
    solvers = {}
    built = {}

    def combined(x, y):
        if (x.name, y.name) not in built:
            built[(x.name, y.name)] = combine(x, y)
        return built[(x.name, y.name)]

    classes = _ClassVerdicts(v)
    for theta, alpha in grid:
        pairs = _component_pairs(v, ms, theta, alpha)
        for (x1, x2), (y1, y2) in itertools.product(pairs, repeat=2):
            ok = classes.iso(combined(x1, y1), combined(x2, y2), theta, alpha)
            theorem.record(ok, lambda: _quad_transcript(f"{kind}-preserves-e0",
                                                        (x1, x2, y1, y2), theta, alpha,
                                                        combined=ok))
        if not pairs:
            continue
        per_point = playouts // len(grid) + (1 if (theta, alpha) == grid[0] else 0) * (
            playouts % len(grid))
        cfg = GameConfig(v.mode, theta, alpha)
        for _ in range(per_point):
            (x1, x2), (y1, y2) = rng.choice(pairs), rng.choice(pairs)
            res = playout(x1, x2, y1, y2, cfg, rng, solvers)
            plays.record(res.winner == ISO,
                         lambda: {**_quad_transcript(f"{kind}-composed-playouts",
                                                     (x1, x2, y1, y2), theta, alpha),
                                  "playout": res.to_json()})
    agree = report.check(f"{kind}-agreement")
    agree.record(theorem.passed == plays.passed,
                 {"check": f"{kind}-agreement", "theorem": theorem.passed,
                  "playouts": plays.passed})


def check_product_theorem(corpus: Corpus, grid=((2, 2),), *, playouts=1000, seed=0,
                          mode=GammaMode.BS, **solver_opts) -> SuiteReport:
    """Componentwise ISO wins give an ISO win on the products, checked exhaustively
    over corpus quadruples and by composed-strategy playouts."""
    report = SuiteReport("product", corpus.spec)
    v = Verdicts(mode, **solver_opts)

    def playout(x1, x2, y1, y2, cfg, rng, solvers):
        return product_playout(x1, x2, y1, y2, cfg, rng, solvers)

    _combination_check(report, "product", corpus, list(grid), playouts, seed, v,
                       direct_product, playout)
    _stamp(report, mode, solver_opts)
    return report


def check_sum_theorem(corpus: Corpus, grid=((2, 2),), *, playouts=1000, seed=0,
                      index3_samples=200, mode=GammaMode.BS, **solver_opts) -> SuiteReport:
    """As the product suite, for disjoint sums; also samples three-summand sums."""
    if corpus.structures and not corpus.structures[0].vocab.is_relational:
        raise LabError("functions-in-sum")
    report = SuiteReport("sum", corpus.spec)
    v = Verdicts(mode, **solver_opts)

    def playout(x1, x2, y1, y2, cfg, rng, solvers):
        return sum_playout((x1, y1), (x2, y2), cfg, rng, solvers)

    _combination_check(report, "sum", corpus, list(grid), playouts, seed, v,
                       disjoint_sum, playout)
    rng = random.Random(seed + 1)
    chk = report.check("sum3-preserves-e0")
    ms = corpus.structures
    for theta, alpha in grid:
        pairs = _component_pairs(v, ms, theta, alpha)
        if not pairs:
            continue
        for _ in range(index3_samples):
            trip = [rng.choice(pairs) for _ in range(3)]
            left = disjoint_sum(*(p[0] for p in trip))
            right = disjoint_sum(*(p[1] for p in trip))
            ok = v.iso(left, right, theta, alpha)
            chk.record(ok, lambda: _quad_transcript(
                "sum3-preserves-e0", [m for p in trip for m in p], theta, alpha, combined=ok))
    _stamp(report, mode, solver_opts)
    return report


# -- replay ------------------------------------------------------------------

def replay(transcript) -> bool:
    """Re-evaluate a counterexample transcript; True when the property now holds."""
    vocab = workspace.vocab_from_json(transcript["vocabulary"])
    theta, alpha = transcript["theta"], transcript["alpha"]
    check = transcript["check"]
    d = transcript.get("verdicts", {})
    v = Verdicts(GammaMode(transcript.get("mode", "bs")), **transcript.get("solver_opts", {}))

    def load(doc):
        return workspace.structure_from_json(doc, vocab)

    if "left" in transcript:
        m1, m2 = load(transcript["left"]), load(transcript["right"])
        if check == "reflexivity":
            return v.iso(m1, m1, theta, alpha)
        if check == "symmetry":
            return v.iso(m1, m2, theta, alpha) == v.iso(m2, m1, theta, alpha)
        if check == "determinacy":
            iw, aw = v.both(m1, m2, theta, alpha)
            return iw != aw
        if check == "isomorphic-implies-e0":
            return v.iso(m1, m2, theta, alpha)
        if check == "isomorphism-invariance":
            c1, c2 = (load(x) for x in transcript["copies"])
            return v.iso(c1, c2, theta, alpha) == v.iso(m1, m2, theta, alpha)
        if check == "monotonicity":
            return (not v.iso(m1, m2, theta, alpha)) or v.iso(m1, m2, d["low_theta"],
                                                              d["low_alpha"])
        if check == "reduct":
            if not v.iso(m1, m2, theta, alpha):
                return True
            if "dropped" in d:
                sub = dict(_drop_one(vocab))[d["dropped"]]
                return v.iso(reduct(m1, sub), reduct(m2, sub), theta, alpha)
            return v.iso(m1, m2, theta, alpha, GammaMode.AT)
        if check == "stable-iff-isomorphic":
            r = rank(m1, m2, theta, v.mode, **v.solver_opts)
            return isinstance(r, IsoStable) == isomorphic(m1, m2)
        raise LabError("unreplayable", check)
    ms = [load(x) for x in transcript["structures"]]
    if check == "product-preserves-e0":
        return v.iso(direct_product(ms[0], ms[2]), direct_product(ms[1], ms[3]), theta, alpha)
    if check == "sum-preserves-e0":
        return v.iso(disjoint_sum(ms[0], ms[2]), disjoint_sum(ms[1], ms[3]), theta, alpha)
    if check == "sum3-preserves-e0":
        return v.iso(disjoint_sum(ms[0], ms[2], ms[4]), disjoint_sum(ms[1], ms[3], ms[5]),
                     theta, alpha)
    raise LabError("unreplayable", check)


def dumps_report(report: SuiteReport) -> str:
    return json.dumps(report.to_json(), indent=2, sort_keys=True, default=str)
