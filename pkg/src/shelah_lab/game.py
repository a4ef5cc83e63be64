"""States and moves of the debt-rescheduling game between two finite structures.

A position is ``(A1, A2, h1, h2, g, beta, n)``: the chosen sets on each
side, the debt (due round) of every chosen element, the partial
isomorphism built so far, the clock and the move counter.

ISO's debt choices for newly chosen elements are the rounds
``n+1 .. n+beta`` plus ``TOP``; any later round can never come due before
the clock runs out, so it is interchangeable with ``TOP``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

from .errors import LabError
from .structures import GammaMode, Structure, preserves_gamma

TOP = math.inf
STABLE = "stable"
ISO = "ISO"
AIS = "AIS"


@dataclass(frozen=True)
class GameConfig:
    mode: GammaMode = GammaMode.BS
    theta: int = 1
    alpha: int | str = 0

    def __post_init__(self):
        if not isinstance(self.theta, int) or self.theta < 1:
            raise LabError("bad-config", "theta must be an integer >= 1")
        if self.alpha != STABLE and (not isinstance(self.alpha, int) or self.alpha < 0):
            raise LabError("bad-config", "alpha must be a natural number or 'stable'")

    def with_alpha(self, alpha):
        return GameConfig(self.mode, self.theta, alpha)


def clock_le(a, b) -> bool:
    """Order on clocks: naturals as usual, STABLE above every natural."""
    if b == STABLE:
        return True
    if a == STABLE:
        return False
    return a <= b


@dataclass(frozen=True)
class State:
    a1: frozenset
    a2: frozenset
    h1: tuple  # sorted (element, debt) pairs
    h2: tuple
    g: tuple   # sorted (left, right) pairs
    beta: int
    n: int

    @classmethod
    def make(cls, a1, a2, h1, h2, g, beta, n):
        return cls(frozenset(a1), frozenset(a2), tuple(sorted(h1.items())),
                   tuple(sorted(h2.items())), tuple(sorted(g.items())), beta, n)

    def chosen(self, side):
        return self.a1 if side == 1 else self.a2

    def debts(self, side):
        return dict(self.h1 if side == 1 else self.h2)

    def gmap(self, side=1):
        """``g`` itself for side 1, its inverse for side 2."""
        if side == 1:
            return dict(self.g)
        return {b: a for a, b in self.g}

    def to_json(self):
        def debt(h):
            return "top" if h == TOP else h
        return {"a1": sorted(self.a1), "a2": sorted(self.a2),
                "h1": {a: debt(h) for a, h in self.h1},
                "h2": {a: debt(h) for a, h in self.h2},
                "g": dict(self.g), "beta": self.beta, "n": self.n}

    @classmethod
    def from_json(cls, doc):
        def debt(h):
            return TOP if h == "top" else int(h)
        return cls.make(doc["a1"], doc["a2"],
                        {a: debt(h) for a, h in doc["h1"].items()},
                        {a: debt(h) for a, h in doc["h2"].items()},
                        doc["g"], doc["beta"], doc["n"])

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class AisMove:
    beta_next: int
    iota: int
    a_prime: frozenset

    def to_json(self):
        return {"beta": self.beta_next, "side": self.iota, "set": sorted(self.a_prime)}

    @classmethod
    def from_json(cls, doc):
        return cls(doc["beta"], doc["side"], frozenset(doc["set"]))


class Game:
    """The game on ``m1`` versus ``m2`` under ``cfg``.

    ``horizon_slack`` widens ISO's finite debt choices beyond the clock
    horizon; it exists to check that the horizon rule loses nothing.
    """

    def __init__(self, m1: Structure, m2: Structure, cfg: GameConfig, horizon_slack=0):
        if m1.vocab != m2.vocab:
            raise LabError("vocab-mismatch")
        self.m1, self.m2, self.cfg = m1, m2, cfg
        self.horizon_slack = horizon_slack

    def structure(self, side):
        return self.m1 if side == 1 else self.m2

    def preserves(self, g):
        return preserves_gamma(self.m1, self.m2, g, self.cfg.mode)

    def initial_state(self, alpha=None):
        """The empty position, or None when it is not a state (AIS has then already won)."""
        alpha = self.cfg.alpha if alpha is None else alpha
        if alpha == STABLE:
            raise LabError("bad-config", "a concrete play needs a finite clock")
        if not self.preserves({}):
            return None
        return State.make((), (), {}, {}, {}, alpha, 0)

    def state_violation(self, s: State) -> str | None:
        """Name of the first violated state condition, or None."""
        theta = self.cfg.theta
        for side in (1, 2):
            a = s.chosen(side)
            if len(a) > theta:
                return f"set-too-large:{side}"
            if not a <= set(self.structure(side).universe):
                return f"set-outside-universe:{side}"
        if s.beta < 0 or (self.cfg.alpha != STABLE and s.beta > self.cfg.alpha):
            return "clock-out-of-range"
        for side in (1, 2):
            h = s.debts(side)
            if set(h) != set(s.chosen(side)):
                return f"debts-not-total:{side}"
            if any(not (v == TOP or (isinstance(v, int) and v >= 0)) for v in h.values()):
                return f"debt-not-natural:{side}"
        g = s.gmap()
        if len(set(g.values())) != len(g):
            return "g-not-injective"
        if not set(g) <= s.a1 or not set(g.values()) <= s.a2:
            return "g-outside-chosen"
        if not self.preserves(g):
            return "g-not-preserving"
        for side in (1, 2):
            h = s.debts(side)
            if any(h[a] >= s.n for a in s.gmap(side)):
                return f"matched-debt-not-paid:{side}"
        return None

    def is_state(self, s):
        return self.state_violation(s) is None

    def ais_choices(self, s: State):
        """(side, new set) pairs available to AIS, ignoring the clock."""
        out = []
        for iota in (1, 2):
            cur = s.chosen(iota)
            rest = sorted(set(self.structure(iota).universe) - cur)
            room = self.cfg.theta - len(cur)
            for k in range(0, max(room, 0) + 1):
                for extra in itertools.combinations(rest, k):
                    out.append((iota, cur | frozenset(extra)))
        return out

    def ais_moves(self, s: State):
        """All legal AIS moves, largest clock first; empty iff the clock is 0."""
        choices = self.ais_choices(s)
        return [AisMove(b, iota, a) for b in range(s.beta - 1, -1, -1) for iota, a in choices]

    def debt_choices(self, s: State, horizon=None):
        if horizon is None:
            horizon = s.n + s.beta + self.horizon_slack
        return [TOP] + list(range(horizon, s.n, -1))

    def iter_iso_responses(self, s: State, mv: AisMove, horizon=None):
        """Lazily enumerate ISO's legal successor states to ``mv``."""
        n, iota, other = s.n, mv.iota, 3 - mv.iota
        cur = s.chosen(iota)
        h_side = s.debts(iota)
        h_other = s.debts(other)
        g_side = s.gmap(iota)
        due = [a for a in sorted(cur) if h_side[a] <= n]
        todo = [a for a in due if a not in g_side]
        used = set(g_side.values())
        other_chosen = s.chosen(other)
        avail = [b for b in self.structure(other).universe
                 if b not in used and (b not in other_chosen or h_other[b] <= n)]
        new = sorted(mv.a_prime - cur)
        choices = self.debt_choices(s, horizon)
        theta = self.cfg.theta
        for images in itertools.permutations(avail, len(todo)):
            fresh = [b for b in images if b not in other_chosen]
            if len(other_chosen) + len(fresh) > theta:
                continue
            g_new = dict(g_side)
            g_new.update(zip(todo, images))
            g1 = g_new if iota == 1 else {b: a for a, b in g_new.items()}
            if not self.preserves(g1):
                continue
            other_set = other_chosen | frozenset(fresh)
            h_o = dict(h_other)
            h_o.update((b, 0) for b in fresh)
            for ds in itertools.product(choices, repeat=len(new)):
                h_s = dict(h_side)
                h_s.update(zip(new, ds))
                if iota == 1:
                    yield State.make(mv.a_prime, other_set, h_s, h_o, g1, mv.beta_next, n + 1)
                else:
                    yield State.make(other_set, mv.a_prime, h_o, h_s, g1, mv.beta_next, n + 1)

    def iso_responses(self, s: State, mv: AisMove, horizon=None):
        return list(self.iter_iso_responses(s, mv, horizon))

    def response_violation(self, s: State, mv: AisMove, t: State) -> str | None:
        """Check ``t`` against every requirement on ISO's answer to ``mv`` at ``s``."""
        if not (0 <= mv.beta_next < s.beta) or mv.iota not in (1, 2):
            return "illegal-ais-move"
        if not s.chosen(mv.iota) <= mv.a_prime or len(mv.a_prime) > self.cfg.theta:
            return "illegal-ais-move"
        bad = self.state_violation(t)
        if bad:
            return bad
        iota, other = mv.iota, 3 - mv.iota
        if t.n != s.n + 1 or t.beta != mv.beta_next:
            return "not-successor"
        for side in (1, 2):
            if not s.chosen(side) <= t.chosen(side):
                return "sets-shrink"
            hs, ht = s.debts(side), t.debts(side)
            if any(ht.get(a) != v for a, v in hs.items()):
                return "debts-changed"
        if not set(s.g) <= set(t.g):
            return "g-shrinks"
        if t.chosen(iota) != mv.a_prime:
            return "wrong-chosen-set"
        if t.chosen(other) != s.chosen(other) | set(t.gmap(other)):
            return "wrong-image-set"
        ht = t.debts(iota)
        if any(ht[a] < s.n + 1 for a in mv.a_prime - s.chosen(iota)):
            return "new-debt-too-early"
        hs = s.debts(iota)
        if set(t.gmap(iota)) != {a for a in s.chosen(iota) if hs[a] < s.n + 1}:
            return "wrong-due-set"
        return None

    def winner_if_terminal(self, s: State, pending: AisMove | None = None):
        """ISO if AIS cannot move, AIS if ``pending`` has no answer, else None."""
        if pending is not None:
            return AIS if next(self.iter_iso_responses(s, pending), None) is None else None
        if s.beta == 0:
            return ISO
        return None
