"""Exact solving by memoized backward induction.

Positions are cached by their canonical core: the counter is shifted to 0,
matched elements carry debt -1, overdue debts collapse to 0, and debts the
clock can no longer reach collapse to TOP.  Together with the clock this
determines the value of a position.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .errors import BudgetExceeded
from .game import AIS, ISO, STABLE, TOP, AisMove, Game, GameConfig, State
from .structures import GammaMode, Structure

MUTATIONS = ("side1-debts-due",)


def default_theta(m1, m2):
    return max(len(m1), len(m2))


def canonical_core(s: State, clamp=True):
    """The clock-free part of a position, debts made relative to the counter."""
    def rel(h, matched):
        out = []
        for a, d in h:
            if a in matched:
                out.append((a, -1))
            elif d == TOP:
                out.append((a, TOP))
            else:
                d -= s.n
                if d <= 0:
                    d = 0
                elif clamp and d >= s.beta:
                    d = TOP
                out.append((a, d))
        return tuple(out)
    dom = {a for a, _ in s.g}
    rng = {b for _, b in s.g}
    return (s.a1, s.a2, rel(s.h1, dom), rel(s.h2, rng), s.g)


class Solver:
    """Game values for one pair of structures at a fixed width and mode.

    ``memo=False`` disables the transposition cache; ``clamp=False`` keys
    the cache by raw positions instead of canonical cores.
    """

    def __init__(self, m1: Structure, m2: Structure, mode=GammaMode.BS, theta=None, *,
                 memo=True, clamp=True, horizon_slack=0, mutation=None):
        theta = default_theta(m1, m2) if theta is None else theta
        self.game = Game(m1, m2, GameConfig(mode, theta, STABLE), horizon_slack)
        self.memo = memo
        self.clamp = clamp
        if mutation is not None and mutation not in MUTATIONS:
            raise ValueError(f"unknown mutation {mutation!r}")
        self.mutation = mutation
        self._iso = {}
        self._ais = {}
        self.nodes = 0

    @property
    def theta(self):
        return self.game.cfg.theta

    def normalize(self, s: State) -> State:
        if not self.clamp:
            return s
        a1, a2, h1, h2, g = canonical_core(s)
        if self.mutation == "side1-debts-due":
            h1 = tuple((a, 0 if d != -1 else d) for a, d in h1)
        return State(a1, a2, h1, h2, g, s.beta, 0)

    def iso_wins(self, s: State) -> bool:
        """Does ISO have a winning strategy from the position ``s``?"""
        s = self.normalize(s)
        if self.memo and s in self._iso:
            return self._iso[s]
        self.nodes += 1
        game = self.game
        if s.beta == 0:
            val = True
        else:
            val = all(any(self.iso_wins(t) for t in game.iter_iso_responses(s, mv))
                      for mv in game.ais_moves(s))
        if self.memo:
            self._iso[s] = val
        return val

    def ais_wins(self, s: State) -> bool:
        """Dual recursion: does AIS have a winning strategy from ``s``?"""
        s = self.normalize(s)
        if self.memo and s in self._ais:
            return self._ais[s]
        game = self.game
        if s.beta == 0:
            val = False
        else:
            val = any(all(self.ais_wins(t) for t in game.iter_iso_responses(s, mv))
                      for mv in game.ais_moves(s))
        if self.memo:
            self._ais[s] = val
        return val

    def best_response(self, s: State, mv: AisMove) -> State | None:
        """First ISO answer in canonical order that keeps ISO winning, else any answer, else None."""
        first = None
        for t in self.game.iter_iso_responses(s, mv):
            if self.iso_wins(t):
                return t
            if first is None:
                first = t
        return first

    def winning_ais_move(self, s: State) -> AisMove | None:
        """First AIS move after which every ISO answer loses, if there is one."""
        for mv in self.game.ais_moves(s):
            if not any(self.iso_wins(t) for t in self.game.iter_iso_responses(s, mv)):
                return mv
        return None

    def winner(self, alpha: int) -> str:
        init = self.game.initial_state(alpha)
        if init is None:
            return AIS
        return ISO if self.iso_wins(init) else AIS


@dataclass
class Strategy:
    """Deterministic strategy handle backed by a solver's cache."""

    solver: Solver

    def respond(self, s, mv):
        return self.solver.best_response(s, mv)

    def ais_move(self, s):
        return self.solver.winning_ais_move(s)


@dataclass
class Verdict:
    winner: str
    nodes: int
    millis: float
    strategy: Strategy = field(repr=False)
    initial: State | None = None


def solve(m1: Structure, m2: Structure, cfg: GameConfig, **solver_opts) -> Verdict:
    if cfg.alpha == STABLE:
        raise ValueError("solve needs a finite clock; use rank for the stable clock")
    start = time.perf_counter()
    solver = Solver(m1, m2, cfg.mode, cfg.theta, **solver_opts)
    init = solver.game.initial_state(cfg.alpha)
    if init is None:
        winner = AIS
    else:
        winner = ISO if solver.iso_wins(init) else AIS
    millis = (time.perf_counter() - start) * 1000
    return Verdict(winner, solver.nodes, millis, Strategy(solver), init)


@dataclass(frozen=True)
class AisWinsAt:
    r: int


@dataclass(frozen=True)
class IsoStable:
    beta_star: int


def survival_table(solver: Solver, debt_cap=1):
    """Per-clock counts of positions where ISO survives, and the final survival set.

    Positions range over the cores reachable from the empty position when
    ISO's finite debts are capped at ``debt_cap`` rounds ahead; entry ``j``
    counts cores from which ISO survives ``j`` further AIS moves under that
    cap.  Capping only weakens ISO, so a stable set containing the empty
    position certifies an ISO win at every finite clock.
    """
    game = solver.game
    init = game.initial_state(0)
    if init is None:
        return [0], frozenset(), None

    def core(s):
        a1, a2, h1, h2, g = canonical_core(s, clamp=False)
        return State(a1, a2, h1, h2, g, 0, 0)

    root = core(init)
    succ = {}
    frontier = [root]
    while frontier:
        c = frontier.pop()
        if c in succ:
            continue
        moves = []
        for iota, a_prime in game.ais_choices(c):
            mv = AisMove(0, iota, a_prime)
            kids = frozenset(core(t) for t in game.iter_iso_responses(c, mv, horizon=debt_cap))
            moves.append(kids)
            frontier.extend(k for k in kids if k not in succ)
        succ[c] = moves
    alive = frozenset(succ)
    counts = [len(alive)]
    while True:
        nxt = frozenset(c for c in alive
                        if all(any(k in alive for k in kids) for kids in succ[c]))
        counts.append(len(nxt))
        if nxt == alive:
            return counts, alive, root
        alive = nxt


def rank(m1: Structure, m2: Structure, theta=None, mode=GammaMode.BS, *,
         debt_cap=1, max_clock=32, **solver_opts):
    """Least finite clock at which AIS wins, or a certificate that ISO wins at all of them."""
    solver = Solver(m1, m2, mode, theta, **solver_opts)
    if solver.game.initial_state(0) is None:
        return AisWinsAt(0)
    counts, alive, root = survival_table(solver, debt_cap)
    beta_star = len(counts) - 2
    for k in range(max_clock + 1):
        if solver.winner(k) == AIS:
            return AisWinsAt(k)
        if k >= beta_star and root in alive:
            return IsoStable(beta_star)
    raise BudgetExceeded("clock-budget", f"no verdict up to clock {max_clock}")


def stabilization_report(m1, m2, theta=None, mode=GammaMode.BS, *, debt_cap=1):
    """``[(clock, surviving core count), ...]``; non-increasing, last two equal iff stable."""
    solver = Solver(m1, m2, mode, theta)
    counts, _, _ = survival_table(solver, debt_cap)
    return list(enumerate(counts))


def e0_equiv(m1: Structure, m2: Structure, cfg: GameConfig, **solver_opts) -> bool:
    """Does ISO win the game at ``cfg``?  The stable clock means: at every finite clock."""
    if cfg.alpha == STABLE:
        return isinstance(rank(m1, m2, cfg.theta, cfg.mode, **solver_opts), IsoStable)
    return solve(m1, m2, cfg, **solver_opts).winner == ISO


def to_dot(solver: Solver, init: State, limit=500) -> str:
    """The solved game graph reachable from ``init`` in DOT, nodes coloured by winner.

    Positions are boxes, AIS moves are small diamonds; exploration stops
    after ``limit`` positions and truncated positions are drawn dashed.
    """
    ids = {}
    lines = ["digraph game {", "  rankdir=LR;", '  node [fontname="monospace", fontsize=9];']

    def node(s):
        if s not in ids:
            ids[s] = f"s{len(ids)}"
        return ids[s]

    def label(s):
        return s.dumps().replace('"', "'")

    seen = set()
    queue = [solver.normalize(init)]
    moves = 0
    while queue:
        s = queue.pop(0)
        if s in seen:
            continue
        seen.add(s)
        win = solver.iso_wins(s)
        cut = len(seen) > limit
        style = ', style="filled,dashed"' if cut else ', style=filled'
        colour = "palegreen" if win else "lightpink"
        lines.append(f'  {node(s)} [shape=box, label="{label(s)}", fillcolor={colour}{style}];')
        if cut:
            continue
        for mv in solver.game.ais_moves(s):
            m = f"m{moves}"
            moves += 1
            ok = any(solver.iso_wins(t) for t in solver.game.iter_iso_responses(s, mv))
            lines.append(f'  {m} [shape=diamond, label="{mv.iota}:{",".join(sorted(mv.a_prime))}'
                         f'/{mv.beta_next}", fillcolor={"palegreen" if ok else "lightpink"}, '
                         'style=filled];')
            lines.append(f"  {node(s)} -> {m};")
            for t in solver.game.iter_iso_responses(s, mv):
                t = solver.normalize(t)
                lines.append(f"  {m} -> {node(t)};")
                queue.append(t)
    for s, i in ids.items():
        if s not in seen:
            lines.append(f'  {i} [shape=box, label="{label(s)}", style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"
