"""Command line: solve, rank, equiv-matrix, play and props.

Exit codes: 0 ok, 2 unknown name, 3 unreadable or invalid input,
4 illegal scripted move, 5 budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import harness, workspace
from .equivalence import e1_partition
from .errors import BudgetExceeded, LabError
from .game import AIS, ISO, STABLE, AisMove, Game, GameConfig, State
from .solver import AisWinsAt, IsoStable, Solver, rank, solve, to_dot
from .structures import GammaMode

EXIT_NAME, EXIT_PARSE, EXIT_ILLEGAL, EXIT_BUDGET = 2, 3, 4, 5

SUITES = {"facts": "facts", "a12": "facts", "product": "product", "a36": "product",
          "sum": "sum", "a40": "sum", "rigidity": "rigidity", "a30": "rigidity"}


class IllegalMove(LabError):
    pass


def default_seed():
    return int(os.environ.get("SHELAH_LAB_SEED", "0"))


def _emit(doc):
    print(json.dumps(doc, sort_keys=True))


def _config(ws, args) -> GameConfig:
    if args.config:
        cfg = ws.config(args.config)
    else:
        cfg = GameConfig(GammaMode.BS, 2, 2)
    mode = GammaMode(args.mode) if args.mode else cfg.mode
    theta = args.theta if args.theta is not None else cfg.theta
    alpha = cfg.alpha
    requested = getattr(args, "alpha", None)
    if requested is not None:
        try:
            alpha = requested if requested == STABLE else int(requested)
        except ValueError:
            raise LabError("bad-config", f"clock {requested!r}") from None
    try:
        return GameConfig(mode, theta, alpha)
    except ValueError as exc:
        raise LabError("bad-config", str(exc)) from None


def _add_config_flags(p, need_alpha=True):
    p.add_argument("--config", help="named config from the workspace")
    p.add_argument("--theta", type=int)
    p.add_argument("--mode", choices=[m.value for m in GammaMode])
    if need_alpha:
        p.add_argument("--alpha", help="finite clock or 'stable'")


def rank_json(r):
    if isinstance(r, AisWinsAt):
        return {"aisWinsAt": r.r}
    return {"isoStable": r.beta_star}


# -- commands ----------------------------------------------------------------

def cmd_solve(args):
    ws = workspace.load(args.file)
    m1, m2 = ws.structure(args.left), ws.structure(args.right)
    cfg = _config(ws, args)
    if cfg.alpha == STABLE:
        r = rank(m1, m2, cfg.theta, cfg.mode)
        _emit({"winner": ISO if isinstance(r, IsoStable) else AIS, "rank": rank_json(r)})
        return 0
    v = solve(m1, m2, cfg)
    _emit({"winner": v.winner, "nodes": v.nodes, "millis": round(v.millis, 3)})
    if args.dot:
        sv = v.strategy.solver
        init = v.initial
        if init is None:
            text = 'digraph game {\n  s0 [shape=box, label="no initial state", ' \
                   'fillcolor=lightpink, style=filled];\n}\n'
        else:
            text = to_dot(sv, init, args.dot_limit)
        Path(args.dot).write_text(text, encoding="utf-8")
    return 0


def cmd_rank(args):
    ws = workspace.load(args.file)
    m1, m2 = ws.structure(args.left), ws.structure(args.right)
    cfg = _config(ws, args) if (args.config or args.theta is not None) else None
    theta = cfg.theta if cfg else None
    mode = cfg.mode if cfg else (GammaMode(args.mode) if args.mode else GammaMode.BS)
    r = rank(m1, m2, theta, mode, debt_cap=args.debt_cap, max_clock=args.max_clock)
    _emit({"rank": rank_json(r)})
    return 0


def cmd_equiv_matrix(args):
    ws = workspace.load(args.file)
    cfg = _config(ws, args)
    part = e1_partition(ws.family, cfg)
    names = [m.name for m in ws.family]
    matrix = {x: {y: part.cell(x, y) for y in names} for x in names}
    doc = {"config": workspace.config_to_json(args.config or "cli", cfg),
           "blocks": part.blocks, "matrix": matrix,
           "witnesses": {f"{x} {y}": chain for (x, y), chain in sorted(part.witnesses.items())}}
    if args.json:
        _emit(doc)
        return 0
    print(f"{len(part.blocks)} blocks")
    for b in part.blocks:
        print("  {" + ", ".join(b) + "}")
    if names:
        width = max(len(n) for n in names + ["E1-only"])
        print(" " * width + " " + " ".join(n.rjust(width) for n in names))
        for x in names:
            print(x.rjust(width) + " " + " ".join(matrix[x][y].rjust(width) for y in names))
    return 0


# -- play --------------------------------------------------------------------

class Script:
    """Move indices from a file, or interactive prompts on a terminal."""

    def __init__(self, indices=None, stream=None, out=None, page=10, filt=""):
        self.indices = list(indices) if indices is not None else None
        self.stream = stream or sys.stdin
        self.out = out or sys.stdout
        self.page = page
        self.filt = filt

    @property
    def scripted(self):
        return self.indices is not None

    def choose(self, options, describe, matches):
        if self.scripted:
            if not self.indices:
                raise IllegalMove("script-exhausted")
            k = self.indices.pop(0)
            if not 0 <= k < len(options):
                raise IllegalMove("illegal-move", f"index {k} of {len(options)}")
            return k
        start = 0
        while True:
            shown = [i for i, o in enumerate(options) if matches(o, self.filt)]
            for i in shown[start:start + self.page]:
                print(f"  [{i}] {describe(options[i])}", file=self.out)
            print(f"  ({len(shown)} shown of {len(options)}; number to pick, n next page, "
                  "f <filter> e.g. 'f side=1 beta=0 set=a,b')", file=self.out)
            line = self.stream.readline()
            if not line:
                raise IllegalMove("end-of-input")
            line = line.strip()
            if line == "n":
                start = start + self.page if start + self.page < len(shown) else 0
                continue
            if line.startswith("f"):
                self.filt, start = line[1:].strip(), 0
                continue
            try:
                k = int(line)
            except ValueError:
                print("  not a move index", file=self.out)
                continue
            if 0 <= k < len(options):
                return k
            print("  no such move", file=self.out)


def _move_matches(mv: AisMove, filt):
    for tok in filt.split():
        key, _, val = tok.partition("=")
        if key == "side" and str(mv.iota) != val:
            return False
        if key == "beta" and str(mv.beta_next) != val:
            return False
        if key == "set" and set(filter(None, val.split(","))) != set(mv.a_prime):
            return False
    return True


def _describe_move(mv: AisMove):
    return f"beta'={mv.beta_next} side={mv.iota} set={{{','.join(sorted(mv.a_prime))}}}"


def play_session(game: Game, solver: Solver, role, script: Script):
    """Run one game with the human on ``role``; returns the transcript dict."""
    steps = []
    s = game.initial_state()
    winner = None
    if s is None:
        winner = AIS
    while winner is None:
        winner = game.winner_if_terminal(s)
        if winner is not None:
            break
        moves = game.ais_moves(s)
        if role == AIS.lower():
            mv = moves[script.choose(moves, _describe_move, _move_matches)]
            ais_by = "human"
        else:
            mv = solver.winning_ais_move(s) or moves[0]
            ais_by = "engine"
        step = {"ais": mv.to_json(), "ais_by": ais_by}
        responses = game.iso_responses(s, mv)
        if not responses:
            step["iso"] = None
            steps.append(step)
            winner = AIS
            break
        if role == ISO.lower():
            t = responses[script.choose(responses, lambda r: r.dumps(), lambda r, f: f in r.dumps())]
            step["iso_by"] = "human"
        else:
            t = solver.best_response(s, mv)
            step["iso_by"] = "engine"
        step["iso"] = t.to_json()
        steps.append(step)
        s = t
    initial = game.initial_state()
    return {"initial": initial.to_json() if initial else None, "steps": steps,
            "winner": winner, "final": s.to_json() if s else None}


def replay_transcript(game: Game, doc):
    """Push a transcript's choices back through the engine and rebuild it.

    Raises IllegalMove when a recorded move or answer is not legal.
    """
    s = game.initial_state()
    if (s.to_json() if s else None) != doc["initial"]:
        raise IllegalMove("initial-mismatch")
    steps = []
    winner = AIS if s is None else None
    for step in doc["steps"]:
        if winner is not None:
            raise IllegalMove("moves-after-end")
        mv = AisMove.from_json(step["ais"])
        if mv not in game.ais_moves(s):
            raise IllegalMove("illegal-move", step["ais"])
        out = {"ais": mv.to_json(), "ais_by": step["ais_by"]}
        if step["iso"] is None:
            if game.iso_responses(s, mv):
                raise IllegalMove("iso-had-an-answer")
            out["iso"] = None
            steps.append(out)
            winner = AIS
            continue
        t = State.from_json(step["iso"])
        bad = game.response_violation(s, mv, t)
        if bad:
            raise IllegalMove("illegal-response", bad)
        out["iso_by"] = step["iso_by"]
        out["iso"] = t.to_json()
        steps.append(out)
        s = t
        winner = game.winner_if_terminal(s)
    if winner is None:
        winner = game.winner_if_terminal(s)
    return {"initial": doc["initial"], "steps": steps, "winner": winner,
            "final": s.to_json() if s else None}


def _transcript_doc(args, cfg, body):
    return {"left": args.left, "right": args.right, "role": args.role,
            "config": workspace.config_to_json(args.config or "cli", cfg), **body}


def dumps_transcript(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _read_moves(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = text.split()
    if not isinstance(data, list):
        data = text.split()
    try:
        return [int(x) for x in data]
    except (TypeError, ValueError):
        raise LabError("bad-moves", path) from None


def cmd_play(args):
    ws = workspace.load(args.file)
    m1, m2 = ws.structure(args.left), ws.structure(args.right)
    cfg = _config(ws, args)
    if cfg.alpha == STABLE:
        raise LabError("bad-config", "play needs a finite clock")
    game = Game(m1, m2, cfg)
    if args.replay:
        original = Path(args.replay).read_text(encoding="utf-8")
        try:
            doc = json.loads(original)
        except json.JSONDecodeError as exc:
            raise workspace.WorkspaceError("bad-json", str(exc)) from None
        try:
            rebuilt = _transcript_doc(args, cfg, replay_transcript(game, doc))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, LabError):
                raise
            raise workspace.WorkspaceError("bad-transcript", repr(exc)) from None
        same = dumps_transcript(rebuilt) == original
        _emit({"replay": "identical" if same else "different", "winner": rebuilt["winner"]})
        return 0 if same else EXIT_ILLEGAL
    solver = Solver(m1, m2, cfg.mode, cfg.theta)
    script = Script(_read_moves(args.moves) if args.moves else None, page=args.page,
                    filt=args.filter or "")
    body = play_session(game, solver, args.role, script)
    doc = _transcript_doc(args, cfg, body)
    if args.transcript:
        Path(args.transcript).write_text(dumps_transcript(doc), encoding="utf-8")
    print(f"winner: {doc['winner']}")
    return 0


# -- props -------------------------------------------------------------------

def _ints(text):
    return tuple(int(x) for x in text.split(",") if x)


def run_suite(name, corpus, args):
    seed = args.seed if args.seed is not None else default_seed()
    opts = {"mutation": args.mutate} if args.mutate else {}
    thetas = _ints(args.thetas) if args.thetas else None
    alphas = _ints(args.alphas) if args.alphas else None
    if name == "facts":
        return harness.check_game_facts(corpus, thetas or (1, 2), alphas or (0, 1, 2, 3),
                                        seed=seed, **opts)
    grid = tuple((t, a) for t in (thetas or (2,)) for a in (alphas or (2,)))
    if name == "product":
        return harness.check_product_theorem(corpus, grid, playouts=args.playouts, seed=seed,
                                             **opts)
    if name == "sum":
        return harness.check_sum_theorem(corpus, grid, playouts=args.playouts, seed=seed, **opts)
    return harness.check_rigidity(corpus, (thetas or (2,))[0], **opts)


def cmd_props(args):
    if args.file:
        corpus = harness.Corpus(f"file:{args.file}", workspace.load(args.file).family)
    else:
        corpus = harness.parse_corpus(args.corpus, budget=args.budget)
    if len(corpus.structures) > args.max_structures:
        raise BudgetExceeded("corpus-too-large", f"{len(corpus.structures)} structures")
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    ok = True
    for requested in args.suite:
        name = SUITES[requested]
        report = run_suite(name, corpus, args)
        print(report.to_text())
        if out:
            (out / f"{name}.json").write_text(harness.dumps_report(report) + "\n",
                                              encoding="utf-8")
            (out / f"{name}.txt").write_text(report.to_text() + "\n", encoding="utf-8")
        if not report.passed:
            ok = False
            for c in report.checks:
                if c.counterexample is None:
                    continue
                if out:
                    path = out / f"{name}-{c.name}-counterexample.json"
                    path.write_text(json.dumps(c.counterexample, indent=2, sort_keys=True,
                                               default=str) + "\n", encoding="utf-8")
                    print(f"counterexample transcript: {path}")
                else:
                    print(f"counterexample ({c.name}): "
                          + json.dumps(c.counterexample, sort_keys=True, default=str))
    return 0 if ok else 1


# -- entry point -------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="shelah-lab",
                                description="Solve and explore debt-rescheduling isomorphism games.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="winner of one game")
    s.add_argument("file")
    s.add_argument("left")
    s.add_argument("right")
    _add_config_flags(s)
    s.add_argument("--dot", help="write the solved game graph in DOT to this path")
    s.add_argument("--dot-limit", type=int, default=500)
    s.set_defaults(run=cmd_solve)

    r = sub.add_parser("rank", help="least AIS-winning clock or stability certificate")
    r.add_argument("file")
    r.add_argument("left")
    r.add_argument("right")
    _add_config_flags(r, need_alpha=False)
    r.add_argument("--debt-cap", type=int, default=1)
    r.add_argument("--max-clock", type=int, default=32)
    r.set_defaults(run=cmd_rank)

    e = sub.add_parser("equiv-matrix", help="E1 blocks and pairwise matrix of a family")
    e.add_argument("file")
    _add_config_flags(e)
    e.add_argument("--json", action="store_true")
    e.set_defaults(run=cmd_equiv_matrix)

    pl = sub.add_parser("play", help="play one side against the engine")
    pl.add_argument("file")
    pl.add_argument("left")
    pl.add_argument("right")
    _add_config_flags(pl)
    pl.add_argument("--role", choices=["ais", "iso"], default="ais")
    pl.add_argument("--moves", help="file of move indices (JSON list or whitespace separated)")
    pl.add_argument("--transcript", help="write the transcript here")
    pl.add_argument("--replay", help="replay a transcript and compare byte for byte")
    pl.add_argument("--page", type=int, default=10)
    pl.add_argument("--filter", help="initial move filter, e.g. 'side=1 beta=0'")
    pl.set_defaults(run=cmd_play)

    pr = sub.add_parser("props", help="run property suites")
    src = pr.add_mutually_exclusive_group()
    src.add_argument("--corpus", default="exhaustive:bin:2")
    src.add_argument("--file", help="workspace whose family is the corpus")
    pr.add_argument("--suite", action="append", choices=sorted(SUITES), required=True)
    pr.add_argument("--thetas")
    pr.add_argument("--alphas")
    pr.add_argument("--playouts", type=int, default=1000)
    pr.add_argument("--seed", type=int)
    pr.add_argument("--budget", type=int, default=harness.CORPUS_BUDGET,
                    help="ceiling on generated corpus size")
    pr.add_argument("--max-structures", type=int, default=64,
                    help="ceiling on structures fed to the pairwise suites")
    pr.add_argument("--mutate", choices=["side1-debts-due"])
    pr.add_argument("--out", help="directory for JSON/text reports and transcripts")
    pr.set_defaults(run=cmd_props)
    return p


def _fail(exc, code):
    detail = str(exc)
    msg = exc.code if detail == exc.code else f"{exc.code}: {detail}"
    print(f"error: {msg}", file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except IllegalMove as exc:
        return _fail(exc, EXIT_ILLEGAL)
    except BudgetExceeded as exc:
        return _fail(exc, EXIT_BUDGET)
    except workspace.WorkspaceError as exc:
        return _fail(exc, EXIT_PARSE)
    except LabError as exc:
        return _fail(exc, EXIT_NAME if exc.code == "unknown-name" else EXIT_PARSE)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
