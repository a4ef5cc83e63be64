"""One-file JSON workspaces: a vocabulary, a family of structures and named configs.

Function tables are keyed by the comma-joined argument ids (the empty
string for constants); element ids therefore may not contain commas.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .equivalence import Family
from .errors import LabError
from .game import STABLE, GameConfig
from .structures import GammaMode, Structure, Vocabulary, validate_structure


class WorkspaceError(LabError):
    """The document is not a valid workspace (CLI exit code 3)."""


def vocab_to_json(v: Vocabulary):
    return {"predicates": dict(sorted(v.predicates.items())),
            "functions": dict(sorted(v.functions.items()))}


def vocab_from_json(doc) -> Vocabulary:
    return Vocabulary(doc.get("predicates", {}), doc.get("functions", {}))


def structure_to_json(s: Structure):
    return {
        "name": s.name,
        "universe": list(s.universe),
        "relations": {p: sorted(list(t) for t in ts) for p, ts in sorted(s.relations.items())},
        "functions": {f: {",".join(t): v for t, v in sorted(table.items())}
                      for f, table in sorted(s.functions.items())},
    }


def _split_key(key, arity):
    if arity == 0:
        if key != "":
            raise WorkspaceError("bad-function-key", repr(key))
        return ()
    parts = tuple(key.split(","))
    if len(parts) != arity:
        raise WorkspaceError("bad-function-key", repr(key))
    return parts


def structure_from_json(doc, vocab: Vocabulary, validate=True) -> Structure:
    try:
        funcs = {f: {_split_key(k, vocab.functions.get(f, 0)): v for k, v in table.items()}
                 for f, table in doc.get("functions", {}).items()}
        s = Structure(doc["name"], vocab, doc["universe"],
                      {p: [tuple(t) for t in ts] for p, ts in doc.get("relations", {}).items()},
                      funcs)
    except (KeyError, TypeError, AttributeError) as exc:
        raise WorkspaceError("bad-structure", f"{exc!r}") from None
    if validate:
        bad = validate_structure(s)
        if bad is not None:
            raise WorkspaceError("invalid-structure", f"{s.name}: {bad}")
    return s


def config_to_json(name, cfg: GameConfig):
    return {"name": name, "mode": cfg.mode.value, "theta": cfg.theta, "alpha": cfg.alpha}


def config_from_json(doc) -> GameConfig:
    try:
        alpha = doc["alpha"]
        if alpha != STABLE:
            alpha = int(alpha)
        return GameConfig(GammaMode(doc.get("mode", "bs")), int(doc["theta"]), alpha)
    except (KeyError, ValueError, TypeError) as exc:
        raise WorkspaceError("bad-config", f"{exc!r}") from None


@dataclass
class Workspace:
    vocab: Vocabulary
    family: Family
    configs: dict = field(default_factory=dict)

    def structure(self, name):
        return self.family.get(name)

    def config(self, name):
        try:
            return self.configs[name]
        except KeyError:
            raise LabError("unknown-name", name) from None

    def to_json(self):
        return {
            "vocabulary": vocab_to_json(self.vocab),
            "structures": [structure_to_json(s) for s in self.family],
            "configs": [config_to_json(n, c) for n, c in self.configs.items()],
        }

    def dumps(self):
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


def workspace_from_json(doc, name="workspace") -> Workspace:
    try:
        return _workspace_from_json(doc, name)
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, LabError):
            raise
        raise WorkspaceError("bad-workspace", f"malformed document: {exc!r}") from None


def _workspace_from_json(doc, name):
    if not isinstance(doc, dict) or "vocabulary" not in doc:
        raise WorkspaceError("bad-workspace", "missing vocabulary")
    try:
        vocab = vocab_from_json(doc["vocabulary"])
    except LabError as exc:
        raise WorkspaceError(exc.code, str(exc)) from None
    structures = [structure_from_json(d, vocab) for d in doc.get("structures", [])]
    try:
        family = Family(name, structures)
    except LabError as exc:
        raise WorkspaceError(exc.code, str(exc)) from None
    configs = {}
    for d in doc.get("configs", []):
        if "name" not in d:
            raise WorkspaceError("bad-config", "config without a name")
        configs[d["name"]] = config_from_json(d)
    return Workspace(vocab, family, configs)


def loads(text, name="workspace") -> Workspace:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorkspaceError("bad-json", str(exc)) from None
    return workspace_from_json(doc, name)


def load(path) -> Workspace:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise WorkspaceError("unreadable", str(exc)) from None
    return loads(text, name=str(path))
