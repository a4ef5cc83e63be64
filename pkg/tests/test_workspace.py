import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shelah_lab import workspace
from shelah_lab.errors import LabError
from shelah_lab.game import STABLE, GameConfig
from shelah_lab.harness import gen_exhaustive, parse_vocab_tokens
from shelah_lab.structures import GammaMode
from shelah_lab.workspace import Workspace, WorkspaceError

FIXTURES = Path(__file__).parent / "fixtures"
WORKSPACES = sorted(p for p in FIXTURES.glob("*.json") if not p.name.startswith("oracle"))


@pytest.mark.parametrize("path", WORKSPACES, ids=lambda p: p.stem)
def test_round_trip_is_a_fixed_point(path):
    ws = workspace.load(path)
    once = ws.dumps()
    again = workspace.loads(once).dumps()
    assert once == again
    assert json.loads(once) == json.loads(path.read_text())


corpus = gen_exhaustive(parse_vocab_tokens("bin+fun"), 2).structures


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(corpus), max_size=4, unique_by=lambda m: m.name),
       st.integers(1, 3), st.sampled_from([0, 1, 5, STABLE]), st.sampled_from(list(GammaMode)))
def test_generated_workspaces_round_trip(ms, theta, alpha, mode):
    ws = Workspace(corpus[0].vocab, ms, {"c": GameConfig(mode, theta, alpha)})
    text = ws.dumps()
    back = workspace.loads(text)
    assert back.dumps() == text
    for m in ms:
        assert back.structure(m.name).content_key() == m.content_key()
    assert back.config("c") == ws.config("c")


def _doc(**over):
    doc = json.loads((FIXTURES / "constants.json").read_text())
    doc.update(over)
    return json.dumps(doc)


def test_errors_have_kinds():
    with pytest.raises(WorkspaceError) as exc:
        workspace.loads("{not json")
    assert exc.value.code == "bad-json"
    with pytest.raises(LabError) as exc:
        workspace.loads(_doc(structures=[{"name": "x", "universe": ["a"],
                                          "relations": {"P": [["z"]]}, "functions": {}}]))
    assert exc.value.code == "invalid-structure"
    with pytest.raises(LabError):
        workspace.loads(_doc(configs=[{"name": "z", "mode": "bs", "theta": 0, "alpha": 1}]))
    with pytest.raises(LabError):
        workspace.loads(_doc(vocabulary=None))
    ws = workspace.loads(_doc())
    with pytest.raises(LabError) as exc:
        ws.structure("nobody")
    assert exc.value.code == "unknown-name"
    with pytest.raises(WorkspaceError):
        workspace.load(FIXTURES / "missing.json")
