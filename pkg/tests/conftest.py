import json
from pathlib import Path

import pytest

from abstf.cfg import build_cfgs
from abstf.lang import parse_program


@pytest.fixture
def make_project(tmp_path):
    """Write sources + manifests into a fresh project directory."""

    def _make(sources, tests, requirements=(), name="proj"):
        root = tmp_path / name
        root.mkdir(exist_ok=True)
        for fname, text in sources.items():
            (root / fname).write_text(text)
        (root / "tests.json").write_text(json.dumps({"tests": tests}))
        (root / "requirements.json").write_text(json.dumps(
            {"requirements": [{"id": r, "text": f"requirement {r}"} for r in requirements]}))
        return root

    return _make


def compile_src(src):
    prog = parse_program(src)
    return prog, build_cfgs(prog)


def edit(root: Path, fname: str, text: str):
    (root / fname).write_text(text)
