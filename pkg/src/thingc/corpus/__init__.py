"""Executable encodings of the worked examples, indexed by ``manifest.json``."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    path: Path
    figures: tuple[str, ...]
    oracles: tuple[str, ...]
    valid: bool = True
    acyclic: bool = True
    fsm: Optional[Path] = None
    horizon: Optional[int] = None
    expected: dict = field(default_factory=dict, compare=False, hash=False)

    def load(self):
        from ..dsl import parse_file
        return parse_file(self.path)


def corpus_dir() -> Path:
    return Path(str(resources.files(__name__)))


def corpus_manifest() -> list[CorpusEntry]:
    root = corpus_dir()
    data = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    return [
        CorpusEntry(
            name=e["name"],
            path=root / e["file"],
            figures=tuple(e["figures"]),
            oracles=tuple(e["oracles"]),
            valid=e.get("valid", True),
            acyclic=e.get("acyclic", True),
            fsm=root / e["fsm"] if "fsm" in e else None,
            horizon=e.get("horizon"),
            expected=e.get("expected", {}),
        )
        for e in data["entries"]
    ]


def entry(name: str) -> CorpusEntry:
    for e in corpus_manifest():
        if e.name == name:
            return e
    raise KeyError(name)
