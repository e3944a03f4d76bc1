"""Reading source files and the bundled corpus.

A process file may carry a header line ``-- context: a:end, b:end`` giving the
types of its free names; ``(closed)`` marks an empty context.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from sessio.parser import parse_context, parse_process
from sessio.process import Process

CORPUS = Path(__file__).parent / "corpus"

_HEADER = re.compile(r"^--\s*context:(.*)$", re.MULTILINE)


@dataclass(frozen=True)
class Source:
    path: str
    text: str
    process: Process
    context: dict
    description: str


def header_context(text: str) -> dict:
    """The context declared in a ``-- context:`` header, empty if there is none."""
    m = _HEADER.search(text)
    if m is None or m.group(1).strip() == "(closed)":
        return {}
    return parse_context(m.group(1))


def description(text: str) -> str:
    first = text.lstrip().splitlines()[0] if text.strip() else ""
    return first[2:].strip() if first.startswith("--") and not _HEADER.match(first) else ""


def load_process(path: str | Path) -> Source:
    text = Path(path).read_text(encoding="utf-8")
    return Source(str(path), text, parse_process(text), header_context(text), description(text))


def corpus_files(kind: str = "ap") -> list[Path]:
    """Bundled corpus files: ``ap`` and ``lastn`` directories, or ``examples`` at the top."""
    match kind:
        case "examples":
            return sorted(CORPUS.glob("*.pi"))
        case "ap":
            return sorted((CORPUS / "ap").glob("*.pi"))
        case "lastn":
            return sorted((CORPUS / "lastn").glob("*.lastn"))
    raise ValueError(f"unknown corpus {kind!r}")
