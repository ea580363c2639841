"""The shipped pp-formula corpus."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import List

from .formula import PPFormula, parse_formula
from .series_field import SeriesRing, default_ring


@dataclass
class CorpusEntry:
    line: int
    ring: SeriesRing
    text: str

    def formula(self) -> PPFormula:
        return parse_formula(self.ring, self.text)


def parse_corpus(text: str) -> List[CorpusEntry]:
    """Lines are formulas; '@ring p k lattice' switches the model, '#' starts a comment."""
    ring = default_ring(2, 2)
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("@ring"):
            parts = line.split()
            if len(parts) != 4:
                raise ValueError(f"line {no}: expected '@ring p k lattice'")
            ring = default_ring(int(parts[1]), int(parts[2]), parts[3])
            continue
        out.append(CorpusEntry(no, ring, line))
    return out


def load_corpus() -> List[CorpusEntry]:
    return parse_corpus(resources.files("oreqe").joinpath("data/corpus.txt").read_text(encoding="utf-8"))
