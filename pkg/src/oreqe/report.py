"""Corpus soundness report: per-formula verdict counts as CSV and a bar chart."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Tuple

from .corpus import CorpusEntry, load_corpus
from .model_checker import DEFAULT_PRECISION, CompareReport, compare
from .qe_engine import eliminate

FIELDS = ["index", "line", "ring", "formula", "result", "rules", "sepdeg", "yes", "no", "unknown", "unknown_rate", "disagreements", "seconds"]


@dataclass
class CorpusRow:
    index: int
    entry: CorpusEntry
    result: str
    rules: List[str]
    sepdegs: List[Tuple[int, int]]
    report: CompareReport
    seconds: float

    def as_dict(self) -> dict:
        r = self.report
        return {
            "index": self.index,
            "line": self.entry.line,
            "ring": f"{self.entry.ring.field.spec()} {self.entry.ring.lattice.spec()}",
            "formula": self.entry.text,
            "result": self.result,
            "rules": " ".join(self.rules),
            "sepdeg": " ".join(f"{a}->{b}" for a, b in self.sepdegs),
            "yes": r.yes,
            "no": r.no,
            "unknown": r.unknown,
            "unknown_rate": f"{r.unknown_rate:.4f}",
            "disagreements": len(r.disagreements),
            "seconds": f"{self.seconds:.3f}",
        }


def run_corpus(
    samples: int = 200,
    seed: int = 0,
    N=DEFAULT_PRECISION,
    mode: str = "ttor",
    entries: Optional[List[CorpusEntry]] = None,
    progress: Optional[Callable[[CorpusRow], None]] = None,
) -> List[CorpusRow]:
    rows = []
    for i, entry in enumerate(entries if entries is not None else load_corpus()):
        t0 = time.perf_counter()
        phi = entry.formula()
        psi, trace = eliminate(phi, mode)
        rep = compare(phi, psi, samples=samples, seed=seed, N=N)
        row = CorpusRow(
            i, entry, str(psi), [s.rule for s in trace.steps], [s.sepdeg for s in trace.steps], rep,
            time.perf_counter() - t0,
        )
        rows.append(row)
        if progress:
            progress(row)
    return rows


def write_csv(rows: List[CorpusRow], path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow(r.as_dict())


def write_png(rows: List[CorpusRow], path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    idx = [r.index for r in rows]
    yes = [r.report.yes for r in rows]
    no = [r.report.no for r in rows]
    unk = [r.report.unknown for r in rows]
    bad = [len(r.report.disagreements) for r in rows]
    fig, ax = plt.subplots(figsize=(max(8, len(rows) * 0.22), 4.5))
    ax.bar(idx, yes, label="solvable", color="#4c72b0")
    ax.bar(idx, no, bottom=yes, label="not solvable", color="#dd8452")
    ax.bar(idx, unk, bottom=[a + b for a, b in zip(yes, no)], label="unknown", color="#bbbbbb")
    if any(bad):
        ax.scatter([i for i, b in zip(idx, bad) if b], [0] * sum(1 for b in bad if b), marker="x", color="red", label="disagreement")
    ax.set_xlabel("corpus formula")
    ax.set_ylabel("samples")
    ax.set_title("Model-checker verdicts per corpus formula")
    ax.legend(loc="upper right", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(rows: List[CorpusRow], outdir: Path) -> List[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    csv_path, png_path = outdir / "corpus_report.csv", outdir / "corpus_report.png"
    write_csv(rows, csv_path)
    write_png(rows, png_path)
    return [csv_path, png_path]
