"""Generation / executability / accuracy rates over candidate-vs-reference corpora.

A candidate is *generated* when its text is present and nonempty,
*executable* when repair, parsing and validation leave no errors and the
solver reaches a definite verdict, and *correct* when it is executable and
its optimal objective matches the reference optimum. Executability and
accuracy are both divided by the number of generated candidates.
"""

from __future__ import annotations

import csv
import io
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from lpforge.errors import LPForgeError, count_errors
from lpforge.lp.model import Model
from lpforge.lp.parser import parse_lp, parse_lp_diagnostics
from lpforge.lp.validate import validate
from lpforge.repair import repair
from lpforge.solver.core import INFEASIBLE, OPTIMAL, UNBOUNDED, SolveConfig, solve

DEFINITE = (OPTIMAL, INFEASIBLE, UNBOUNDED)

CANDIDATE_FILE = "candidate.lp"
REFERENCE_FILE = "reference.lp"


@dataclass(frozen=True)
class CorpusEntry:
    sample_id: str
    candidate: Optional[str]
    reference: Model
    generated: Optional[bool] = None
    executable: Optional[bool] = None
    correct: Optional[bool] = None
    # short reason for the first rung the candidate failed, empty when correct
    note: str = ""

    @property
    def judged(self) -> bool:
        return self.generated is not None


def _ladder(entry: CorpusEntry, generated: bool, executable: bool, correct: bool, note: str) -> CorpusEntry:
    return replace(entry, generated=generated, executable=executable and generated,
                   correct=correct and executable and generated, note=note)


def reference_objective(reference: Model, cfg: SolveConfig = SolveConfig()):
    sol = solve(reference, cfg)
    if sol.status != OPTIMAL:
        raise LPForgeError("REFERENCE_NOT_OPTIMAL", f"reference solves to {sol.status}")
    return sol.objective


def judge_entry(entry: CorpusEntry, cfg: SolveConfig = SolveConfig(), reference_obj=None) -> CorpusEntry:
    """Fill in the three ladder flags; ``reference_obj`` skips re-solving the reference."""
    if reference_obj is None:
        reference_obj = reference_objective(entry.reference, cfg)
    text = entry.candidate
    if text is None or not text.strip():
        return _ladder(entry, False, False, False, "absent")
    repaired, _ = repair(text)
    model, diags = parse_lp_diagnostics(repaired)
    if model is None or count_errors(diags):
        return _ladder(entry, True, False, False, "parse")
    if count_errors(validate(model)):
        return _ladder(entry, True, False, False, "validate")
    sol = solve(model, cfg)
    if sol.status not in DEFINITE:
        return _ladder(entry, True, False, False, sol.status)
    if sol.status != OPTIMAL:
        return _ladder(entry, True, True, False, sol.status)
    if not cfg.objectives_equal(sol.objective, reference_obj):
        return _ladder(entry, True, True, False, "objective")
    return _ladder(entry, True, True, True, "")


def _judge_job(args: Tuple[CorpusEntry, SolveConfig]) -> CorpusEntry:
    return judge_entry(*args)


def judge_corpus(entries: Sequence[CorpusEntry], cfg: SolveConfig = SolveConfig(), jobs: int = 1) -> List[CorpusEntry]:
    """Judge every entry (in parallel when ``jobs > 1``); output sorted by sample_id."""
    ordered = sorted(entries, key=lambda e: e.sample_id)
    tasks = [(e, cfg) for e in ordered]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_judge_job, tasks))
    return [_judge_job(t) for t in tasks]


@dataclass(frozen=True)
class MetricsReport:
    n_total: int
    n_generated: int
    n_executable: int
    n_correct: int
    generation_rate: Fraction
    executability_rate: Fraction
    accuracy_rate: Fraction
    per_sample: Tuple[Tuple[str, bool, bool, bool], ...] = ()

    def to_text(self) -> str:
        lines = [
            f"n_total = {self.n_total}",
            f"n_generated = {self.n_generated}",
            f"n_executable = {self.n_executable}",
            f"n_correct = {self.n_correct}",
            f"generation_rate = {float(self.generation_rate):.6f}",
            f"executability_rate = {float(self.executability_rate):.6f}",
            f"accuracy_rate = {float(self.accuracy_rate):.6f}",
        ]
        lines += [f"{sid}\t{int(g)}\t{int(e)}\t{int(c)}" for sid, g, e, c in self.per_sample]
        return "\n".join(lines) + "\n"


def _rate(a: int, b: int) -> Fraction:
    return Fraction(a, b) if b else Fraction(0)


def metrics_from_counts(n_total: int, n_generated: int, n_executable: int, n_correct: int) -> MetricsReport:
    if n_total <= 0:
        raise LPForgeError("EMPTY_CORPUS", "no entries to score")
    if not n_total >= n_generated >= n_executable >= n_correct >= 0:
        raise LPForgeError("INVALID_COUNTS", "counts must satisfy total >= generated >= executable >= correct >= 0")
    return MetricsReport(
        n_total, n_generated, n_executable, n_correct,
        _rate(n_generated, n_total), _rate(n_executable, n_generated), _rate(n_correct, n_generated),
    )


def corpus_metrics(entries: Iterable[CorpusEntry]) -> MetricsReport:
    entries = sorted(entries, key=lambda e: e.sample_id)
    if not entries:
        raise LPForgeError("EMPTY_CORPUS", "no entries to score")
    unjudged = [e.sample_id for e in entries if not e.judged]
    if unjudged:
        raise LPForgeError("UNJUDGED_ENTRY", f"entries not judged yet: {unjudged[:5]}")
    g = sum(bool(e.generated) for e in entries)
    x = sum(bool(e.executable) for e in entries)
    c = sum(bool(e.correct) for e in entries)
    base = metrics_from_counts(len(entries), g, x, c)
    rows = tuple((e.sample_id, bool(e.generated), bool(e.executable), bool(e.correct)) for e in entries)
    return replace(base, per_sample=rows)


def subsample_sizes(n: int, fractions: Sequence[float]) -> List[int]:
    return [max(1, round(f * n)) for f in fractions]


def subsample_curve(
    entries: Sequence[CorpusEntry],
    fractions: Sequence[float],
    seed: int = 0,
    cfg: SolveConfig = SolveConfig(),
) -> List[Tuple[float, MetricsReport]]:
    """Metrics on seeded uniform subsamples, one per fraction, in the given order.

    All fractions draw prefixes of one seeded permutation, so a smaller
    fraction's subset is contained in every larger one. Unjudged entries are
    judged only when they fall inside some subset.
    """
    bad = [f for f in fractions if not 0 < f <= 1]
    if bad:
        raise LPForgeError("INVALID_PARAM", f"fractions must lie in (0, 1]: {bad}")
    ordered = sorted(entries, key=lambda e: e.sample_id)
    if not ordered:
        raise LPForgeError("EMPTY_CORPUS", "no entries to subsample")
    perm = list(range(len(ordered)))
    random.Random(f"subsample:{seed}").shuffle(perm)
    sizes = subsample_sizes(len(ordered), fractions)
    judged: Dict[int, CorpusEntry] = {}
    out = []
    for f, k in zip(fractions, sizes):
        picked = perm[:k]
        for idx in picked:
            if idx not in judged:
                e = ordered[idx]
                judged[idx] = e if e.judged else judge_entry(e, cfg)
        out.append((f, corpus_metrics(judged[idx] for idx in picked)))
    return out


def curve_rows(curve: Sequence[Tuple[float, MetricsReport]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fraction", "n_total", "n_generated", "n_executable", "n_correct",
                "generation_rate", "executability_rate", "accuracy_rate"])
    for f, r in curve:
        w.writerow([f, r.n_total, r.n_generated, r.n_executable, r.n_correct,
                    f"{float(r.generation_rate):.6f}", f"{float(r.executability_rate):.6f}",
                    f"{float(r.accuracy_rate):.6f}"])
    return buf.getvalue()


def load_corpus(root: str) -> List[CorpusEntry]:
    """Read ``<root>/<sample_id>/{candidate,reference}.lp``; a missing candidate means not generated."""
    if not os.path.isdir(root):
        raise LPForgeError("NOT_FOUND", f"corpus directory {root} does not exist")
    entries = []
    for sid in sorted(os.listdir(root)):
        folder = os.path.join(root, sid)
        if not os.path.isdir(folder):
            continue
        ref_path = os.path.join(folder, REFERENCE_FILE)
        if not os.path.isfile(ref_path):
            raise LPForgeError("MISSING_REFERENCE", f"{sid}: no {REFERENCE_FILE}")
        with open(ref_path, encoding="utf-8") as fh:
            reference = parse_lp(fh.read())
        cand_path = os.path.join(folder, CANDIDATE_FILE)
        candidate = None
        if os.path.isfile(cand_path):
            with open(cand_path, encoding="utf-8") as fh:
                candidate = fh.read()
        entries.append(CorpusEntry(sid, candidate, reference))
    return entries
