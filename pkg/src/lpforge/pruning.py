"""Prunability labels, pruned models, and precision/recall scoring of predictions.

A variable is prunable when it is zero in every optimal solution. This is
certified by re-optimizing over the optimal face: the original rows plus
``objective == z*``, maximizing the variable (and minimizing it when it may
go negative). Both optima must be exactly zero.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from lpforge.errors import Diagnostic, LPForgeError, warning
from lpforge.lp.model import Model
from lpforge.lp.propagate import propagate_bounds
from lpforge.lp.writer import format_number
from lpforge.solver.core import (
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    SolveConfig,
    compile_model,
    solve_problem,
)
from lpforge.solver.simplex import INF, LinearProblem

PRUNABLE = "prunable"
NOT_PRUNABLE = "not_prunable"


@dataclass(frozen=True)
class PruneLabelSet:
    """Per-variable verdicts for one model.

    ``certification`` holds, for every certified variable, the largest
    ``|v|`` found on the optimal face (exact for prunable variables, a
    witness value otherwise). ``stale`` marks labels carried over to another
    instance whose ``z_star`` has not been recomputed.
    """

    model_id: str
    z_star: object
    labels: Mapping[str, str]
    certification: Mapping[str, object] = field(default_factory=dict)
    stale: bool = False
    diagnostics: Tuple[Diagnostic, ...] = ()

    @property
    def prunable(self) -> frozenset:
        return frozenset(v for v, lab in self.labels.items() if lab == PRUNABLE)

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(self.labels)

    def to_text(self) -> str:
        head = [f"# model_id = {self.model_id}", f"# z_star = {_fmt(self.z_star)}"]
        if self.stale:
            head.append("# stale = true")
        body = [f"{v}\t{lab}" for v, lab in self.labels.items()]
        return "".join(line + "\n" for line in head + body)

    @classmethod
    def from_text(cls, text: str) -> "PruneLabelSet":
        meta: Dict[str, str] = {}
        labels: Dict[str, str] = {}
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                meta[key.strip()] = value.strip()
                continue
            parts = line.split("\t")
            if len(parts) != 2 or parts[1] not in (PRUNABLE, NOT_PRUNABLE):
                raise LPForgeError("LABEL_SYNTAX", f"line {ln}: expected 'name<TAB>prunable|not_prunable'")
            labels[parts[0]] = parts[1]
        z = meta.get("z_star")
        return cls(
            meta.get("model_id", ""),
            Fraction(z) if z not in (None, "", "None") else None,
            labels,
            stale=meta.get("stale") == "true",
        )


def _fmt(value) -> str:
    if value is None:
        return "None"
    if isinstance(value, Fraction) and value.denominator != 1:
        return str(value)
    return format_number(float(value))


def _face_problem(problem: LinearProblem, z_min, exact: bool, tol: float) -> LinearProblem:
    rows = list(problem.rows)
    coefs = {j: c for j, c in enumerate(problem.cost) if c != 0}
    if coefs:
        if exact:
            rows.append((coefs, "=", z_min))
        else:
            # float arithmetic: every feasible point already has c.x >= z* - tol
            rows.append((coefs, "<=", Fraction(z_min) + Fraction(tol) * max(1, abs(Fraction(z_min)))))
    zero = Fraction(0)
    return LinearProblem(problem.names, [zero] * len(problem.names), rows, problem.lower, problem.upper, problem.integer)


def _nonzero(value, exact: bool, tol: float) -> bool:
    return value != 0 if exact else abs(value) > tol


def label_prunable(model: Model, cfg: SolveConfig = SolveConfig(), model_id: str = "") -> PruneLabelSet:
    """Exact prunability label for every variable of ``model``."""
    problem, sign = compile_model(model)
    status, x, z_min, _ = solve_problem(problem, cfg)
    if status != OPTIMAL:
        raise LPForgeError("BASE_NOT_OPTIMAL", f"model solves to {status}")
    exact = problem.size <= cfg.exact_size_limit
    tol = cfg.feasibility_tol
    face = _face_problem(problem, z_min, exact, tol)
    n = len(problem.names)
    witness: Dict[int, object] = {}

    def absorb(point) -> None:
        for j in range(n):
            if _nonzero(point[j], exact, tol):
                witness[j] = max(witness.get(j, 0), abs(point[j]))

    absorb(x)
    labels: Dict[str, str] = {}
    cert: Dict[str, object] = {}
    diags: List[Diagnostic] = []
    for j, name in enumerate(problem.names):
        if j in witness:
            labels[name] = NOT_PRUNABLE
            cert[name] = witness[j]
            continue
        lo, up = problem.lower[j], problem.upper[j]
        directions = [d for d, reach in ((-1, up > 0), (1, lo < 0)) if reach]
        best = Fraction(0)
        verdict = PRUNABLE
        for direction in directions:
            # direction -1 maximizes v, +1 minimizes it
            cost = [Fraction(0)] * n
            cost[j] = Fraction(direction)
            probe = LinearProblem(face.names, cost, face.rows, face.lower, face.upper, face.integer)
            st, px, pobj, _ = solve_problem(probe, cfg)
            if st == OPTIMAL:
                absorb(px)
                best = max(best, abs(pobj))
                if _nonzero(pobj, exact, tol):
                    verdict = NOT_PRUNABLE
            elif st == UNBOUNDED:
                verdict, best = NOT_PRUNABLE, INF
            else:
                verdict = NOT_PRUNABLE
                code = "CERTIFICATION_LIMIT" if st == ITERATION_LIMIT else "CERTIFICATION_FAILED"
                diags.append(warning(code, f"{name}: certification solve ended {st}; labeled not_prunable"))
            if verdict == NOT_PRUNABLE:
                break
        labels[name] = verdict
        cert[name] = best
    return PruneLabelSet(model_id, sign * z_min, labels, cert, False, tuple(diags))


def apply_pruning(model: Model, prunable: Iterable[str]) -> Model:
    """Substitute 0 for every listed variable.

    Rows left without terms are dropped when ``0 <sense> rhs`` holds and
    raise ``PRUNE_CONTRADICTION`` otherwise; rows that keep terms are kept.
    """
    drop = list(dict.fromkeys(prunable))
    if not drop:
        return model
    known = set(model.variables)
    unknown = [v for v in drop if v not in known]
    if unknown:
        raise LPForgeError("UNKNOWN_VARIABLE", f"not in the model: {', '.join(unknown[:5])}")
    gone = set(drop)
    for v in drop:
        b = model.bound_of(v)
        if b.lower > 0 or b.upper < 0:
            raise LPForgeError("PRUNE_CONTRADICTION", f"bounds of {v} exclude 0")
    rows = []
    for c in model.constraints:
        expr = c.expression.without(gone)
        if len(expr):
            rows.append(replace(c, expression=expr))
            continue
        holds = {"<=": 0 <= c.rhs, ">=": 0 >= c.rhs, "=": c.rhs == 0}[c.sense]
        if not holds:
            raise LPForgeError("PRUNE_CONTRADICTION", f"row {c.name} requires a pruned variable to be nonzero")
    md = dict(model.metadata)
    md["pruned"] = ",".join([p for p in md.get("pruned", "").split(",") if p] + drop)
    return Model(
        model.sense,
        model.objective_name,
        model.objective.without(gone),
        tuple(rows),
        {v: b for v, b in model.bounds.items() if v not in gone},
        {v: k for v, k in model.integrality.items() if v not in gone},
        md,
    )


def baseline_predict(model: Model) -> frozenset:
    """Variables that bound propagation fixes to zero (zero in every feasible point)."""
    prop = propagate_bounds(model)
    if prop.infeasible:
        return frozenset()
    return frozenset(prop.fixed_zero())


# -- scoring ------------------------------------------------------------------------


@dataclass(frozen=True)
class SizeBins:
    """Line-count bins ``[k*width, (k+1)*width)`` up to ``upper``, then one overflow bin."""

    width: int = 100
    upper: int = 2000

    def bin_of(self, line_count: int) -> Tuple[int, float]:
        if line_count >= self.upper:
            return (self.upper, math.inf)
        lo = (line_count // self.width) * self.width
        return (lo, lo + self.width)


@dataclass(frozen=True)
class PruneScore:
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: Fraction
    recall: Fraction
    f1: Fraction
    size_bin: Tuple[int, float]


def _ratio(a: int, b: int) -> Fraction:
    return Fraction(a, b) if b else Fraction(0)


def prf(tp: int, fp: int, fn: int) -> Tuple[Fraction, Fraction, Fraction]:
    p = _ratio(tp, tp + fp)
    r = _ratio(tp, tp + fn)
    f1 = 2 * p * r / (p + r) if p + r else Fraction(0)
    return p, r, f1


def score_predictions(
    predicted: Iterable[str], truth: PruneLabelSet, source_line_count: int, bins: SizeBins = SizeBins()
) -> PruneScore:
    pred = set(predicted)
    unknown = pred - set(truth.labels)
    if unknown:
        raise LPForgeError("UNKNOWN_VARIABLE", f"predicted names outside the label set: {sorted(unknown)[:5]}")
    actual = truth.prunable
    tp = len(pred & actual)
    fp = len(pred - actual)
    fn = len(actual - pred)
    p, r, f1 = prf(tp, fp, fn)
    return PruneScore(tp, fp, fn, p, r, f1, bins.bin_of(source_line_count))


@dataclass(frozen=True)
class CurvePoint:
    size_bin: Tuple[int, float]
    count: int
    precision: Fraction
    recall: Fraction
    f1: Fraction


def curve_report(scores: Sequence[PruneScore]) -> List[CurvePoint]:
    """Mean precision/recall/F1 per size bin, bins in ascending order; empty bins omitted."""
    groups: Dict[Tuple[int, float], List[PruneScore]] = {}
    for s in scores:
        groups.setdefault(s.size_bin, []).append(s)
    out = []
    for b in sorted(groups):
        g = groups[b]
        k = len(g)
        out.append(
            CurvePoint(
                b, k,
                sum((s.precision for s in g), Fraction(0)) / k,
                sum((s.recall for s in g), Fraction(0)) / k,
                sum((s.f1 for s in g), Fraction(0)) / k,
            )
        )
    return out


def curve_csv(points: Sequence[CurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["bin_lo", "bin_hi", "count", "precision", "recall", "f1"])
    for p in points:
        hi = "inf" if p.size_bin[1] == math.inf else p.size_bin[1]
        w.writerow([p.size_bin[0], hi, p.count, f"{float(p.precision):.6f}", f"{float(p.recall):.6f}", f"{float(p.f1):.6f}"])
    return buf.getvalue()


def read_predictions(text: str) -> List[str]:
    """One variable name per line; blank lines and ``#`` comments ignored."""
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out
