"""Rule-based repair of near-valid LP text.

Four stages run in order, each a pure text-to-text pass that records what it
changed:

1. identifier normalization   IDENT_NORMALIZE, COLLISION_AFTER_NORMALIZE
2. constraint syntax          MULT_PAREN, PAREN_BALANCE, SENSE_TOKEN, INCOMPLETE_EXPR
3. solver dialect             HEADER_SYNONYM, MISSING_END
4. structural completeness    MISSING_OBJECTIVE, MISSING_DECLARATION, MISSING_BOUNDS

Rule tables:

    SENSE_TOKEN     "=<" and "<" -> "<=";  "=>" and ">" -> ">=";  "==" -> "="
    MULT_PAREN      "<number>(<name>)" -> "<number> <name>"
    PAREN_BALANCE   parentheses without a partner on the same line are deleted
    INCOMPLETE_EXPR "+"/"-" directly before a relational operator, or ending a
                    statement, is deleted
    IDENT_NORMALIZE every run of characters outside [A-Za-z0-9_] inside a name
                    becomes "_", trailing "_" dropped ("x[1,2]" -> "x_1_2")
    HEADER_SYNONYM  see lpforge.lp.parser.HEADER_SYNONYMS
    MISSING_BOUNDS  General variables without a Bounds line get "v >= 0"
    MISSING_DECLARATION  a variable used in the model but undeclared is added
                    to General/Binary when a declared variable there has the
                    same stem and index count (k_1_1 next to k_1_2)

No rule changes a numeric coefficient, and no rule deletes a constraint.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from lpforge.errors import Diagnostic, count_errors, error, warning
from lpforge.lp.model import RESERVED, variable_stem
from lpforge.lp.parser import CANONICAL_HEADERS, header_of, parse_lp_diagnostics
from lpforge.lp.validate import validate

RULES = (
    "IDENT_NORMALIZE",
    "COLLISION_AFTER_NORMALIZE",
    "MULT_PAREN",
    "PAREN_BALANCE",
    "SENSE_TOKEN",
    "INCOMPLETE_EXPR",
    "HEADER_SYNONYM",
    "MISSING_END",
    "MISSING_OBJECTIVE",
    "MISSING_DECLARATION",
    "MISSING_BOUNDS",
)


@dataclass(frozen=True)
class Fix:
    rule: str
    line: int
    before: str
    after: str
    severity: str = "info"  # "warning" for fixes that change the model's meaning

    def __str__(self) -> str:
        return f"{self.line}: {self.rule}: {self.before!r} -> {self.after!r}"


@dataclass(frozen=True)
class RepairReport:
    fixes: Tuple[Fix, ...]
    residual_diagnostics: Tuple[Diagnostic, ...]

    @property
    def rules(self) -> FrozenSet[str]:
        return frozenset(f.rule for f in self.fixes)

    @property
    def ok(self) -> bool:
        return count_errors(self.residual_diagnostics) == 0

    def to_text(self) -> str:
        out = [f"fix\t{f.line}\t{f.rule}\t{f.severity}\t{f.before!r}\t{f.after!r}" for f in self.fixes]
        out += [f"diagnostic\t{d}" for d in self.residual_diagnostics]
        return "".join(line + "\n" for line in out)


STAGE_NAMES = ("normalize", "syntax", "dialect", "completeness")


@dataclass(frozen=True)
class RepairConfig:
    stages: Tuple[str, ...] = STAGE_NAMES


# -- line helpers ---------------------------------------------------------


def _split(raw: str) -> Tuple[str, str]:
    cut = raw.find("\\")
    return (raw, "") if cut < 0 else (raw[:cut], raw[cut:])


@dataclass
class _Line:
    index: int  # 0-based
    content: str
    comment: str
    section: Optional[str]  # section the line belongs to; for headers, the section they open
    header: Optional[str]  # canonical header when the line is a section header


def _scan(lines: Sequence[str]) -> List[_Line]:
    out = []
    section = None
    for k, raw in enumerate(lines):
        content, comment = _split(raw)
        hdr = header_of(content.strip()) if content.strip() else None
        if hdr is not None:
            section = CANONICAL_HEADERS[hdr]
        out.append(_Line(k, content, comment, section, hdr))
    return out


def _join(lines: List[str]) -> str:
    return "\n".join(lines)


# -- 1. identifier normalization -------------------------------------------

RAW_NAME_RE = re.compile(
    r"(?<![A-Za-z0-9_.])[A-Za-z_][A-Za-z0-9_]*(?:\[[A-Za-z0-9_, ]*\]|[.#$@!~'{}|][A-Za-z0-9_]*)+"
)
NAME_RE = re.compile(r"(?<![A-Za-z0-9_.])[A-Za-z_][A-Za-z0-9_]*(?![A-Za-z0-9_.\[#$@!~'{}|])")


def _normalized(raw: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]+", "_", raw).rstrip("_")


def normalize_identifiers(text: str) -> Tuple[str, List[Fix]]:
    lines = text.split("\n")
    scanned = [ln for ln in _scan(lines) if ln.header is None]
    legal = set()
    raws: Dict[str, int] = {}
    for ln in scanned:
        legal.update(NAME_RE.findall(ln.content))
        for m in RAW_NAME_RE.finditer(ln.content):
            raws.setdefault(m.group(0), ln.index + 1)
    if not raws:
        return text, []
    taken = set(legal)
    mapping: Dict[str, str] = {}
    fixes = []
    for raw, line in raws.items():
        base = _normalized(raw)
        name, k = base, 1
        while name in taken or name.lower() in RESERVED:
            name = base + ("_aug" if k == 1 else f"_aug{k}")
            k += 1
        taken.add(name)
        mapping[raw] = name
        fixes.append(Fix("COLLISION_AFTER_NORMALIZE" if name != base else "IDENT_NORMALIZE", line, raw, name))
    for ln in scanned:
        new = RAW_NAME_RE.sub(lambda m: mapping[m.group(0)], ln.content)
        lines[ln.index] = new + ln.comment
    return _join(lines), fixes


# -- 2. constraint syntax ------------------------------------------------------

SENSE_FIXES = {"=<": "<=", "<": "<=", "=>": ">=", ">": ">=", "==": "="}
BAD_SENSE_RE = re.compile(r"=<|=>|==|<(?!=)|>(?!=)")
MULT_PAREN_RE = re.compile(r"((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*\)")
OP_BEFORE_SENSE_RE = re.compile(r"[+-]\s*(?=<=|>=|=)")
TRAILING_OP_RE = re.compile(r"\s*[+-]\s*$")
SENSE_RE = re.compile(r"<=|>=|=")
LABEL_RE = re.compile(r"\s*[A-Za-z_][A-Za-z0-9_]*\s*:")


def _unmatched_parens(s: str) -> List[int]:
    stack: List[int] = []
    bad: List[int] = []
    for k, ch in enumerate(s):
        if ch == "(":
            stack.append(k)
        elif ch == ")":
            if stack:
                stack.pop()
            else:
                bad.append(k)
    return sorted(bad + stack)


def _statement_ends(scanned: List[_Line], pos: int) -> bool:
    """Whether the statement on scanned[pos] cannot continue on a later line."""
    ln = scanned[pos]
    if ln.section == "constraints":
        s = SENSE_RE.search(ln.content)
        if s and ln.content[s.end():].strip().rstrip("+-").strip():
            return True
    for nxt in scanned[pos + 1:]:
        if not nxt.content.strip():
            continue
        if nxt.header is not None:
            return True
        if ln.section == "constraints" and LABEL_RE.match(nxt.content):
            return True
        return False
    return True


def fix_constraint_syntax(text: str) -> Tuple[str, List[Fix]]:
    lines = text.split("\n")
    scanned = _scan(lines)
    fixes: List[Fix] = []
    for pos, ln in enumerate(scanned):
        if ln.header is not None or ln.section not in ("objective", "constraints", "bounds"):
            continue
        s = ln.content
        row = ln.index + 1
        new = MULT_PAREN_RE.sub(r"\1 \2", s)
        if new != s:
            fixes.append(Fix("MULT_PAREN", row, s.strip(), new.strip()))
            s = new
        bad = _unmatched_parens(s)
        if bad:
            new = "".join(ch for k, ch in enumerate(s) if k not in set(bad))
            fixes.append(Fix("PAREN_BALANCE", row, s.strip(), new.strip()))
            s = new
        if ln.section in ("constraints", "bounds"):
            new = BAD_SENSE_RE.sub(lambda m: SENSE_FIXES[m.group(0)], s)
            if new != s:
                fixes.append(Fix("SENSE_TOKEN", row, s.strip(), new.strip()))
                s = new
        if ln.section in ("objective", "constraints"):
            new = OP_BEFORE_SENSE_RE.sub("", s) if ln.section == "constraints" else s
            if TRAILING_OP_RE.search(new) and _statement_ends(scanned, pos):
                new = TRAILING_OP_RE.sub("", new)
            if new != s:
                fixes.append(Fix("INCOMPLETE_EXPR", row, s.strip(), new.strip()))
                s = new
        if s != ln.content:
            lines[ln.index] = s + ln.comment
            ln.content = s
    return _join(lines), fixes


# -- 3. solver dialect -----------------------------------------------------------


def to_solver_dialect(text: str) -> Tuple[str, List[Fix]]:
    lines = text.split("\n")
    fixes: List[Fix] = []
    has_end = False
    for ln in _scan(lines):
        if ln.header is None:
            continue
        stripped = ln.content.strip()
        if stripped != ln.header:
            lead = ln.content[: len(ln.content) - len(ln.content.lstrip())]
            lines[ln.index] = lead + ln.header + (" " + ln.comment if ln.comment else "")
            fixes.append(Fix("HEADER_SYNONYM", ln.index + 1, stripped, ln.header))
        if ln.header == "End":
            has_end = True
            break
    if not has_end:
        if lines and lines[-1] == "":
            lines[-1:] = ["End", ""]
        else:
            lines.append("End")
        fixes.append(Fix("MISSING_END", len(lines) - (1 if lines[-1] == "" else 0), "", "End"))
    return _join(lines), fixes


# -- 4. structural completeness ----------------------------------------------------


def _used_names(scanned: List[_Line]) -> Dict[str, int]:
    used: Dict[str, int] = {}
    for ln in scanned:
        if ln.header is not None or ln.section not in ("objective", "constraints", "bounds"):
            continue
        body = LABEL_RE.sub("", ln.content, count=1) if ln.section != "bounds" else ln.content
        for name in NAME_RE.findall(body):
            if name.lower() not in RESERVED:
                used.setdefault(name, ln.index + 1)
    return used


def _section_ranges(scanned: List[_Line]) -> Dict[str, Tuple[int, int]]:
    """Line index of each section header and of the last non-blank line in it."""
    ranges: Dict[str, Tuple[int, int]] = {}
    current = None
    for ln in scanned:
        if ln.header is not None:
            current = ln.section
            if current in ranges:  # duplicate header: keep the first section
                current = None
                continue
            ranges[current] = (ln.index, ln.index)
            if current == "end":
                break
            continue
        if current is not None and ln.content.strip():
            ranges[current] = (ranges[current][0], ln.index)
    return ranges


def _shape(name: str) -> Tuple[str, int]:
    return variable_stem(name), name.count("_")


def complete_structure(text: str) -> Tuple[str, List[Fix]]:
    lines = text.split("\n")
    fixes: List[Fix] = []
    scanned = _scan(lines)
    ranges = _section_ranges(scanned)

    if "objective" not in ranges:
        at = min((r[0] for r in ranges.values()), default=len(lines))
        lines[at:at] = ["Minimize", " obj: 0"]
        fixes.append(Fix("MISSING_OBJECTIVE", at + 1, "", "Minimize obj: 0", "warning"))
        scanned = _scan(lines)
        ranges = _section_ranges(scanned)

    declared: Dict[str, List[str]] = {"general": [], "binary": []}
    for ln in scanned:
        if ln.header is None and ln.section in declared:
            declared[ln.section].extend(ln.content.split())
    known = set(declared["general"]) | set(declared["binary"])
    shapes = {sec: {_shape(v) for v in names} for sec, names in declared.items()}
    additions: Dict[str, List[str]] = {"general": [], "binary": []}
    for name in _used_names(scanned):
        if name in known:
            continue
        hits = [sec for sec in ("general", "binary") if _shape(name) in shapes[sec]]
        if len(hits) == 1:
            additions[hits[0]].append(name)
    inserts: List[Tuple[int, List[str], str]] = []
    for sec in ("general", "binary"):
        if additions[sec]:
            _, last = ranges[sec]
            inserts.append((last + 1, [f" {v}" for v in additions[sec]], sec))
    bounded = set()
    for ln in scanned:
        if ln.header is None and ln.section == "bounds":
            bounded.update(n for n in NAME_RE.findall(ln.content) if n.lower() not in RESERVED)
    missing_bounds = [v for v in declared["general"] + additions["general"] if v not in bounded]
    if missing_bounds:
        new_lines = [f" {v} >= 0" for v in missing_bounds]
        if "bounds" in ranges:
            inserts.append((ranges["bounds"][1] + 1, new_lines, "bounds"))
        else:
            at = min(r[0] for sec, r in ranges.items() if sec in ("general", "binary", "end"))
            inserts.append((at, ["Bounds"] + new_lines, "bounds"))
    # apply bottom-up so earlier indices stay valid
    for at, new_lines, sec in sorted(inserts, key=lambda t: t[0], reverse=True):
        lines[at:at] = new_lines
    shift = 0
    for at, new_lines, sec in sorted(inserts, key=lambda t: t[0]):
        rule = "MISSING_BOUNDS" if sec == "bounds" else "MISSING_DECLARATION"
        for k, nl in enumerate(new_lines):
            if nl == "Bounds":
                continue
            fixes.append(Fix(rule, at + shift + k + 1, "", nl.strip()))
        shift += len(new_lines)
    return _join(lines), fixes


# -- pipeline ---------------------------------------------------------------------

STAGES = (normalize_identifiers, fix_constraint_syntax, to_solver_dialect, complete_structure)


def _diagnostics(text: str) -> List[Diagnostic]:
    model, diags = parse_lp_diagnostics(text)
    if model is not None:
        diags = list(diags) + list(validate(model))
    return list(diags)


def repair(text: str, config: RepairConfig = RepairConfig()) -> Tuple[str, RepairReport]:
    """Run the four stages; the result never has more error diagnostics than the input.

    Remaining errors are reported as an ``UNREPAIRABLE`` diagnostic in the
    report (the function does not raise).
    """
    before = count_errors(_diagnostics(text))
    current = text
    fixes: List[Fix] = []
    for name, stage in zip(STAGE_NAMES, STAGES):
        if name not in config.stages:
            continue
        new, stage_fixes = stage(current)
        if stage_fixes:
            current = new
            fixes.extend(stage_fixes)
    residual = _diagnostics(current)
    if count_errors(residual) > before:
        current, fixes, residual = text, [], _diagnostics(text)
    if count_errors(residual):
        residual.append(error("UNREPAIRABLE", f"{count_errors(residual)} errors remain after repair"))
    for f in fixes:
        if f.severity == "warning":
            residual.append(warning(f.rule, f"line {f.line}: inserted {f.after!r}"))
    return current, RepairReport(tuple(fixes), tuple(residual))

