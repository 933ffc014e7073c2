"""Parser for the LP text dialect.

Dialect summary::

    \\ comment to end of line
    \\ @meta key = value          (model metadata)
    Minimize | Maximize
     obj: 3 x + 2 y               (name optional, "0" for an empty objective)
    Subject To
     c1: x + y >= 1               (may continue over several lines)
    \\ --- Family ---              (family header for the rows that follow)
    Bounds
     x <= 4 | 1 <= y <= 5 | z = 0 | w free | -inf <= v <= 3
    General
     k1 k2
    Binary
     b1
    End

Section keywords are case-sensitive; near-miss spellings ("s.t.", "bin",
"subject to") are reported as UNKNOWN_SECTION and left to the repair stage.
"""

from __future__ import annotations

import re
from typing import Dict, List, Optional, Tuple

from lpforge.errors import Diagnostic, LPForgeError, count_errors, error, warning
from lpforge.lp.model import (
    BINARY,
    DEFAULT_BOUND,
    EQ,
    GE,
    INF,
    INTEGER,
    LE,
    MAXIMIZE,
    MINIMIZE,
    RESERVED,
    Bound,
    LinearExpression,
    Model,
    NamedConstraint,
    Term,
)

CANONICAL_HEADERS = {
    "Minimize": "objective",
    "Maximize": "objective",
    "Subject To": "constraints",
    "Bounds": "bounds",
    "General": "general",
    "Binary": "binary",
    "End": "end",
}

# lower-cased near-miss spellings and the canonical header they stand for
HEADER_SYNONYMS = {
    "minimize": "Minimize", "minimise": "Minimize", "minimum": "Minimize", "min": "Minimize",
    "maximize": "Maximize", "maximise": "Maximize", "maximum": "Maximize", "max": "Maximize",
    "subject to": "Subject To", "subject to:": "Subject To", "such that": "Subject To",
    "st": "Subject To", "s.t.": "Subject To", "s.t": "Subject To", "st.": "Subject To",
    "bounds": "Bounds", "bound": "Bounds",
    "general": "General", "generals": "General", "gen": "General",
    "int": "General", "integer": "General", "integers": "General",
    "binary": "Binary", "binaries": "Binary", "bin": "Binary",
    "end": "End",
}

META_RE = re.compile(r"\\\s*@meta\s+(\S+?)\s*=\s*(.*)$")
GROUP_RE = re.compile(r"\\\s*---\s*(.*?)\s*---\s*$")
BASE_GROUP = "(base)"

TOKEN_RE = re.compile(
    r"""\s*(?:
      (?P<sense><=|>=|=<|=>|==|<|>|=)
     |(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
     |(?P<ident>[A-Za-z_][A-Za-z0-9_]*)
     |(?P<op>[+-])
     |(?P<colon>:)
     |(?P<other>\S)
    )""",
    re.X,
)

GOOD_SENSES = {"<=": LE, ">=": GE, "=": EQ}


def header_of(line: str) -> Optional[str]:
    """Canonical header a stripped content line stands for, if any."""
    if line in CANONICAL_HEADERS:
        return line
    return HEADER_SYNONYMS.get(" ".join(line.lower().split()))


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(content: str, line: int, offset: int = 0) -> List[Token]:
    out = []
    pos = 0
    while pos < len(content):
        m = TOKEN_RE.match(content, pos)
        if m is None or m.end() == pos:
            break
        kind = m.lastgroup
        if kind is None:  # trailing whitespace
            break
        out.append(Token(kind, m.group(kind), line, offset + m.start(kind) + 1))
        pos = m.end()
    return out


class _Malformed(Exception):
    def __init__(self, message: str, tok: Optional[Token]):
        self.message = message
        self.tok = tok


def _parse_terms(tokens: List[Token], allow_constant_zero: bool = False) -> LinearExpression:
    """Parse ``[sign] [number] ident (sign [number] ident)*``."""
    if allow_constant_zero and len(tokens) == 1 and tokens[0].kind == "num" and float(tokens[0].text) == 0:
        return LinearExpression()
    terms: List[Term] = []
    i = 0
    n = len(tokens)
    while i < n:
        sign = 1.0
        tok = tokens[i]
        if tok.kind == "op":
            sign = -1.0 if tok.text == "-" else 1.0
            i += 1
            if i >= n:
                raise _Malformed("expression ends with an operator", tok)
        elif terms:
            raise _Malformed(f"missing operator before {tok.text!r}", tok)
        tok = tokens[i]
        coef = 1.0
        if tok.kind == "num":
            coef = float(tok.text)
            i += 1
            if i >= n:
                raise _Malformed("constant term without a variable", tok)
            tok = tokens[i]
        if tok.kind != "ident":
            raise _Malformed(f"unexpected {tok.text!r}", tok)
        if tok.text.lower() in RESERVED:
            raise _Malformed(f"reserved word {tok.text!r} used as a variable", tok)
        terms.append(Term(sign * coef, tok.text))
        i += 1
    return LinearExpression(tuple(terms))


def _split_label(tokens: List[Token]) -> Tuple[Optional[str], List[Token]]:
    if len(tokens) >= 2 and tokens[0].kind == "ident" and tokens[1].kind == "colon":
        return tokens[0].text, tokens[2:]
    return None, tokens


def _first_bad(tokens: List[Token]) -> Optional[Token]:
    for t in tokens:
        if t.kind == "other" or t.kind == "colon":
            return t
        if t.kind == "sense" and t.text not in GOOD_SENSES:
            return t
    return None


def _parse_value(tokens: List[Token]) -> float:
    sign = 1.0
    i = 0
    if tokens and tokens[0].kind == "op":
        sign = -1.0 if tokens[0].text == "-" else 1.0
        i = 1
    rest = tokens[i:]
    if len(rest) != 1:
        raise _Malformed("expected a number", tokens[0] if tokens else None)
    t = rest[0]
    if t.kind == "num":
        return sign * float(t.text)
    if t.kind == "ident" and t.text.lower() in ("inf", "infinity"):
        return sign * INF
    raise _Malformed(f"expected a number, got {t.text!r}", t)


class _State:
    def __init__(self) -> None:
        self.diags: List[Diagnostic] = []
        self.metadata: Dict[str, str] = {}
        self.sense: Optional[str] = None
        self.objective_name = "obj"
        self.objective = LinearExpression()
        self.obj_tokens: List[Token] = []
        self.obj_line = 0
        self.constraints: List[NamedConstraint] = []
        self.names: Dict[str, int] = {}
        self.pending: List[Token] = []
        self.group = ""
        self.bounds: Dict[str, Bound] = {}
        self.integrality: Dict[str, str] = {}
        self.kind_line: Dict[str, int] = {}
        self.seen_end = False

    def malformed(self, exc: _Malformed, fallback_line: int) -> None:
        tok = exc.tok
        line = tok.line if tok else fallback_line
        col = tok.col if tok else 1
        self.diags.append(error("MALFORMED_EXPRESSION", exc.message, line, col))

    # -- objective --------------------------------------------------------

    def finish_objective(self) -> None:
        toks = self.obj_tokens
        self.obj_tokens = []
        if not toks:
            return
        label, body = _split_label(toks)
        if label is not None:
            if label.lower() in RESERVED:
                self.diags.append(error("MALFORMED_EXPRESSION", f"reserved objective name {label!r}", toks[0].line, toks[0].col))
                return
            self.objective_name = label
        bad = _first_bad(body)
        if bad is not None:
            self.diags.append(error("MALFORMED_EXPRESSION", f"unexpected {bad.text!r} in objective", bad.line, bad.col))
            return
        if any(t.kind == "sense" for t in body):
            t = next(t for t in body if t.kind == "sense")
            self.diags.append(error("MALFORMED_EXPRESSION", "relational operator in objective", t.line, t.col))
            return
        try:
            self.objective = _parse_terms(body, allow_constant_zero=True)
        except _Malformed as exc:
            self.malformed(exc, self.obj_line)

    # -- constraints -----------------------------------------------------

    def feed_constraint_line(self, toks: List[Token], line: int) -> None:
        label, _ = _split_label(toks)
        if label is not None and self.pending:
            self.flush_incomplete(line)
        self.pending.extend(toks)
        senses = [k for k, t in enumerate(self.pending) if t.kind == "sense"]
        if not senses:
            return
        after = self.pending[senses[0] + 1:]
        if not after or (len(after) == 1 and after[0].kind == "op"):
            return  # rhs may follow on the next line
        self.finish_constraint()

    def flush_incomplete(self, line: int) -> None:
        if self.pending:
            t = self.pending[0]
            self.diags.append(error("MALFORMED_EXPRESSION", "constraint without relational operator and right-hand side", t.line, t.col))
            self.pending = []

    def finish_constraint(self) -> None:
        toks = self.pending
        self.pending = []
        label, body = _split_label(toks)
        first = toks[0]
        bad = _first_bad(body)
        if bad is not None:
            what = "sense token" if bad.kind == "sense" else "character"
            self.diags.append(error("MALFORMED_EXPRESSION", f"unexpected {what} {bad.text!r}", bad.line, bad.col))
            return
        k = next(i for i, t in enumerate(body) if t.kind == "sense")
        lhs, sense_tok, rhs_toks = body[:k], body[k], body[k + 1:]
        try:
            expr = _parse_terms(lhs)
            if len(expr) == 0:
                raise _Malformed("constraint has no variable terms", sense_tok)
            rhs = _parse_value(rhs_toks)
            if rhs in (INF, -INF):
                raise _Malformed("infinite right-hand side", rhs_toks[-1])
        except _Malformed as exc:
            self.malformed(exc, first.line)
            return
        name = label if label is not None else f"R{len(self.constraints) + 1}"
        if name.lower() in RESERVED:
            self.diags.append(error("MALFORMED_EXPRESSION", f"reserved constraint name {name!r}", first.line, first.col))
            return
        if name in self.names:
            self.diags.append(
                error("DUPLICATE_NAME", f"constraint {name} already defined on line {self.names[name]}", first.line, first.col)
            )
            return
        self.names[name] = first.line
        self.constraints.append(NamedConstraint(name, expr, GOOD_SENSES[sense_tok.text], rhs, self.group))

    # -- bounds / declarations ------------------------------------------

    def bound_line(self, toks: List[Token], line: int) -> None:
        try:
            bad = _first_bad(toks)
            if bad is not None:
                raise _Malformed(f"unexpected {bad.text!r} in bound", bad)
            idents = [k for k, t in enumerate(toks) if t.kind == "ident" and t.text.lower() not in ("inf", "infinity", "free")]
            if len(idents) != 1:
                raise _Malformed("bound must name exactly one variable", toks[0] if toks else None)
            k = idents[0]
            var = toks[k].text
            if var.lower() in RESERVED:
                raise _Malformed(f"reserved word {var!r} used as a variable", toks[k])
            cur = self.bounds.get(var, DEFAULT_BOUND)
            lo, up = cur.lower, cur.upper
            left, right = toks[:k], toks[k + 1:]
            if not left and len(right) == 1 and right[0].kind == "ident" and right[0].text.lower() == "free":
                lo, up = -INF, INF
            else:
                # constraints relative to var: list of (op, value) meaning var op value
                rel: List[Tuple[str, float]] = []
                if left:
                    if left[-1].kind != "sense":
                        raise _Malformed("expected relational operator", left[-1])
                    flip = {LE: GE, GE: LE, EQ: EQ}
                    rel.append((flip[GOOD_SENSES[left[-1].text]], _parse_value(left[:-1])))
                if right:
                    if right[0].kind != "sense":
                        raise _Malformed("expected relational operator", right[0])
                    rel.append((GOOD_SENSES[right[0].text], _parse_value(right[1:])))
                if not rel:
                    raise _Malformed("bound without relation", toks[k])
                for op, val in rel:
                    if op == LE:
                        up = val
                    elif op == GE:
                        lo = val
                    else:
                        lo = up = val
            self.bounds[var] = Bound(lo, up)
        except _Malformed as exc:
            self.malformed(exc, line)

    def declaration_line(self, toks: List[Token], kind: str, line: int) -> None:
        for t in toks:
            if t.kind != "ident" or t.text.lower() in RESERVED:
                self.diags.append(error("MALFORMED_EXPRESSION", f"expected a variable name, got {t.text!r}", t.line, t.col))
                continue
            if t.text in self.integrality:
                self.diags.append(
                    error("DUPLICATE_NAME", f"variable {t.text} already declared on line {self.kind_line[t.text]}", t.line, t.col)
                )
                continue
            self.integrality[t.text] = kind
            self.kind_line[t.text] = t.line


def parse_lp_diagnostics(text: str) -> Tuple[Optional[Model], List[Diagnostic]]:
    """Parse LP text, returning ``(model or None, diagnostics)``.

    The model is ``None`` whenever at least one error diagnostic was found.
    """
    st = _State()
    section: Optional[str] = None
    lines = text.split("\n")
    last_line = len(lines)
    for ln, raw in enumerate(lines, start=1):
        raw = raw.rstrip("\r")
        cut = raw.find("\\")
        if cut >= 0:
            comment = raw[cut:]
            m = META_RE.match(comment)
            if m and not raw[:cut].strip():
                st.metadata[m.group(1)] = m.group(2).strip()
            g = GROUP_RE.match(comment)
            if g and not raw[:cut].strip() and section == "constraints":
                if st.pending:
                    st.flush_incomplete(ln)
                name = g.group(1)
                st.group = "" if name == BASE_GROUP else name
            content = raw[:cut]
        else:
            content = raw
        stripped = content.strip()
        if not stripped:
            continue
        hdr = header_of(stripped)
        if hdr is not None:
            if stripped != hdr:
                st.diags.append(error("UNKNOWN_SECTION", f"non-canonical section header {stripped!r} (expected {hdr!r})", ln, 1))
            if section == "objective":
                st.finish_objective()
            if section == "constraints" and st.pending:
                st.flush_incomplete(ln)
            section = CANONICAL_HEADERS[hdr]
            st.group = ""
            if section == "objective":
                if st.sense is not None:
                    st.diags.append(error("DUPLICATE_NAME", "second objective section", ln, 1))
                st.sense = MAXIMIZE if hdr == "Maximize" else MINIMIZE
                st.obj_line = ln
            if section == "end":
                st.seen_end = True
                last_line = ln
                break
            continue
        offset = len(content) - len(content.lstrip())
        toks = tokenize(content, ln)
        if section is None:
            st.diags.append(error("UNKNOWN_SECTION", f"content {stripped[:30]!r} before the first section header", ln, offset + 1))
            continue
        if section == "objective":
            st.obj_tokens.extend(toks)
        elif section == "constraints":
            st.feed_constraint_line(toks, ln)
        elif section == "bounds":
            st.bound_line(toks, ln)
        elif section == "general":
            st.declaration_line(toks, INTEGER, ln)
        elif section == "binary":
            st.declaration_line(toks, BINARY, ln)
    else:
        if section == "objective":
            st.finish_objective()
        if section == "constraints" and st.pending:
            st.flush_incomplete(last_line)
    if not st.seen_end:
        st.diags.append(error("MISSING_END", "file has no End line", last_line, 1))
    else:
        trailing = [k for k, l in enumerate(lines[last_line:], start=last_line + 1) if l.split("\\", 1)[0].strip()]
        if trailing:
            st.diags.append(warning("CONTENT_AFTER_END", "text after End is ignored", trailing[0], 1))
    if st.sense is None:
        st.diags.append(error("MISSING_OBJECTIVE", "no Minimize or Maximize section", 1, 1))
    if count_errors(st.diags):
        return None, st.diags
    try:
        model = Model(
            sense=st.sense or MINIMIZE,
            objective_name=st.objective_name,
            objective=st.objective,
            constraints=tuple(st.constraints),
            bounds=st.bounds,
            integrality=st.integrality,
            metadata=st.metadata,
        )
    except LPForgeError as exc:
        st.diags.append(error(exc.code, exc.message, 1, 1))
        return None, st.diags
    return model, st.diags


def parse_lp(text: str) -> Model:
    """Parse LP text into a :class:`Model`; raises ``LPForgeError("PARSE_ERROR")`` with diagnostics."""
    model, diags = parse_lp_diagnostics(text)
    if model is None:
        first = next(d for d in diags if d.is_error)
        raise LPForgeError("PARSE_ERROR", str(first), diags)
    return model
