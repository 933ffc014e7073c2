import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpforge.datagen import GenConfig, generate_base_model, generate_pair
from lpforge.errors import LPForgeError
from lpforge.lp import (
    BINARY,
    EQ,
    GE,
    INTEGER,
    LE,
    MAXIMIZE,
    MINIMIZE,
    Bound,
    LinearExpression,
    Model,
    NamedConstraint,
    diff_models,
    parse_lp,
    parse_lp_diagnostics,
    propagate_bounds,
    serialize_lp,
    validate,
)
from lpforge.lp.model import RESERVED, Term, is_identifier
from lpforge.lp.writer import format_number

MINIMAL = "Minimize\n obj: x + 2 y\nSubject To\n c1: x + y >= 1\nEnd"


def codes(diags):
    return [d.code for d in diags]


# -- parsing -------------------------------------------------------------------------


def test_minimal_file_parses_with_default_bounds():
    m = parse_lp(MINIMAL)
    assert m.sense == MINIMIZE
    assert m.variables == ("x", "y")
    assert len(m.constraints) == 1
    assert m.bound_of("x") == Bound(0, math.inf)
    assert m.bound_of("y") == Bound(0, math.inf)


def test_batch_row_terms():
    m = parse_lp("Minimize\n obj: q_1_1\nSubject To\n batch_1_1: q_1_1 - 100 k_1_1 = 0\nEnd\n")
    c = m.constraint("batch_1_1")
    assert c.expression.terms == (Term(1.0, "q_1_1"), Term(-100.0, "k_1_1"))
    assert c.sense == EQ and c.rhs == 0


def test_multiline_rows_and_sections():
    text = (
        "Maximize\n obj: 3 a + 2 b\nSubject To\n cap: a + b\n   <= 1\n"
        "Bounds\n -inf <= w <= 3\n z free\nGeneral\n a\nBinary\n b\nEnd\n"
    )
    m = parse_lp(text)
    assert m.sense == MAXIMIZE
    assert m.constraint("cap").rhs == 1
    assert m.kind_of("a") == INTEGER and m.kind_of("b") == BINARY
    assert m.bounds["w"] == Bound(-math.inf, 3)
    assert m.bounds["z"] == Bound(-math.inf, math.inf)


@pytest.mark.parametrize(
    "text, code, line",
    [
        ("Minimize\n obj: x\ns.t.\n c: x >= 1\nEnd\n", "UNKNOWN_SECTION", 3),
        ("Minimize\n obj: x\nSubject To\n c: x + >= 1\nEnd\n", "MALFORMED_EXPRESSION", 4),
        ("Minimize\n obj: x\nSubject To\n c: x >= 1\n c: x <= 4\nEnd\n", "DUPLICATE_NAME", 5),
        ("Minimize\n obj: x\nSubject To\n c: x >= 1\n", "MISSING_END", None),
    ],
)
def test_parse_errors_carry_codes(text, code, line):
    model, diags = parse_lp_diagnostics(text)
    assert model is None
    hit = [d for d in diags if d.code == code]
    assert hit and hit[0].is_error
    if line is not None:
        assert hit[0].line == line


def test_parse_lp_raises_with_diagnostics():
    with pytest.raises(LPForgeError) as info:
        parse_lp("Minimize\n obj: x\nSubject To\n c: x >= 1\n")
    assert "MISSING_END" in codes(info.value.diagnostics)


def test_metadata_and_family_headers_round_trip():
    text = (
        "\\ @meta origin = test case\nMinimize\n obj: x\nSubject To\n c1: x >= 1\n"
        "\\ --- SetupTime ---\n c2: x <= 5\nEnd\n"
    )
    m = parse_lp(text)
    assert m.metadata == {"origin": "test case"}
    assert [c.group for c in m.constraints] == ["", "SetupTime"]
    assert serialize_lp(m) == text


# -- serialization -------------------------------------------------------------------


def test_empty_model_serializes_to_valid_text():
    m = Model(objective=LinearExpression.of((0, "x")))
    text = serialize_lp(m)
    for section in ("Minimize", "Subject To", "End"):
        assert section in text.splitlines()
    assert parse_lp(text) == m


def test_batch_line_in_serialization():
    row = NamedConstraint("batch_1_1", LinearExpression.of((1, "q_1_1"), (-100, "k_1_1")), EQ, 0)
    text = serialize_lp(Model(objective=LinearExpression.of((1, "q_1_1")), constraints=(row,)))
    assert " batch_1_1: q_1_1 - 100 k_1_1 = 0" in text.splitlines()


def test_coefficients_merge_on_construction():
    e = LinearExpression.of((1, "x"), (2, "y"), (3, "x"))
    assert e.terms == (Term(4.0, "x"), Term(2.0, "y"))


def test_equal_models_serialize_identically():
    a = Model(objective=LinearExpression.of((1, "x"), (2, "y")), bounds={"x": Bound(0, 3), "y": Bound(1, 2)})
    b = Model(objective=LinearExpression.of((1, "x"), (2, "y")), bounds={"y": Bound(1, 2), "x": Bound(0, 3)})
    assert serialize_lp(a) == serialize_lp(b)


@pytest.mark.parametrize("value, text", [(3.0, "3"), (-0.0, "0"), (0.1, "0.1"), (1e20, "1e+20"), (math.inf, "inf")])
def test_format_number_is_shortest_round_trip(value, text):
    assert format_number(value) == text


@pytest.mark.parametrize("seed", range(5))
def test_generated_models_round_trip(seed):
    m = generate_base_model(GenConfig(seed=seed))
    assert parse_lp(serialize_lp(m)) == m
    aug = parse_lp(generate_pair(GenConfig(seed=seed)).augmented_lp)
    assert parse_lp(serialize_lp(aug)) == aug


names = st.from_regex(r"[a-zA-Z_][a-zA-Z0-9_]{0,5}", fullmatch=True).filter(
    lambda s: s.lower() not in RESERVED and is_identifier(s)
)
coefs = st.one_of(
    st.integers(-1000, 1000).map(float),
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False),
)


@st.composite
def models(draw):
    pool = draw(st.lists(names, min_size=1, max_size=8, unique=True))
    obj = LinearExpression.of(*[(draw(coefs), v) for v in draw(st.lists(st.sampled_from(pool), max_size=4))])
    rows = []
    for k in range(draw(st.integers(0, 5))):
        vs = draw(st.lists(st.sampled_from(pool), min_size=1, max_size=4))
        expr = LinearExpression.of(*[(draw(coefs), v) for v in vs])
        rows.append(NamedConstraint(f"r{k}", expr, draw(st.sampled_from([LE, GE, EQ])), draw(coefs)))
    used = list(dict.fromkeys(list(obj.variables) + [v for r in rows for v in r.expression.variables]))
    bounds, integrality = {}, {}
    for v in used:
        kind = draw(st.sampled_from(["c", "c", INTEGER, BINARY]))
        if kind != "c":
            integrality[v] = kind
        if kind != BINARY and draw(st.booleans()):
            lo = draw(st.one_of(st.just(-math.inf), coefs))
            hi = draw(st.one_of(st.just(math.inf), coefs))
            bounds[v] = Bound(lo, hi)
    if not used:
        obj = LinearExpression.of((0, pool[0]))
    sense = draw(st.sampled_from([MINIMIZE, MAXIMIZE]))
    return Model(sense, "obj", obj, tuple(rows), bounds, integrality)


@settings(max_examples=200)
@given(models())
def test_round_trip_property(m):
    text = serialize_lp(m)
    again = parse_lp(text)
    assert again == m
    assert serialize_lp(again) == text


# -- validation ----------------------------------------------------------------------


def test_validate_clean_model():
    assert validate(parse_lp(MINIMAL)) == []


def test_binary_with_wide_bound_warns():
    m = parse_lp("Minimize\n obj: b\nSubject To\n c: b + x >= 0\n c2: x <= 3\nBounds\n b <= 2\nBinary\n b\nEnd\n")
    diags = validate(m)
    assert codes(diags) == ["BOUND_CONFLICT_BINARY"]
    assert not diags[0].is_error


def test_single_use_variable_warns_only():
    m = parse_lp("Minimize\n obj: x\nSubject To\n c: x + w >= 1\nEnd\n")
    diags = validate(m)
    assert codes(diags) == ["UNDECLARED_VARIABLE"]
    assert all(not d.is_error for d in diags)


# -- diff ----------------------------------------------------------------------------


def test_diff_identity_is_empty():
    m = parse_lp(MINIMAL)
    assert diff_models(m, m).is_empty


def test_diff_reports_modified_rhs():
    m = parse_lp(MINIMAL)
    c = m.constraints[0]
    changed = m.with_changes(constraints=(NamedConstraint(c.name, c.expression, c.sense, 2.0),))
    d = diff_models(m, changed)
    assert d.modified_constraints == ("c1",)
    assert not d.objective_changed and not d.additions_only


def test_diff_flags_objective_change():
    m = parse_lp(MINIMAL)
    d = diff_models(m, m.with_changes(objective=LinearExpression.of((1, "x"), (3, "y"))))
    assert d.objective_changed


# -- propagation ---------------------------------------------------------------------


def test_propagation_fixes_zero_sum_rows():
    m = parse_lp("Minimize\n obj: x + y + z\nSubject To\n c: x + y <= 0\n d: z >= 1\nEnd\n")
    prop = propagate_bounds(m)
    assert set(prop.fixed_zero()) == {"x", "y"}
    assert not prop.infeasible


def test_propagation_detects_infeasibility():
    m = parse_lp("Minimize\n obj: x\nSubject To\n c: x >= 2\nBounds\n x <= 1\nEnd\n")
    assert propagate_bounds(m).infeasible
