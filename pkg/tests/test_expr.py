import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import GALLERY_FAMILIES, gallery_closure
from mixedsmooth.errors import EvalDomainError, ExprParseError
from mixedsmooth.expr import (
    Binary,
    Constant,
    Pow,
    Unary,
    Variable,
    derivative,
    eval_many,
    eval_real,
    free_arity,
    load_function_file,
    parse,
    pretty,
)
from mixedsmooth.gallery import gallery_family


def test_parse_product():
    e = parse("x1*x2", 2)
    assert e == Binary("*", Variable(1), Variable(2))


def test_parse_precedence():
    e = parse("x1+x2*x3", 3)
    assert isinstance(e, Binary) and e.op == "+"
    assert e.left == Variable(1)
    assert e.right == Binary("*", Variable(2), Variable(3))


def test_parse_left_associativity():
    e = parse("x1-x2-x3", 3)
    assert e == Binary("-", Binary("-", Variable(1), Variable(2)), Variable(3))


def test_parse_power_binds_atom():
    e = parse("2*x1^3", 1)
    assert e == Binary("*", Constant(2.0), Pow(Variable(1), 3))


def test_parse_unary_minus_with_power():
    # '-' is part of the atom, so the power applies to the negated value
    assert parse("-x1^2", 1) == Pow(Unary("neg", Variable(1)), 2)


def test_unbalanced_paren_diagnostic():
    with pytest.raises(ExprParseError) as err:
        parse("sin(x1", 1)
    diag = err.value.diagnostic
    assert diag.offset == 7
    assert diag.message == "expected ')'"
    assert diag.expected == "')'"


def test_unknown_identifier_diagnostic():
    with pytest.raises(ExprParseError) as err:
        parse("foo(x1)", 1)
    assert "unknown function or variable" in err.value.diagnostic.message
    assert err.value.diagnostic.offset == 1


def test_arity_violation_diagnostic():
    with pytest.raises(ExprParseError) as err:
        parse("x1 + x3", 2)
    assert "exceeds declared arity" in err.value.diagnostic.message
    assert err.value.diagnostic.offset == 6


def test_non_integer_exponent_diagnostic():
    with pytest.raises(ExprParseError) as err:
        parse("x1^2.5", 1)
    assert "nonnegative integer" in err.value.diagnostic.message
    with pytest.raises(ExprParseError):
        parse("x1^x2", 2)


def test_empty_and_trailing():
    with pytest.raises(ExprParseError):
        parse("   ", 1)
    with pytest.raises(ExprParseError) as err:
        parse("x1 x2", 2)
    assert "trailing" in err.value.diagnostic.message


def test_eval_basics():
    assert eval_real(parse("x1*x2", 2), (2.0, 3.0)) == 6.0
    assert eval_real(parse("sin(x1)", 1), (0.0,)) == 0.0
    assert eval_real(parse("x1^0", 1), (7.0,)) == 1.0


def test_eval_domain_errors():
    with pytest.raises(EvalDomainError):
        eval_real(parse("log(x1)", 1), (0.0,))
    with pytest.raises(EvalDomainError):
        eval_real(parse("sqrt(x1)", 1), (-1.0,))
    with pytest.raises(EvalDomainError):
        eval_real(parse("1/x1", 1), (0.0,))


def test_eval_many_matches_scalar():
    e = parse("sin(x1)*exp(x2) + x1^3", 2)
    pts = np.array([[0.3, -0.2], [1.1, 0.4], [-2.0, 0.0]])
    batch = eval_many(e, pts)
    for row, b in zip(pts, batch):
        assert math.isclose(eval_real(e, row), b, rel_tol=1e-14)


def test_eval_many_reports_offending_point():
    e = parse("log(x1)", 1)
    with pytest.raises(EvalDomainError) as err:
        eval_many(e, np.array([[1.0], [-3.0]]))
    assert err.value.point[0] == -3.0


def test_free_arity():
    assert free_arity(parse("x1*x2", 2)) == 2
    assert free_arity(parse("5", 3)) == 0
    assert free_arity(parse("sin(x3)", 3)) == 3


@pytest.mark.parametrize("family", GALLERY_FAMILIES)
@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_eval_matches_hand_closure_exactly(family, n, rng):
    """Same arithmetic as a hand-written closure: zero tolerance."""
    g = gallery_family(family, n)
    closure = gallery_closure(family, n, math)
    pts = rng.uniform(-1.6, 1.6, size=(100, n))
    for row in pts:
        assert eval_real(g.expr, tuple(row)) == closure(*row)


_LEAVES = st.one_of(
    st.builds(Variable, st.integers(min_value=1, max_value=3)),
    st.builds(Constant, st.floats(min_value=-50, max_value=50, allow_nan=False)),
)


def _exprs(depth):
    if depth == 0:
        return _LEAVES
    sub = _exprs(depth - 1)
    return st.one_of(
        _LEAVES,
        st.builds(Unary, st.sampled_from(["neg", "sin", "cos", "exp", "tanh"]), sub),
        st.builds(Binary, st.sampled_from(["+", "-", "*", "/"]), sub, sub),
        st.builds(Pow, sub, st.integers(min_value=0, max_value=4)),
    )


@settings(max_examples=300, deadline=None)
@given(_exprs(4))
def test_pretty_roundtrip_idempotent(tree):
    """parse(pretty(.)) is a fixed point: one print-parse cycle reaches a
    tree the cycle then preserves exactly."""
    once = parse(pretty(tree), 3)
    twice = parse(pretty(once), 3)
    assert once == twice


@settings(max_examples=200, deadline=None)
@given(_exprs(3))
def test_pretty_preserves_value(tree, rng=np.random.default_rng(7)):
    reparsed = parse(pretty(tree), 3)
    pt = tuple(rng.uniform(0.2, 1.3, size=3))
    try:
        expected = eval_real(tree, pt)
    except EvalDomainError:
        return
    got = eval_real(reparsed, pt)
    assert got == expected or math.isclose(got, expected, rel_tol=1e-12)


def test_derivative_against_difference_quotient():
    e = parse("sin(x1)*exp(x2)/(1 + x1^2)", 2)
    d1 = derivative(e, 1)
    pt = (0.7, -0.3)
    h = 1e-6
    fd = (eval_real(e, (pt[0] + h, pt[1])) - eval_real(e, (pt[0] - h, pt[1]))) / (2 * h)
    assert math.isclose(eval_real(d1, pt), fd, rel_tol=1e-8)


def test_derivative_tanh_sqrt_log():
    e = parse("tanh(x1) + sqrt(x1) + log(x1)", 1)
    d = derivative(e, 1)
    t = 0.9
    expected = (1 - math.tanh(t) ** 2) + 0.5 / math.sqrt(t) + 1.0 / t
    assert math.isclose(eval_real(d, (t,)), expected, rel_tol=1e-13)


def test_load_function_file(tmp_path):
    f = tmp_path / "fn.txt"
    f.write_text("arity: 3\nx1 + x2*x3\n", encoding="utf-8")
    text, arity = load_function_file(f)
    assert arity == 3 and text == "x1 + x2*x3"
    g = tmp_path / "bare.txt"
    g.write_text("sin(x1)", encoding="utf-8")
    assert load_function_file(g) == ("sin(x1)", None)
