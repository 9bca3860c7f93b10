import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etcsim.exprlang import (
    BinOp,
    Const,
    ExprEvalError,
    ExprSyntaxError,
    Func,
    Neg,
    NonlinearityExpr,
    Pow,
    Var,
    eval_expr,
    parse_expr,
    print_expr,
)


def test_parse_cos():
    assert parse_expr("cos(y)").ast == Func("cos", Var())


def test_parse_add():
    assert parse_expr("y+1").ast == BinOp("+", Var(), Const(1.0))


def test_unbalanced_paren_position():
    with pytest.raises(ExprSyntaxError) as exc:
        parse_expr("cos(")
    assert exc.value.position == 4


def test_unknown_identifier():
    with pytest.raises(ExprSyntaxError, match="unknown identifier"):
        parse_expr("cos(x)")


def test_arity_mismatch():
    with pytest.raises(ExprSyntaxError, match="exactly one argument"):
        parse_expr("cos(y, y)")
    with pytest.raises(ExprSyntaxError, match="exactly two arguments"):
        parse_expr("pow(y)")


def test_pow_integer_exponent_only():
    with pytest.raises(ExprSyntaxError, match="integer"):
        parse_expr("pow(y, 0.5)")
    assert parse_expr("pow(y, 3)").ast == Pow(Var(), 3)
    assert eval_expr(parse_expr("pow(y, -1)"), 4.0) == 0.25


def test_empty_and_trailing():
    with pytest.raises(ExprSyntaxError):
        parse_expr("   ")
    with pytest.raises(ExprSyntaxError, match="trailing"):
        parse_expr("y 1")


def test_eval_examples():
    assert eval_expr(parse_expr("cos(y)"), 0.0) == 1.0
    assert eval_expr(parse_expr("y+1"), 5.0) == 6.0
    assert eval_expr(parse_expr("cos(y)"), 5.0) == pytest.approx(0.2836621855, abs=1e-10)
    assert eval_expr(parse_expr("cos(y)"), 5.0) == math.cos(5.0)


def test_precedence():
    # unary minus binds tighter than multiplication: -y*y = (-y)*y
    assert eval_expr(parse_expr("-y*y"), 2.0) == -4.0
    assert eval_expr(parse_expr("1-2-3"), 0.0) == -4.0
    assert eval_expr(parse_expr("2/4/2"), 0.0) == 0.25
    assert eval_expr(parse_expr("1+2*3"), 0.0) == 7.0
    assert eval_expr(parse_expr("(1+2)*3"), 0.0) == 9.0


def test_eval_errors_flagged():
    with pytest.raises(ExprEvalError):
        eval_expr(parse_expr("1/y"), 0.0)
    with pytest.raises(ExprEvalError):
        eval_expr(parse_expr("exp(y)"), 1000.0)
    with pytest.raises(ExprEvalError):
        eval_expr(parse_expr("pow(y, -2)"), 0.0)


def test_eval_pure():
    e = parse_expr("cos(y)*y - exp(-y)")
    assert eval_expr(e, 1.25) == eval_expr(e, 1.25)


_leaves = st.one_of(
    st.builds(Const, st.floats(min_value=0.0, max_value=100.0, allow_nan=False)),
    st.just(Var()),
)


def _nodes(children):
    return st.one_of(
        st.builds(Neg, children),
        st.builds(BinOp, st.sampled_from("+-*/"), children, children),
        st.builds(Func, st.sampled_from(["cos", "sin", "exp"]), children),
        st.builds(Pow, children, st.integers(min_value=0, max_value=4)),
    )


ast_strategy = st.recursive(_leaves, _nodes, max_leaves=25)


@settings(max_examples=300, deadline=None)
@given(ast_strategy)
def test_print_parse_round_trip_tree(node):
    expr = NonlinearityExpr(node)
    assert parse_expr(print_expr(expr)).ast == node


@settings(max_examples=200, deadline=None)
@given(ast_strategy, st.floats(min_value=-10.0, max_value=10.0, allow_nan=False))
def test_round_trip_eval_bit_exact(node, y):
    expr = NonlinearityExpr(node)
    reparsed = parse_expr(print_expr(expr))
    try:
        expected = eval_expr(expr, y)
    except ExprEvalError:
        with pytest.raises(ExprEvalError):
            eval_expr(reparsed, y)
        return
    assert eval_expr(reparsed, y) == expected
