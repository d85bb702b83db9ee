import math

import numpy as np
import pytest

from spectra.expressions import (ExpressionError, compile_expression,
                                 evaluate, parse_expression)


def test_arithmetic_and_precedence():
    f, _, _ = compile_expression("1 + 2*r^2 - r/2")
    x = np.array([0.0, 1.0, 2.0])
    assert np.allclose(f(x), 1 + 2 * x ** 2 - x / 2)


def test_functions_and_variables():
    f, _, _ = compile_expression("exp(-cos(t))")
    x = np.linspace(0, math.pi, 5)
    assert np.allclose(f(x), np.exp(-np.cos(x)))
    g, _, _ = compile_expression("sin(2*r) + pi")
    assert np.allclose(g(x), np.sin(2 * x) + math.pi)


def test_unary_minus_and_nesting():
    f, _, _ = compile_expression("-(r - 1)^2")
    assert np.allclose(f(np.array([3.0])), [-4.0])


def test_derivatives_match_finite_differences():
    text = "exp(-0.5*r^2)*cos(3*r) + r^3/7"
    f, f1, f2 = compile_expression(text)
    x = np.linspace(0.2, 2.0, 7)
    h = 1e-6
    fd1 = (f(x + h) - f(x - h)) / (2 * h)
    fd2 = (f(x + h) - 2 * f(x) + f(x - h)) / h ** 2
    assert np.abs(f1(x) - fd1).max() < 1e-8 * (1 + np.abs(fd1).max())
    assert np.abs(f2(x) - fd2).max() < 1e-3


def test_parse_errors():
    for bad in ("2 +", "foo(r)", "sin r", "(1 + 2", "r ** 2", "1..2"):
        with pytest.raises(ExpressionError):
            parse_expression(bad)


def test_nonconstant_exponent_rejected_for_derivatives():
    with pytest.raises(ExpressionError):
        compile_expression("r^r")


def test_evaluate_scalar_broadcast():
    ast = parse_expression("3.5")
    out = evaluate(ast, np.zeros(4))
    assert out.shape == (4,) and np.all(out == 3.5)
