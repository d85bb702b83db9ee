"""Minimal arithmetic expressions for densities and potentials.

Grammar (recursive descent): +, -, *, /, ^ (constant exponents), exp, sin,
cos, numeric literals and a single variable named r or t.  Expressions are
differentiated symbolically on the AST, so density families built from
strings carry exact first and second derivatives.
"""

from __future__ import annotations

import math

import numpy as np

_FUNCS = ("exp", "sin", "cos")


class ExpressionError(ValueError):
    pass


def _tokenize(text: str):
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "+-*/^()":
            tokens.append(c)
            i += 1
            continue
        if c.isdigit() or c == ".":
            j = i
            while j < len(text) and (text[j].isdigit() or text[j] in ".eE" or
                                     (text[j] in "+-" and text[j - 1] in "eE")):
                j += 1
            try:
                tokens.append(("num", float(text[i:j])))
            except ValueError:
                raise ExpressionError(f"bad number at {text[i:j]!r}")
            i = j
            continue
        if c.isalpha():
            j = i
            while j < len(text) and text[j].isalpha():
                j += 1
            word = text[i:j]
            if word in _FUNCS:
                tokens.append(("func", word))
            elif word in ("r", "t", "x"):
                tokens.append(("var",))
            elif word == "pi":
                tokens.append(("num", math.pi))
            else:
                raise ExpressionError(f"unknown name {word!r}")
            i = j
            continue
        raise ExpressionError(f"unexpected character {c!r}")
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self):
        node = self.expr()
        if self.peek() is not None:
            raise ExpressionError(f"trailing input at token {self.peek()!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            node = (("add" if op == "+" else "sub"), node, rhs)
        return node

    def term(self):
        node = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            node = (("mul" if op == "*" else "div"), node, rhs)
        return node

    def unary(self):
        if self.peek() == "-":
            self.take()
            return ("neg", self.unary())
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            expo = self.unary()
            return ("pow", base, expo)
        return base

    def atom(self):
        tok = self.take()
        if tok is None:
            raise ExpressionError("unexpected end of expression")
        if tok == "(":
            node = self.expr()
            if self.take() != ")":
                raise ExpressionError("missing closing parenthesis")
            return node
        if isinstance(tok, tuple):
            if tok[0] == "num":
                return ("num", tok[1])
            if tok[0] == "var":
                return ("var",)
            if tok[0] == "func":
                if self.take() != "(":
                    raise ExpressionError(f"{tok[1]} needs parentheses")
                arg = self.expr()
                if self.take() != ")":
                    raise ExpressionError("missing closing parenthesis")
                return (tok[1], arg)
        raise ExpressionError(f"unexpected token {tok!r}")


def parse_expression(text: str):
    return _Parser(_tokenize(text)).parse()


def evaluate(node, x):
    kind = node[0]
    if kind == "num":
        return np.full_like(np.asarray(x, dtype=float), node[1])
    if kind == "var":
        return np.asarray(x, dtype=float) + 0.0
    if kind == "neg":
        return -evaluate(node[1], x)
    if kind == "add":
        return evaluate(node[1], x) + evaluate(node[2], x)
    if kind == "sub":
        return evaluate(node[1], x) - evaluate(node[2], x)
    if kind == "mul":
        return evaluate(node[1], x) * evaluate(node[2], x)
    if kind == "div":
        return evaluate(node[1], x) / evaluate(node[2], x)
    if kind == "pow":
        return evaluate(node[1], x) ** evaluate(node[2], x)
    if kind == "exp":
        return np.exp(evaluate(node[1], x))
    if kind == "sin":
        return np.sin(evaluate(node[1], x))
    if kind == "cos":
        return np.cos(evaluate(node[1], x))
    raise ExpressionError(f"unknown node {kind!r}")


def _is_const(node):
    kind = node[0]
    if kind == "num":
        return True
    if kind == "var":
        return False
    return all(_is_const(ch) for ch in node[1:] if isinstance(ch, tuple))


def differentiate(node):
    kind = node[0]
    if kind == "num":
        return ("num", 0.0)
    if kind == "var":
        return ("num", 1.0)
    if kind == "neg":
        return ("neg", differentiate(node[1]))
    if kind == "add":
        return ("add", differentiate(node[1]), differentiate(node[2]))
    if kind == "sub":
        return ("sub", differentiate(node[1]), differentiate(node[2]))
    if kind == "mul":
        u, v = node[1], node[2]
        return ("add", ("mul", differentiate(u), v), ("mul", u, differentiate(v)))
    if kind == "div":
        u, v = node[1], node[2]
        num = ("sub", ("mul", differentiate(u), v), ("mul", u, differentiate(v)))
        return ("div", num, ("mul", v, v))
    if kind == "pow":
        base, expo = node[1], node[2]
        if not _is_const(expo):
            raise ExpressionError("only constant exponents are differentiable here")
        p = evaluate(expo, 0.0)
        p = float(np.asarray(p).ravel()[0])
        return ("mul", ("num", p),
                ("mul", ("pow", base, ("num", p - 1.0)), differentiate(base)))
    if kind == "exp":
        return ("mul", ("exp", node[1]), differentiate(node[1]))
    if kind == "sin":
        return ("mul", ("cos", node[1]), differentiate(node[1]))
    if kind == "cos":
        return ("neg", ("mul", ("sin", node[1]), differentiate(node[1])))
    raise ExpressionError(f"unknown node {kind!r}")


def compile_expression(text: str):
    """Callable triple (value, first, second derivative) from a string."""
    ast = parse_expression(text)
    d1 = differentiate(ast)
    d2 = differentiate(d1)
    return (lambda x: evaluate(ast, x),
            lambda x: evaluate(d1, x),
            lambda x: evaluate(d2, x))
