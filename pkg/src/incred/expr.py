"""Expression language for system definitions.

Three small sublanguages share one tokenizer and evaluate over an
environment mapping variable names to floats:

* scalar expressions -- infix arithmetic over ``x1..x9``, ``t`` (plus any
  declared parameter names), with functions ``abs, max, min, sgn, sgn1,
  exp, sin, cos``;
* set expressions -- interval-valued: singletons ``{expr}``, interval
  literals ``[lo, hi]``, ``hull(a, b)``, Minkowski sums ``A + B`` and
  scalar multiples ``c * A``;
* guards -- comparisons combined with ``and`` / ``or`` / ``not``. The
  word ``otherwise`` by itself is the catch-all guard.

Grammar (normative)::

    scalar  := term (('+'|'-') term)*
    term    := factor (('*'|'/') factor)*
    factor  := ['-'] atom
    atom    := number | ident | ident '(' args ')' | '(' scalar ')'
    set     := setatom ('+' setatom)*
    setatom := '{' scalar '}' | '[' scalar ',' scalar ']'
             | 'hull' '(' scalar ',' scalar ')' | factor '*' setatom
             | '(' set ')'
    guard   := andg ('or' andg)* ; andg := noty ('and' noty)*
    noty    := 'not' noty | '(' guard ')' | scalar cmp scalar

(The scalar multiplier in ``setatom`` binds at ``factor`` level; use
parentheses for compound coefficients, e.g. ``(x1+1)*[0,1]``.)

Comparison semantics are exact floating-point comparisons: ``==`` is
value equality after evaluation, with no tolerance. Guard surfaces such
as ``abs(x1) == 1`` are therefore hit only by deliberately placed
points, never by fuzz. ``sgn(0) = 0``; ``sgn1(y)`` is 0 on ``(-1, 1)``
and ``sgn(y)`` elsewhere. Division by a denominator smaller than 1e-300
in magnitude raises instead of returning inf.

ASTs are immutable; evaluation is pure. ``compile_scalar`` /
``compile_set`` / ``compile_guard`` produce plain Python closures with
semantics identical to the tree-walking evaluators (same operations in
the same order); grid scans use them as a fast path.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Union

from .errors import DslEvalError, DslSyntaxError
from .intervals import Interval

__all__ = [
    "ScalarExpr", "SetExpr", "GuardExpr",
    "Num", "Var", "Neg", "BinOp", "Call",
    "SingletonSet", "IntervalSet", "HullSet", "SumSet", "ScaledSet",
    "Comparison", "AndGuard", "OrGuard", "NotGuard", "TrueGuard",
    "parse_scalar", "parse_set", "parse_guard",
    "eval_scalar", "eval_set", "eval_guard",
    "compile_scalar", "compile_set", "compile_guard",
    "pretty_scalar", "pretty_set", "pretty_guard",
    "free_vars", "DEFAULT_VARIABLES",
]

DEFAULT_VARIABLES = frozenset({f"x{i}" for i in range(1, 10)} | {"t"})

_RESERVED = frozenset({"and", "or", "not", "hull", "otherwise"})

_FUNCTION_ARITY = {
    "abs": 1, "max": 2, "min": 2, "sgn": 1, "sgn1": 1,
    "exp": 1, "sin": 1, "cos": 1,
}

_DIV_FLOOR = 1e-300


def _sgn(y: float) -> float:
    if y == 0.0:
        return 0.0
    return 1.0 if y > 0.0 else -1.0


def _sgn1(y: float) -> float:
    if -1.0 < y < 1.0:
        return 0.0
    return _sgn(y)


def _checked_div(a: float, b: float) -> float:
    if abs(b) < _DIV_FLOOR:
        raise DslEvalError(f"division by near-zero denominator {b!r}")
    return a / b


def _interval_value(lo: float, hi: float) -> Interval:
    if lo > hi:
        raise DslEvalError(
            f"interval literal evaluated with lo > hi ({lo} > {hi})")
    return Interval(lo, hi)


def _hull_value(a: float, b: float) -> Interval:
    return Interval(min(a, b), max(a, b))


_FUNCTION_IMPL: dict[str, Callable] = {
    "abs": abs, "max": max, "min": min, "sgn": _sgn, "sgn1": _sgn1,
    "exp": math.exp, "sin": math.sin, "cos": math.cos,
}


# --- AST nodes ---------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "ScalarExpr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "ScalarExpr"
    right: "ScalarExpr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["ScalarExpr", ...]


ScalarExpr = Union[Num, Var, Neg, BinOp, Call]


@dataclass(frozen=True)
class SingletonSet:
    value: ScalarExpr


@dataclass(frozen=True)
class IntervalSet:
    lo: ScalarExpr
    hi: ScalarExpr


@dataclass(frozen=True)
class HullSet:
    a: ScalarExpr
    b: ScalarExpr


@dataclass(frozen=True)
class SumSet:
    terms: tuple["SetExpr", ...]


@dataclass(frozen=True)
class ScaledSet:
    coeff: ScalarExpr
    operand: "SetExpr"


SetExpr = Union[SingletonSet, IntervalSet, HullSet, SumSet, ScaledSet]


@dataclass(frozen=True)
class Comparison:
    op: str  # == != < <= > >=
    left: ScalarExpr
    right: ScalarExpr


@dataclass(frozen=True)
class AndGuard:
    terms: tuple["GuardExpr", ...]


@dataclass(frozen=True)
class OrGuard:
    terms: tuple["GuardExpr", ...]


@dataclass(frozen=True)
class NotGuard:
    operand: "GuardExpr"


@dataclass(frozen=True)
class TrueGuard:
    """The catch-all guard, written ``otherwise``."""


GuardExpr = Union[Comparison, AndGuard, OrGuard, NotGuard, TrueGuard]


# --- tokenizer ---------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


_NUM_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")

_PUNCT = {
    "(": "lparen", ")": "rparen", "{": "lbrace", "}": "rbrace",
    "[": "lbracket", "]": "rbracket", ",": "comma",
}


def _tokenize(src: str) -> list[_Token]:
    toks: list[_Token] = []
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c in _PUNCT:
            toks.append(_Token(_PUNCT[c], c, i))
            i += 1
            continue
        if c in "+-*/":
            toks.append(_Token("op", c, i))
            i += 1
            continue
        if c in "=!<>":
            two = src[i:i + 2]
            if two in ("==", "!=", "<=", ">="):
                toks.append(_Token("cmp", two, i))
                i += 2
                continue
            if c in "<>":
                toks.append(_Token("cmp", c, i))
                i += 1
                continue
            raise DslSyntaxError(f"stray {c!r}", i, src)
        m = _NUM_RE.match(src, i)
        if m:
            toks.append(_Token("num", m.group(), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(src, i)
        if m:
            toks.append(_Token("ident", m.group(), i))
            i = m.end()
            continue
        raise DslSyntaxError(f"unexpected character {c!r}", i, src)
    toks.append(_Token("end", "", n))
    return toks


# --- parser ------------------------------------------------------------

class _Parser:
    def __init__(self, src: str, variables: frozenset[str]):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.variables = variables

    def peek(self) -> _Token:
        return self.toks[self.i]

    def advance(self) -> _Token:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg: str) -> None:
        raise DslSyntaxError(msg, self.peek().pos, self.src)

    def expect(self, kind: str, text: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            self.fail(f"expected {want!r}, found {tok.text!r}")
        return self.advance()

    def expect_end(self) -> None:
        if self.peek().kind != "end":
            self.fail(f"unexpected trailing input {self.peek().text!r}")

    # scalar grammar

    def scalar(self) -> ScalarExpr:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> ScalarExpr:
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> ScalarExpr:
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return Neg(self.atom())
        return self.atom()

    def atom(self) -> ScalarExpr:
        tok = self.peek()
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "lparen":
            self.advance()
            node = self.scalar()
            self.expect("rparen")
            return node
        if tok.kind == "ident":
            name = tok.text
            if name in _RESERVED:
                self.fail(f"reserved word {name!r} is not a scalar")
            self.advance()
            if self.peek().kind == "lparen":
                if name not in _FUNCTION_ARITY:
                    raise DslSyntaxError(
                        f"unknown function {name!r}", tok.pos, self.src)
                self.advance()
                args = [self.scalar()]
                while self.peek().kind == "comma":
                    self.advance()
                    args.append(self.scalar())
                self.expect("rparen")
                if len(args) != _FUNCTION_ARITY[name]:
                    raise DslSyntaxError(
                        f"{name} takes {_FUNCTION_ARITY[name]} argument(s), "
                        f"got {len(args)}", tok.pos, self.src)
                return Call(name, tuple(args))
            if name not in self.variables:
                raise DslSyntaxError(
                    f"unknown identifier {name!r}", tok.pos, self.src)
            return Var(name)
        self.fail(f"expected a scalar atom, found {tok.text!r}")
        raise AssertionError  # unreachable

    # set grammar

    def set_expr(self) -> SetExpr:
        terms = [self.set_atom()]
        while self.peek().kind == "op" and self.peek().text == "+":
            self.advance()
            terms.append(self.set_atom())
        if len(terms) == 1:
            return terms[0]
        return SumSet(tuple(terms))

    def set_atom(self) -> SetExpr:
        tok = self.peek()
        if tok.kind == "lbrace":
            self.advance()
            value = self.scalar()
            self.expect("rbrace")
            return SingletonSet(value)
        if tok.kind == "lbracket":
            self.advance()
            lo = self.scalar()
            self.expect("comma")
            hi = self.scalar()
            self.expect("rbracket")
            return IntervalSet(lo, hi)
        if tok.kind == "ident" and tok.text == "hull":
            self.advance()
            self.expect("lparen")
            a = self.scalar()
            self.expect("comma")
            b = self.scalar()
            self.expect("rparen")
            return HullSet(a, b)
        if tok.kind == "lparen":
            mark = self.i
            try:
                self.advance()
                inner = self.set_expr()
                self.expect("rparen")
                if self.peek().kind == "op" and self.peek().text == "*":
                    # a parenthesized set cannot be a multiplier; reparse
                    # the parenthesized text as a scalar coefficient
                    raise DslSyntaxError("set used as multiplier",
                                         self.peek().pos, self.src)
                return inner
            except DslSyntaxError:
                self.i = mark
        coeff = self.factor()
        if self.peek().kind == "op" and self.peek().text == "*":
            self.advance()
            return ScaledSet(coeff, self.set_atom())
        self.fail("expected a set atom")
        raise AssertionError  # unreachable

    # guard grammar

    def guard(self) -> GuardExpr:
        terms = [self.guard_and()]
        while self.peek().kind == "ident" and self.peek().text == "or":
            self.advance()
            terms.append(self.guard_and())
        if len(terms) == 1:
            return terms[0]
        return OrGuard(tuple(terms))

    def guard_and(self) -> GuardExpr:
        terms = [self.guard_unary()]
        while self.peek().kind == "ident" and self.peek().text == "and":
            self.advance()
            terms.append(self.guard_unary())
        if len(terms) == 1:
            return terms[0]
        return AndGuard(tuple(terms))

    def guard_unary(self) -> GuardExpr:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == "not":
            self.advance()
            return NotGuard(self.guard_unary())
        if tok.kind == "lparen":
            mark = self.i
            try:
                self.advance()
                inner = self.guard()
                self.expect("rparen")
                return inner
            except DslSyntaxError:
                self.i = mark
        return self.comparison()

    def comparison(self) -> GuardExpr:
        left = self.scalar()
        tok = self.peek()
        if tok.kind != "cmp":
            self.fail(f"expected a comparison operator, found {tok.text!r}")
        self.advance()
        right = self.scalar()
        return Comparison(tok.text, left, right)


def _varset(variables: Iterable[str] | None) -> frozenset[str]:
    return DEFAULT_VARIABLES if variables is None else frozenset(variables)


def parse_scalar(src: str, variables: Iterable[str] | None = None) -> ScalarExpr:
    p = _Parser(src, _varset(variables))
    node = p.scalar()
    p.expect_end()
    return node


def parse_set(src: str, variables: Iterable[str] | None = None) -> SetExpr:
    p = _Parser(src, _varset(variables))
    node = p.set_expr()
    p.expect_end()
    return node


def parse_guard(src: str, variables: Iterable[str] | None = None) -> GuardExpr:
    p = _Parser(src, _varset(variables))
    if p.peek().kind == "ident" and p.peek().text == "otherwise":
        p.advance()
        p.expect_end()
        return TrueGuard()
    node = p.guard()
    p.expect_end()
    return node


# --- tree-walking evaluators -------------------------------------------

def eval_scalar(node: ScalarExpr, env: Mapping[str, float]) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -eval_scalar(node.operand, env)
    if isinstance(node, BinOp):
        a = eval_scalar(node.left, env)
        b = eval_scalar(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return _checked_div(a, b)
    if isinstance(node, Call):
        args = [eval_scalar(a, env) for a in node.args]
        return _FUNCTION_IMPL[node.func](*args)
    raise TypeError(f"not a scalar expression: {node!r}")


def eval_set(node: SetExpr, env: Mapping[str, float]) -> Interval:
    if isinstance(node, SingletonSet):
        return Interval.point(eval_scalar(node.value, env))
    if isinstance(node, IntervalSet):
        return _interval_value(eval_scalar(node.lo, env),
                               eval_scalar(node.hi, env))
    if isinstance(node, HullSet):
        return _hull_value(eval_scalar(node.a, env),
                           eval_scalar(node.b, env))
    if isinstance(node, SumSet):
        acc = eval_set(node.terms[0], env)
        for term in node.terms[1:]:
            acc = acc.add(eval_set(term, env))
        return acc
    if isinstance(node, ScaledSet):
        return eval_set(node.operand, env).scale(eval_scalar(node.coeff, env))
    raise TypeError(f"not a set expression: {node!r}")


def eval_guard(node: GuardExpr, env: Mapping[str, float]) -> bool:
    if isinstance(node, TrueGuard):
        return True
    if isinstance(node, Comparison):
        a = eval_scalar(node.left, env)
        b = eval_scalar(node.right, env)
        op = node.op
        if op == "==":
            return a == b
        if op == "!=":
            return a != b
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b
    if isinstance(node, AndGuard):
        return all(eval_guard(t, env) for t in node.terms)
    if isinstance(node, OrGuard):
        return any(eval_guard(t, env) for t in node.terms)
    if isinstance(node, NotGuard):
        return not eval_guard(node.operand, env)
    raise TypeError(f"not a guard expression: {node!r}")


# --- compilation to Python closures ------------------------------------

_COMPILE_NS = {
    "_div": _checked_div, "_abs": abs, "_max": max, "_min": min,
    "_sgn": _sgn, "_sgn1": _sgn1, "_exp": math.exp, "_sin": math.sin,
    "_cos": math.cos, "_pt": Interval.point, "_intv": _interval_value,
    "_hullv": _hull_value,
}

_FUNC_CODE = {
    "abs": "_abs", "max": "_max", "min": "_min", "sgn": "_sgn",
    "sgn1": "_sgn1", "exp": "_exp", "sin": "_sin", "cos": "_cos",
}


def _scalar_code(node: ScalarExpr) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return f"_e[{node.name!r}]"
    if isinstance(node, Neg):
        return f"(-{_scalar_code(node.operand)})"
    if isinstance(node, BinOp):
        a = _scalar_code(node.left)
        b = _scalar_code(node.right)
        if node.op == "/":
            return f"_div({a}, {b})"
        return f"({a} {node.op} {b})"
    if isinstance(node, Call):
        args = ", ".join(_scalar_code(a) for a in node.args)
        return f"{_FUNC_CODE[node.func]}({args})"
    raise TypeError(f"not a scalar expression: {node!r}")


def _set_code(node: SetExpr) -> str:
    if isinstance(node, SingletonSet):
        return f"_pt({_scalar_code(node.value)})"
    if isinstance(node, IntervalSet):
        return f"_intv({_scalar_code(node.lo)}, {_scalar_code(node.hi)})"
    if isinstance(node, HullSet):
        return f"_hullv({_scalar_code(node.a)}, {_scalar_code(node.b)})"
    if isinstance(node, SumSet):
        code = _set_code(node.terms[0])
        for term in node.terms[1:]:
            code = f"{code}.add({_set_code(term)})"
        return code
    if isinstance(node, ScaledSet):
        return f"{_set_code(node.operand)}.scale({_scalar_code(node.coeff)})"
    raise TypeError(f"not a set expression: {node!r}")


def _guard_code(node: GuardExpr) -> str:
    if isinstance(node, TrueGuard):
        return "True"
    if isinstance(node, Comparison):
        return f"({_scalar_code(node.left)} {node.op} {_scalar_code(node.right)})"
    if isinstance(node, AndGuard):
        return "(" + " and ".join(_guard_code(t) for t in node.terms) + ")"
    if isinstance(node, OrGuard):
        return "(" + " or ".join(_guard_code(t) for t in node.terms) + ")"
    if isinstance(node, NotGuard):
        return f"(not {_guard_code(node.operand)})"
    raise TypeError(f"not a guard expression: {node!r}")


def _build(code: str) -> Callable:
    return eval(f"lambda _e: {code}", dict(_COMPILE_NS))


def compile_scalar(node: ScalarExpr) -> Callable[[Mapping[str, float]], float]:
    return _build(_scalar_code(node))


def compile_set(node: SetExpr) -> Callable[[Mapping[str, float]], Interval]:
    return _build(_set_code(node))


def compile_guard(node: GuardExpr) -> Callable[[Mapping[str, float]], bool]:
    return _build(_guard_code(node))


# --- free variables -----------------------------------------------------

def free_vars(node) -> frozenset[str]:
    if isinstance(node, Num) or isinstance(node, TrueGuard):
        return frozenset()
    if isinstance(node, Var):
        return frozenset({node.name})
    if isinstance(node, Neg):
        return free_vars(node.operand)
    if isinstance(node, NotGuard):
        return free_vars(node.operand)
    if isinstance(node, BinOp):
        return free_vars(node.left) | free_vars(node.right)
    if isinstance(node, Comparison):
        return free_vars(node.left) | free_vars(node.right)
    if isinstance(node, Call):
        out: frozenset[str] = frozenset()
        for a in node.args:
            out |= free_vars(a)
        return out
    if isinstance(node, (AndGuard, OrGuard)):
        out = frozenset()
        for t in node.terms:
            out |= free_vars(t)
        return out
    if isinstance(node, SingletonSet):
        return free_vars(node.value)
    if isinstance(node, IntervalSet):
        return free_vars(node.lo) | free_vars(node.hi)
    if isinstance(node, HullSet):
        return free_vars(node.a) | free_vars(node.b)
    if isinstance(node, SumSet):
        out = frozenset()
        for t in node.terms:
            out |= free_vars(t)
        return out
    if isinstance(node, ScaledSet):
        return free_vars(node.coeff) | free_vars(node.operand)
    raise TypeError(f"not an expression node: {node!r}")


# --- pretty printers ----------------------------------------------------

def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _scalar_level(node: ScalarExpr) -> int:
    if isinstance(node, (Num, Var, Call)):
        return 4
    if isinstance(node, Neg):
        return 3
    return 2 if node.op in "*/" else 1


def _wrap_scalar(node: ScalarExpr, min_level: int) -> str:
    s = pretty_scalar(node)
    return f"({s})" if _scalar_level(node) < min_level else s


def pretty_scalar(node: ScalarExpr) -> str:
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return "-" + _wrap_scalar(node.operand, 4)
    if isinstance(node, BinOp):
        if node.op in "+-":
            return (f"{_wrap_scalar(node.left, 1)} {node.op} "
                    f"{_wrap_scalar(node.right, 2)}")
        return f"{_wrap_scalar(node.left, 2)}{node.op}{_wrap_scalar(node.right, 3)}"
    if isinstance(node, Call):
        return f"{node.func}(" + ", ".join(pretty_scalar(a) for a in node.args) + ")"
    raise TypeError(f"not a scalar expression: {node!r}")


def _set_atom_str(node: SetExpr) -> str:
    s = pretty_set(node)
    return f"({s})" if isinstance(node, SumSet) else s


def pretty_set(node: SetExpr) -> str:
    if isinstance(node, SingletonSet):
        return "{" + pretty_scalar(node.value) + "}"
    if isinstance(node, IntervalSet):
        return f"[{pretty_scalar(node.lo)}, {pretty_scalar(node.hi)}]"
    if isinstance(node, HullSet):
        return f"hull({pretty_scalar(node.a)}, {pretty_scalar(node.b)})"
    if isinstance(node, SumSet):
        return " + ".join(_set_atom_str(t) for t in node.terms)
    if isinstance(node, ScaledSet):
        return f"{_wrap_scalar(node.coeff, 3)}*{_set_atom_str(node.operand)}"
    raise TypeError(f"not a set expression: {node!r}")


def pretty_guard(node: GuardExpr) -> str:
    if isinstance(node, TrueGuard):
        return "otherwise"
    if isinstance(node, Comparison):
        return f"{pretty_scalar(node.left)} {node.op} {pretty_scalar(node.right)}"
    if isinstance(node, AndGuard):
        parts = []
        for t in node.terms:
            s = pretty_guard(t)
            parts.append(f"({s})" if isinstance(t, OrGuard) else s)
        return " and ".join(parts)
    if isinstance(node, OrGuard):
        return " or ".join(pretty_guard(t) for t in node.terms)
    if isinstance(node, NotGuard):
        s = pretty_guard(node.operand)
        if isinstance(node.operand, (AndGuard, OrGuard, Comparison)):
            return f"not ({s})"
        return f"not {s}"
    raise TypeError(f"not a guard expression: {node!r}")
