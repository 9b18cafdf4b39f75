"""Small arithmetic expression language for model coefficients.

Expressions are ASTs over complex literals, the independent variable
``x``, state-variable symbols, the binary operators ``+ - * /``, integer
powers ``^k``, and unary negation.  The imaginary unit is written ``i``
(``2i``, ``1+0.5i``); ``i`` is therefore reserved and cannot be a state
name.  The language is closed under symbolic differentiation.
"""

from dataclasses import dataclass

from .errors import DivisionByZero, ExpressionSyntaxError, UnknownSymbol

__all__ = [
    "Expression",
    "Lit",
    "Sym",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Neg",
    "parse_expression",
    "eval_expression",
    "differentiate",
    "expression_symbols",
    "to_text",
    "compile_expression",
]


class Expression:
    """Base class for AST nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Lit(Expression):
    value: complex


@dataclass(frozen=True)
class Sym(Expression):
    name: str


@dataclass(frozen=True)
class Add(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Sub(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Mul(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Div(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Pow(Expression):
    base: Expression
    exponent: int


@dataclass(frozen=True)
class Neg(Expression):
    operand: Expression


# ---------------------------------------------------------------------------
# Tokenizer / parser (recursive descent)

_OPERATORS = set("+-*/^()")


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch in _OPERATORS:
            tokens.append(("op", ch, pos))
            pos += 1
            continue
        if ch.isdigit() or ch == ".":
            start = pos
            while pos < n and (text[pos].isdigit() or text[pos] == "."):
                pos += 1
            if pos < n and text[pos] in "eE":
                look = pos + 1
                if look < n and text[look] in "+-":
                    look += 1
                if look < n and text[look].isdigit():
                    pos = look
                    while pos < n and text[pos].isdigit():
                        pos += 1
            body = text[start:pos]
            try:
                value = float(body)
            except ValueError:
                raise ExpressionSyntaxError(f"bad number '{body}'", start) from None
            if pos < n and text[pos] == "i" and not _ident_continues(text, pos + 1):
                pos += 1
                tokens.append(("num", complex(0.0, value), start))
            else:
                tokens.append(("num", complex(value, 0.0), start))
            continue
        if ch.isalpha() or ch == "_":
            start = pos
            while pos < n and (text[pos].isalnum() or text[pos] == "_"):
                pos += 1
            name = text[start:pos]
            if name == "i":
                tokens.append(("num", complex(0.0, 1.0), start))
            else:
                tokens.append(("ident", name, start))
            continue
        raise ExpressionSyntaxError(f"unexpected character {ch!r}", pos)
    tokens.append(("end", "", n))
    return tokens


def _ident_continues(text, pos):
    return pos < len(text) and (text[pos].isalnum() or text[pos] == "_")


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.index = 0

    def peek(self):
        return self.tokens[self.index]

    def advance(self):
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect_op(self, symbol):
        kind, value, pos = self.peek()
        if kind != "op" or value != symbol:
            raise ExpressionSyntaxError(f"expected '{symbol}'", pos)
        return self.advance()

    def parse(self):
        expr = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError("trailing input", pos)
        return expr

    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.term()
                node = Add(node, rhs) if value == "+" else Sub(node, rhs)
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.factor()
                node = Mul(node, rhs) if value == "*" else Div(node, rhs)
            else:
                return node

    def factor(self):
        kind, value, _ = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            return Neg(self.factor())
        if kind == "op" and value == "+":
            self.advance()
            return self.factor()
        return self.power()

    def power(self):
        base = self.atom()
        kind, value, _ = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            exponent = self.exponent()
            return Pow(base, exponent)
        return base

    def exponent(self):
        sign = 1
        kind, value, pos = self.peek()
        if kind == "op" and value in "+-":
            self.advance()
            sign = -1 if value == "-" else 1
            kind, value, pos = self.peek()
        if kind != "num" or value.imag != 0 or value.real != int(value.real):
            raise ExpressionSyntaxError("exponent must be an integer", pos)
        self.advance()
        return sign * int(value.real)

    def atom(self):
        kind, value, pos = self.advance()
        if kind == "num":
            return Lit(value)
        if kind == "ident":
            return Sym(value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionSyntaxError("expected a value", pos)


def parse_expression(text):
    """Parse expression text into an AST.

    Raises :class:`ExpressionSyntaxError` with the failing position on
    malformed input.  Symbol validity is checked later, against the model
    that owns the expression.
    """
    return _Parser(_tokenize(text)).parse()


# ---------------------------------------------------------------------------
# Simplifying constructors (keep derivative trees small)


def _add(a, b):
    if isinstance(a, Lit) and a.value == 0:
        return b
    if isinstance(b, Lit) and b.value == 0:
        return a
    if isinstance(a, Lit) and isinstance(b, Lit):
        return Lit(a.value + b.value)
    return Add(a, b)


def _sub(a, b):
    if isinstance(b, Lit) and b.value == 0:
        return a
    if isinstance(a, Lit) and isinstance(b, Lit):
        return Lit(a.value - b.value)
    if isinstance(a, Lit) and a.value == 0:
        return _neg(b)
    return Sub(a, b)


def _mul(a, b):
    if isinstance(a, Lit):
        if a.value == 0:
            return Lit(0j)
        if a.value == 1:
            return b
    if isinstance(b, Lit):
        if b.value == 0:
            return Lit(0j)
        if b.value == 1:
            return a
    if isinstance(a, Lit) and isinstance(b, Lit):
        return Lit(a.value * b.value)
    return Mul(a, b)


def _div(a, b):
    if isinstance(a, Lit) and a.value == 0:
        return Lit(0j)
    if isinstance(b, Lit) and b.value == 1:
        return a
    return Div(a, b)


def _neg(a):
    if isinstance(a, Lit):
        return Lit(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def _pow(a, k):
    if k == 0:
        return Lit(1 + 0j)
    if k == 1:
        return a
    if isinstance(a, Lit):
        if a.value == 0 and k < 0:
            return Pow(a, k)
        return Lit(a.value**k)
    return Pow(a, k)


def differentiate(expr, symbol):
    """Exact symbolic derivative with respect to ``symbol``."""
    if isinstance(expr, Lit):
        return Lit(0j)
    if isinstance(expr, Sym):
        return Lit(1 + 0j) if expr.name == symbol else Lit(0j)
    if isinstance(expr, Add):
        return _add(differentiate(expr.left, symbol), differentiate(expr.right, symbol))
    if isinstance(expr, Sub):
        return _sub(differentiate(expr.left, symbol), differentiate(expr.right, symbol))
    if isinstance(expr, Mul):
        da = differentiate(expr.left, symbol)
        db = differentiate(expr.right, symbol)
        return _add(_mul(da, expr.right), _mul(expr.left, db))
    if isinstance(expr, Div):
        da = differentiate(expr.left, symbol)
        db = differentiate(expr.right, symbol)
        num = _sub(_mul(da, expr.right), _mul(expr.left, db))
        return _div(num, _mul(expr.right, expr.right))
    if isinstance(expr, Pow):
        da = differentiate(expr.base, symbol)
        return _mul(_mul(Lit(complex(expr.exponent)), _pow(expr.base, expr.exponent - 1)), da)
    if isinstance(expr, Neg):
        return _neg(differentiate(expr.operand, symbol))
    raise TypeError(f"not an expression node: {expr!r}")


def expression_symbols(expr):
    """Set of symbol names referenced by the expression."""
    if isinstance(expr, Lit):
        return set()
    if isinstance(expr, Sym):
        return {expr.name}
    if isinstance(expr, (Add, Sub, Mul, Div)):
        return expression_symbols(expr.left) | expression_symbols(expr.right)
    if isinstance(expr, Pow):
        return expression_symbols(expr.base)
    if isinstance(expr, Neg):
        return expression_symbols(expr.operand)
    raise TypeError(f"not an expression node: {expr!r}")


def eval_expression(expr, bindings):
    """Evaluate with all symbols bound; raises on unbound symbols or poles."""
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Sym):
        try:
            return complex(bindings[expr.name])
        except KeyError:
            raise UnknownSymbol(expr.name) from None
    if isinstance(expr, Add):
        return eval_expression(expr.left, bindings) + eval_expression(expr.right, bindings)
    if isinstance(expr, Sub):
        return eval_expression(expr.left, bindings) - eval_expression(expr.right, bindings)
    if isinstance(expr, Mul):
        return eval_expression(expr.left, bindings) * eval_expression(expr.right, bindings)
    if isinstance(expr, Div):
        denom = eval_expression(expr.right, bindings)
        if denom == 0:
            raise DivisionByZero("zero divisor in coefficient expression")
        return eval_expression(expr.left, bindings) / denom
    if isinstance(expr, Pow):
        base = eval_expression(expr.base, bindings)
        if base == 0 and expr.exponent < 0:
            raise DivisionByZero("zero base with negative exponent")
        return base**expr.exponent
    if isinstance(expr, Neg):
        return -eval_expression(expr.operand, bindings)
    raise TypeError(f"not an expression node: {expr!r}")


def _fmt_complex_literal(value):
    re, im = value.real, value.imag
    if im == 0:
        return _fmt_real(re)
    if re == 0:
        return f"{_fmt_real(im)}i"
    sign = "+" if im >= 0 else "-"
    return f"({_fmt_real(re)}{sign}{_fmt_real(abs(im))}i)"


def _fmt_real(v):
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_text(expr):
    """Serialize an AST back to parseable text (fully parenthesized)."""
    if isinstance(expr, Lit):
        return _fmt_complex_literal(expr.value)
    if isinstance(expr, Sym):
        return expr.name
    if isinstance(expr, Add):
        return f"({to_text(expr.left)} + {to_text(expr.right)})"
    if isinstance(expr, Sub):
        return f"({to_text(expr.left)} - {to_text(expr.right)})"
    if isinstance(expr, Mul):
        return f"({to_text(expr.left)} * {to_text(expr.right)})"
    if isinstance(expr, Div):
        return f"({to_text(expr.left)} / {to_text(expr.right)})"
    if isinstance(expr, Pow):
        return f"{_pow_base_text(expr.base)}^{expr.exponent}"
    if isinstance(expr, Neg):
        return f"(-{to_text(expr.operand)})"
    raise TypeError(f"not an expression node: {expr!r}")


def _pow_base_text(base):
    text = to_text(base)
    if isinstance(base, (Sym,)) or text.startswith("("):
        return text
    return f"({text})"


def compile_expression(expr, symbol_index):
    """Compile to a closure over a positional value vector.

    ``symbol_index`` maps symbol name to position; evaluation then takes a
    sequence of complex values.  Raises :class:`UnknownSymbol` for symbols
    outside the map.
    """
    if isinstance(expr, Lit):
        v = expr.value
        return lambda vals: v
    if isinstance(expr, Sym):
        if expr.name not in symbol_index:
            raise UnknownSymbol(expr.name)
        k = symbol_index[expr.name]
        return lambda vals: vals[k]
    if isinstance(expr, (Add, Sub, Mul, Div)):
        fa = compile_expression(expr.left, symbol_index)
        fb = compile_expression(expr.right, symbol_index)
        if isinstance(expr, Add):
            return lambda vals: fa(vals) + fb(vals)
        if isinstance(expr, Sub):
            return lambda vals: fa(vals) - fb(vals)
        if isinstance(expr, Mul):
            return lambda vals: fa(vals) * fb(vals)

        def _divide(vals):
            denom = fb(vals)
            if denom == 0:
                raise DivisionByZero("zero divisor in coefficient expression")
            return fa(vals) / denom

        return _divide
    if isinstance(expr, Pow):
        f = compile_expression(expr.base, symbol_index)
        k = expr.exponent

        def _power(vals):
            base = f(vals)
            if base == 0 and k < 0:
                raise DivisionByZero("zero base with negative exponent")
            return base**k

        return _power
    if isinstance(expr, Neg):
        f = compile_expression(expr.operand, symbol_index)
        return lambda vals: -f(vals)
    raise TypeError(f"not an expression node: {expr!r}")
