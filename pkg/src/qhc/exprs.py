"""Text expressions for scalars and algebra elements.

The scalar grammar covers everything Scalar.__str__ emits (Laurent
fractions in q over the Gaussian rationals); the element grammar covers
the generator words the engine prints, so parse(print(e)) round-trips.

    expr   := term (('+'|'-') term)*
    term   := [scalar '*'] factor ('*' factor)*
    factor := atom ['^' INT]
    atom   := 'x' INT | 'c' INT | 's' INT | 'phi' INT
            | 'e(' node ':' eps (',' node ':' eps)* ')'
            | '(' expr ')'
"""
from __future__ import annotations

import re

from .scalars import GaussRational, S_I, S_ONE, S_Q, Scalar

_TOKEN = re.compile(r"\s*(?:(\d+)|([a-z]+)|([-+*/^():,]))")


class ExprError(ValueError):
    """Parse failure with the offending position."""

    def __init__(self, message, pos):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


def _tokenize(text):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ExprError(f"unexpected character {stripped[0]!r}", pos)
        num, name, sym = m.groups()
        if num is not None:
            out.append(("int", int(num), m.start(1)))
        elif name is not None:
            out.append(("name", name, m.start(2)))
        else:
            out.append(("sym", sym, m.start(3)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self):
        if self.pos < len(self.toks):
            return self.toks[self.pos]
        return ("end", None, len(self.text))

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect_sym(self, sym):
        kind, val, at = self.next()
        if kind != "sym" or val != sym:
            raise ExprError(f"expected {sym!r}", at)

    def expect_int(self):
        kind, val, at = self.next()
        if kind != "int":
            raise ExprError("expected an integer", at)
        return val

    def at_end(self):
        return self.pos >= len(self.toks)

    def signed_int(self):
        kind, val, at = self.peek()
        sign = 1
        if kind == "sym" and val in "+-":
            self.next()
            sign = -1 if val == "-" else 1
        return sign * self.expect_int()

    # -- scalars ----------------------------------------------------------

    def scalar_expr(self) -> Scalar:
        out = self.scalar_term()
        while True:
            kind, val, _ = self.peek()
            if kind == "sym" and val in "+-":
                self.next()
                rhs = self.scalar_term()
                out = out + rhs if val == "+" else out - rhs
            else:
                return out

    def scalar_term(self) -> Scalar:
        out = self.scalar_factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "sym" and val in "*/":
                self.next()
                rhs = self.scalar_factor()
                out = out * rhs if val == "*" else out / rhs
            else:
                return out

    def scalar_factor(self) -> Scalar:
        kind, val, at = self.peek()
        neg = False
        if kind == "sym" and val == "-":
            self.next()
            neg = True
            kind, val, at = self.peek()
        out = self.scalar_atom()
        kind, val, _ = self.peek()
        if kind == "sym" and val == "^":
            self.next()
            out = out ** self.signed_int()
        return -out if neg else out

    def scalar_atom(self) -> Scalar:
        kind, val, at = self.next()
        if kind == "int":
            return Scalar.from_gauss(GaussRational(val))
        if kind == "name":
            if val == "q":
                return S_Q
            if val == "i":
                return S_I
            raise ExprError(f"unknown scalar symbol {val!r}", at)
        if kind == "sym" and val == "(":
            out = self.scalar_expr()
            self.expect_sym(")")
            return out
        raise ExprError("expected a scalar", at)

    # -- algebra elements -------------------------------------------------

    def element_expr(self, alg):
        out = self.element_term(alg)
        while True:
            kind, val, _ = self.peek()
            if kind == "sym" and val in "+-":
                self.next()
                rhs = self.element_term(alg)
                out = out + rhs if val == "+" else out - rhs
            else:
                return out

    def element_term(self, alg):
        coeff = S_ONE
        kind, val, _ = self.peek()
        if kind == "sym" and val == "-":
            self.next()
            coeff = -coeff
        coeff = coeff * self._try_coefficient()
        out = self.element_factor(alg)
        while True:
            kind, val, _ = self.peek()
            if kind == "sym" and val == "*":
                self.next()
                out = out * self.element_factor(alg)
            else:
                return out.scale(coeff)

    def _try_coefficient(self) -> Scalar:
        """A scalar followed by '*', or nothing; backtracks on failure."""
        save = self.pos
        kind, val, _ = self.peek()
        starts = (
            kind == "int"
            or (kind == "name" and val in ("q", "i"))
            or (kind == "sym" and val == "(")
        )
        if not starts:
            return S_ONE
        try:
            coeff = self.scalar_factor()
            while True:
                kind, val, _ = self.peek()
                if kind == "sym" and val == "/":
                    self.next()
                    coeff = coeff / self.scalar_factor()
                else:
                    break
            self.expect_sym("*")
        except (ExprError, ZeroDivisionError):
            self.pos = save
            return S_ONE
        kind, val, _ = self.peek()
        if kind == "end":
            self.pos = save
            return S_ONE
        return coeff

    def element_factor(self, alg):
        from .engine import intertwiner

        kind, val, at = self.next()
        if kind == "name" and val in ("x", "c", "s"):
            idx = self.expect_int()
            try:
                out = alg.generator(val, idx)
            except (ValueError, IndexError) as exc:
                raise ExprError(str(exc), at) from None
        elif kind == "name" and val == "phi":
            idx = self.expect_int()
            try:
                out = intertwiner(alg, idx)
            except (ValueError, IndexError) as exc:
                raise ExprError(str(exc), at) from None
        elif kind == "name" and val == "e":
            self.expect_sym("(")
            nu = []
            while True:
                node = self.signed_int()
                self.expect_sym(":")
                eps = self.expect_int()
                nu.append((node, eps))
                kind, val, _ = self.peek()
                if kind == "sym" and val == ",":
                    self.next()
                    continue
                break
            self.expect_sym(")")
            try:
                out = alg.e(tuple(nu))
            except (ValueError, KeyError) as exc:
                raise ExprError(str(exc), at) from None
        elif kind == "sym" and val == "(":
            out = self.element_expr(alg)
            self.expect_sym(")")
        else:
            raise ExprError("expected a generator or '('", at)
        kind, val, _ = self.peek()
        if kind == "sym" and val == "^":
            self.next()
            out = out ** self.expect_int()
        return out


def parse_scalar(text: str) -> Scalar:
    p = _Parser(text)
    out = p.scalar_expr()
    if not p.at_end():
        raise ExprError("trailing input", p.peek()[2])
    return out


def parse_element(text: str, alg):
    p = _Parser(text)
    if len(p.toks) == 1 and p.toks[0][:2] == ("int", 0):
        return alg.zero()
    out = p.element_expr(alg)
    if not p.at_end():
        raise ExprError("trailing input", p.peek()[2])
    return out
