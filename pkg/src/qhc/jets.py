"""Truncated multivariate power series (jets) at a base point.

A Jet models an element of k[[X_1 - b_1, ..., X_n - b_n]] known modulo
terms of total degree >= order in the local variables u_i = X_i - b_i.
Coefficients and base points are Scalar values.

Exact division by a non-unit is supported when the divisor's lowest
homogeneous part is a nonzero linear form; it costs one order of validity,
and the loss is recorded in the result's order field.
"""
from __future__ import annotations

from .scalars import S_ONE, S_ZERO, Scalar


class PoleError(ArithmeticError):
    """Expansion hit a pole at the base point."""


class NonUnitJetError(ArithmeticError):
    """Inversion of a jet whose constant term is zero."""


class InexactJetDivisionError(ArithmeticError):
    """Exact division requested but the divisor does not divide."""


def _homog_parts(coeffs):
    parts = {}
    for e, c in coeffs.items():
        parts.setdefault(sum(e), {})[e] = c
    return parts


def _divide_homog_by_linear(p, lin, nvars):
    """Divide a homogeneous coefficient dict by a linear form, exactly.

    lin maps single-variable exponent tuples to Scalar.  Returns the
    quotient dict; raises InexactJetDivisionError on nonzero remainder.
    """
    pivot = None
    for e in lin:
        pivot = e.index(1)
        break
    cj = lin[tuple(1 if i == pivot else 0 for i in range(nvars))]
    # lin = cj*(u_pivot - r) with r = -sum_{i != pivot} (c_i/cj) u_i
    r = {}
    for e, c in lin.items():
        if e.index(1) != pivot:
            r[e] = -c / cj
    # Horner division of p (viewed in k[others][u_pivot]) by (u_pivot - r).
    by_deg = {}
    for e, c in p.items():
        k = e[pivot]
        rest = tuple(x if i != pivot else 0 for i, x in enumerate(e))
        by_deg.setdefault(k, {})[rest] = c
    if not by_deg:
        return {}
    top = max(by_deg)
    h = {k: {} for k in range(top)}
    carry = {}

    def poly_add(dst, src):
        for e, c in src.items():
            s = dst.get(e, S_ZERO) + c
            if s.is_zero():
                dst.pop(e, None)
            else:
                dst[e] = s

    def poly_mul_r(src):
        out = {}
        for e, c in src.items():
            for er, cr in r.items():
                ne = tuple(x + y for x, y in zip(e, er))
                s = out.get(ne, S_ZERO) + c * cr
                if s.is_zero():
                    out.pop(ne, None)
                else:
                    out[ne] = s
        return out

    for k in range(top, 0, -1):
        cur = dict(by_deg.get(k, {}))
        poly_add(cur, carry)
        h[k - 1] = cur
        carry = poly_mul_r(cur)
    rem = dict(by_deg.get(0, {}))
    poly_add(rem, carry)
    if rem:
        raise InexactJetDivisionError("linear form does not divide")
    quo = {}
    for k, poly in h.items():
        for e, c in poly.items():
            ne = tuple(x if i != pivot else k for i, x in enumerate(e))
            quo[ne] = c / cj
    return quo


class Jet:
    __slots__ = ("base", "order", "coeffs")

    def __init__(self, base, order: int, coeffs=None):
        if order < 1:
            raise ValueError("jet order must be positive")
        base = tuple(Scalar.coerce(b) for b in base)
        clean = {}
        for e, c in (coeffs or {}).items():
            if len(e) != len(base):
                raise ValueError("exponent arity mismatch")
            if sum(e) >= order:
                continue
            c = Scalar.coerce(c)
            if not c.is_zero():
                clean[tuple(e)] = c
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coeffs", clean)

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    @property
    def nvars(self):
        return len(self.base)

    @staticmethod
    def const(base, order: int, c) -> "Jet":
        n = len(base)
        return Jet(base, order, {(0,) * n: Scalar.coerce(c)})

    @staticmethod
    def variable(base, order: int, i: int) -> "Jet":
        """The jet of the global coordinate X_i = u_i + b_i (1-based i)."""
        n = len(base)
        e = tuple(1 if k == i - 1 else 0 for k in range(n))
        return Jet(base, order, {e: S_ONE, (0,) * n: base[i - 1]})

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def constant_term(self) -> Scalar:
        return self.coeffs.get((0,) * self.nvars, S_ZERO)

    def valuation(self):
        """Lowest total degree with a nonzero coefficient, or None if zero."""
        if not self.coeffs:
            return None
        return min(sum(e) for e in self.coeffs)

    def _check(self, other: "Jet"):
        if self.base != other.base:
            raise ValueError("jet base points differ")

    def truncate(self, order: int) -> "Jet":
        return Jet(self.base, min(self.order, order), self.coeffs)

    def with_base(self, base) -> "Jet":
        return Jet(base, self.order, self.coeffs)

    def __add__(self, other):
        if not isinstance(other, Jet):
            other = Jet.const(self.base, self.order, other)
        self._check(other)
        order = min(self.order, other.order)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            s = out.get(e, S_ZERO) + c
            if s.is_zero():
                out.pop(e, None)
            else:
                out[e] = s
        return Jet(self.base, order, out)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.base, self.order, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, Jet):
            other = Jet.const(self.base, self.order, other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return self.scale(other)
        self._check(other)
        order = min(self.order, other.order)
        out = {}
        for ea, ca in self.coeffs.items():
            da = sum(ea)
            for eb, cb in other.coeffs.items():
                if da + sum(eb) >= order:
                    continue
                e = tuple(x + y for x, y in zip(ea, eb))
                s = out.get(e, S_ZERO) + ca * cb
                if s.is_zero():
                    out.pop(e, None)
                else:
                    out[e] = s
        return Jet(self.base, order, out)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c) -> "Jet":
        c = Scalar.coerce(c)
        return Jet(self.base, self.order, {e: cc * c for e, cc in self.coeffs.items()})

    def inverse(self) -> "Jet":
        c0 = self.constant_term()
        if c0.is_zero():
            raise NonUnitJetError("jet has no invertible constant term")
        inv0 = c0.inverse()
        # f = c0(1 - g), 1/f = (1/c0) sum g^k
        g = Jet.const(self.base, self.order, 1) - self.scale(inv0)
        out = Jet.const(self.base, self.order, 1)
        power = Jet.const(self.base, self.order, 1)
        for _ in range(1, self.order):
            power = power * g
            if power.is_zero():
                break
            out = out + power
        return out.scale(inv0)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            other = Jet.const(self.base, self.order, other)
        return self * other.inverse()

    def divide_exact(self, den: "Jet") -> "Jet":
        """Exact division by a jet vanishing at the base point.

        The divisor's lowest homogeneous part must be linear.  The result
        is valid one order lower than the inputs, recorded in its order.
        """
        self._check(den)
        if den.is_zero():
            raise ZeroDivisionError("jet division by zero")
        if not den.constant_term().is_zero():
            return (self * den.inverse()).truncate(min(self.order, den.order))
        dparts = _homog_parts(den.coeffs)
        if 1 not in dparts or min(dparts) != 1:
            raise InexactJetDivisionError("divisor valuation is not one")
        lin = dparts[1]
        order = min(self.order, den.order) - 1
        if order < 1:
            raise InexactJetDivisionError("jet order exhausted")
        rem = {e: c for e, c in self.coeffs.items() if sum(e) <= order}
        quo = {}
        while rem:
            parts = _homog_parts(rem)
            d = min(parts)
            if d > order:
                break
            if d == 0:
                raise InexactJetDivisionError("numerator not in the ideal")
            t = _divide_homog_by_linear(parts[d], lin, self.nvars)
            for e, c in t.items():
                s = quo.get(e, S_ZERO) + c
                if s.is_zero():
                    quo.pop(e, None)
                else:
                    quo[e] = s
            for et, ct in t.items():
                for ed, cd in den.coeffs.items():
                    e = tuple(x + y for x, y in zip(et, ed))
                    if sum(e) > order:
                        continue
                    s = rem.get(e, S_ZERO) - ct * cd
                    if s.is_zero():
                        rem.pop(e, None)
                    else:
                        rem[e] = s
        return Jet(self.base, order, quo)

    def substitute_var(self, i: int, series: "Jet", new_base=None) -> "Jet":
        """Substitute u_i -> series (a jet with zero constant term)."""
        if not series.constant_term().is_zero():
            raise ValueError("substituted series must vanish at the base")
        base = tuple(new_base) if new_base is not None else self.base
        order = min(self.order, series.order)
        n = self.nvars
        powers = {0: Jet.const(base, order, 1)}
        s = series.with_base(base)
        out = Jet(base, order, {})
        for e, c in self.coeffs.items():
            k = e[i - 1]
            if k not in powers:
                p = powers[max(powers)]
                for j in range(max(powers), k):
                    p = p * s
                    powers[j + 1] = p
            rest = tuple(x if idx != i - 1 else 0 for idx, x in enumerate(e))
            out = out + powers[k].scale(c) * Jet(base, order, {rest: S_ONE})
        return out

    def invert_variable(self, i: int) -> "Jet":
        """Substitute X_i -> X_i^(-1), re-expanded at the inverted base."""
        b = self.base[i - 1]
        if b.is_zero():
            raise PoleError("cannot invert a variable based at zero")
        binv = b.inverse()
        new_base = tuple(
            binv if k == i - 1 else x for k, x in enumerate(self.base)
        )
        n = self.nvars
        e_i = tuple(1 if k == i - 1 else 0 for k in range(n))
        # old u_i = X_i^{-1} - b = b * sum_{k>=1} (-b u'_i)^k
        series = {}
        sign = S_ONE
        for k in range(1, self.order):
            sign = sign * (-b)
            series[tuple(x * k for x in e_i)] = b * sign
        s = Jet(new_base, self.order, series)
        return self.with_base(new_base).substitute_var(i, s)

    def permute(self, perm, new_base=None) -> "Jet":
        """Relabel variables, position i -> perm(i) (1-based images)."""
        n = self.nvars
        base = [None] * n
        for i in range(n):
            base[perm[i] - 1] = self.base[i]
        if new_base is not None:
            base = list(new_base)
        out = {}
        for e, c in self.coeffs.items():
            ne = [0] * n
            for i, x in enumerate(e):
                ne[perm[i] - 1] = x
            out[tuple(ne)] = c
        return Jet(tuple(base), self.order, out)

    @staticmethod
    def expand_mvpoly(p, base, order: int) -> "Jet":
        """Expand an MvPoly (GaussRational coefficients) at the base point."""
        n = len(base)
        base = tuple(Scalar.coerce(b) for b in base)
        out = Jet(base, order, {})
        xs = [Jet.variable(base, order, i + 1) for i in range(n)]
        for e, c in p.terms.items():
            term = Jet.const(base, order, Scalar.from_gauss(c))
            for i, exp in enumerate(e):
                for _ in range(exp):
                    term = term * xs[i]
            out = out + term
        return out

    @staticmethod
    def expand_mvrat(r, base, order: int) -> "Jet":
        """Expand an MvRat at the base point; PoleError if not regular there."""
        num = Jet.expand_mvpoly(r.num, base, order)
        den = Jet.expand_mvpoly(r.den, base, order)
        if den.constant_term().is_zero():
            if num.is_zero():
                return num
            raise PoleError("MvRat has a pole at the base point")
        return num * den.inverse()

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        return (
            self.base == other.base
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.base, self.order, frozenset(self.coeffs.items())))

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for e in sorted(self.coeffs, key=lambda t: (sum(t), t)):
            c = self.coeffs[e]
            mono = "*".join(
                f"u{i + 1}" if x == 1 else f"u{i + 1}^{x}"
                for i, x in enumerate(e)
                if x
            )
            if mono:
                parts.append(f"({c})*{mono}")
            else:
                parts.append(f"({c})")
        return " + ".join(parts) + f" + O(u^{self.order})"

    __repr__ = __str__
