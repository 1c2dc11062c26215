"""Sparse multivariate polynomials and lazily-unreduced fractions.

MvPoly is a polynomial in commuting variables X_1..X_n over GaussRational.
MvRat is a fraction of two MvPoly with equality decided by cross
multiplication; only common monomial content is cleared, full multivariate
gcd is deliberately avoided.
"""
from __future__ import annotations

from .scalars import GR_ONE, GR_ZERO, GaussRational


class MvPoly:
    """Sparse polynomial; terms maps exponent tuples to GaussRational."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms=None):
        clean = {}
        for e, c in (terms or {}).items():
            c = GaussRational.coerce(c)
            if not c.is_zero():
                if len(e) != nvars:
                    raise ValueError("exponent arity mismatch")
                clean[tuple(e)] = c
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("MvPoly is immutable")

    @staticmethod
    def const(nvars: int, c) -> "MvPoly":
        return MvPoly(nvars, {(0,) * nvars: GaussRational.coerce(c)})

    @staticmethod
    def var(nvars: int, i: int, exp: int = 1) -> "MvPoly":
        """The variable X_i (1-based)."""
        e = [0] * nvars
        e[i - 1] = exp
        return MvPoly(nvars, {tuple(e): GR_ONE})

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other):
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")

    def __add__(self, other):
        other = self._coerce(other)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, GR_ZERO) + c
            if s.is_zero():
                out.pop(e, None)
            else:
                out[e] = s
        return MvPoly(self.nvars, out)

    def _coerce(self, other):
        if isinstance(other, MvPoly):
            return other
        return MvPoly.const(self.nvars, other)

    def __neg__(self):
        return MvPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        other = self._coerce(other)
        self._check(other)
        out = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                s = out.get(e, GR_ZERO) + ca * cb
                if s.is_zero():
                    out.pop(e, None)
                else:
                    out[e] = s
        return MvPoly(self.nvars, out)

    __rmul__ = __mul__

    def scale(self, c) -> "MvPoly":
        c = GaussRational.coerce(c)
        return MvPoly(self.nvars, {e: cc * c for e, cc in self.terms.items()})

    def __pow__(self, k: int):
        out = MvPoly.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, MvPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def monomial_content(self):
        """Componentwise-minimal exponent over the support (zero poly -> 0s)."""
        if not self.terms:
            return (0,) * self.nvars
        mins = [None] * self.nvars
        for e in self.terms:
            for i, x in enumerate(e):
                if mins[i] is None or x < mins[i]:
                    mins[i] = x
        return tuple(mins)

    def shift(self, delta) -> "MvPoly":
        """Multiply by the (possibly negative-exponent) monomial X^delta.

        Requires the result to stay polynomial.
        """
        out = {}
        for e, c in self.terms.items():
            ne = tuple(x + d for x, d in zip(e, delta))
            if any(x < 0 for x in ne):
                raise ValueError("shift leaves the polynomial ring")
            out[ne] = c
        return MvPoly(self.nvars, out)

    def substitute(self, mapping) -> "MvPoly":
        """Replace each variable by a polynomial; mapping is 1-based index -> MvPoly."""
        out = MvPoly.const(self.nvars, 0)
        for e, c in self.terms.items():
            term = MvPoly.const(self.nvars, c)
            for i, exp in enumerate(e):
                if exp == 0:
                    continue
                target = mapping.get(i + 1)
                if target is None:
                    target = MvPoly.var(self.nvars, i + 1)
                term = term * target ** exp
            out = out + term
        return out

    def permute(self, perm) -> "MvPoly":
        """Apply a position permutation to the variables: X_i -> X_{perm(i)}.

        perm is a tuple with perm[i-1] = image of i (1-based values).
        """
        out = {}
        for e, c in self.terms.items():
            ne = [0] * self.nvars
            for i, x in enumerate(e):
                ne[perm[i] - 1] = x
            out[tuple(ne)] = c
        return MvPoly(self.nvars, out)

    def divide_exact(self, d: "MvPoly") -> "MvPoly":
        """Exact division via lex-ordered reduction; raises if not exact."""
        self._check(d)
        if d.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        lead = max(d.terms)
        lc = d.terms[lead]
        rem = dict(self.terms)
        quo = {}
        while rem:
            e = max(rem)
            diff = tuple(x - y for x, y in zip(e, lead))
            if any(x < 0 for x in diff):
                raise ValueError("polynomial division is not exact")
            c = rem[e] / lc
            quo[diff] = quo.get(diff, GR_ZERO) + c
            for ed, cd in d.terms.items():
                t = tuple(x + y for x, y in zip(ed, diff))
                s = rem.get(t, GR_ZERO) - c * cd
                if s.is_zero():
                    rem.pop(t, None)
                else:
                    rem[t] = s
        return MvPoly(self.nvars, quo)

    def evaluate(self, values):
        """Full evaluation; values is a list of GaussRational, 1-based order."""
        out = GR_ZERO
        for e, c in self.terms.items():
            term = c
            for i, exp in enumerate(e):
                for _ in range(exp):
                    term = term * values[i]
            out = out + term
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            factors = []
            for i, exp in enumerate(e):
                if exp == 1:
                    factors.append(f"X{i + 1}")
                elif exp > 1:
                    factors.append(f"X{i + 1}^{exp}")
            cs = str(c)
            if not factors:
                parts.append(cs)
            elif cs == "1":
                parts.append("*".join(factors))
            elif cs == "-1":
                parts.append("-" + "*".join(factors))
            else:
                parts.append(cs + "*" + "*".join(factors))
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    __repr__ = __str__


class MvRat:
    """Fraction of MvPoly, lazily unreduced except for monomial content."""

    __slots__ = ("num", "den")

    def __init__(self, num: MvPoly, den: MvPoly | None = None):
        if den is None:
            den = MvPoly.const(num.nvars, 1)
        if den.is_zero():
            raise ZeroDivisionError("MvRat with zero denominator")
        if num.is_zero():
            den = MvPoly.const(num.nvars, 1)
        else:
            cn = num.monomial_content()
            cd = den.monomial_content()
            common = tuple(-min(a, b) for a, b in zip(cn, cd))
            if any(common):
                num = num.shift(common)
                den = den.shift(common)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("MvRat is immutable")

    @staticmethod
    def const(nvars: int, c) -> "MvRat":
        return MvRat(MvPoly.const(nvars, c))

    @staticmethod
    def var(nvars: int, i: int) -> "MvRat":
        return MvRat(MvPoly.var(nvars, i))

    @staticmethod
    def from_poly(p: MvPoly) -> "MvRat":
        return MvRat(p)

    @property
    def nvars(self):
        return self.num.nvars

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self):
        return not self.is_zero()

    def _coerce(self, other):
        if isinstance(other, MvRat):
            return other
        if isinstance(other, MvPoly):
            return MvRat(other)
        return MvRat.const(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        if self.den == other.den:
            return MvRat(self.num + other.num, self.den)
        return MvRat(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return MvRat(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return MvRat(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def scale(self, c) -> "MvRat":
        return MvRat(self.num.scale(c), self.den)

    def inverse(self) -> "MvRat":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero MvRat")
        return MvRat(self.den, self.num)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = MvRat.const(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, MvPoly)):
            other = self._coerce(other)
        if not isinstance(other, MvRat):
            return NotImplemented
        return (self.num * other.den) == (other.num * self.den)

    def __hash__(self):
        # Hash only the zero/nonzero split to stay consistent with the
        # cross-multiplication equality; MvRat is not meant for dict keys.
        return hash((self.nvars, self.is_zero()))

    def substitute_signed(self, mapping) -> "MvRat":
        """Apply X_i -> +/- X_j substitutions given as {i: (j, sign)}."""
        polys = {}
        for i, (j, sign) in mapping.items():
            p = MvPoly.var(self.nvars, j)
            polys[i] = p if sign > 0 else -p
        return MvRat(self.num.substitute(polys), self.den.substitute(polys))

    def substitute_poly(self, mapping) -> "MvRat":
        return MvRat(self.num.substitute(mapping), self.den.substitute(mapping))

    def invert_variable(self, i: int) -> "MvRat":
        """Substitute X_i -> X_i^(-1), clearing denominators."""
        dn = max((e[i - 1] for e in self.num.terms), default=0)
        dd = max((e[i - 1] for e in self.den.terms), default=0)
        d = max(dn, dd)

        def flip(p: MvPoly) -> MvPoly:
            out = {}
            for e, c in p.terms.items():
                ne = list(e)
                ne[i - 1] = d - ne[i - 1]
                out[tuple(ne)] = c
            return MvPoly(p.nvars, out)

        return MvRat(flip(self.num), flip(self.den))

    def permute(self, perm) -> "MvRat":
        return MvRat(self.num.permute(perm), self.den.permute(perm))

    def __str__(self):
        if self.den == MvPoly.const(self.nvars, 1):
            return str(self.num)
        return f"({self.num})/({self.den})"

    __repr__ = __str__
