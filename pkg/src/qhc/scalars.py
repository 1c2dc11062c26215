"""Exact scalars: Gaussian rationals and the field Q(i)(q).

Two layers live here:

- GaussRational: a + b*sqrt(-1) with rational a, b.
- Scalar: a fraction of Laurent polynomials in the parameter q over
  GaussRational, kept in a canonical reduced form (monomial content cleared,
  numerator/denominator coprime, denominator monic).
"""
from __future__ import annotations

from fractions import Fraction


class GaussRational:
    """An element of Q(sqrt(-1)), stored as re + im*sqrt(-1)."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if type(re) is not Fraction:
            re = Fraction(re)
        if type(im) is not Fraction:
            im = Fraction(im)
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    def __setattr__(self, name, value):
        raise AttributeError("GaussRational is immutable")

    @staticmethod
    def coerce(v) -> "GaussRational":
        if isinstance(v, GaussRational):
            return v
        if isinstance(v, (int, Fraction)):
            return GaussRational(v)
        raise TypeError(f"cannot coerce {type(v).__name__} to GaussRational")

    def __add__(self, other):
        other = GaussRational.coerce(other)
        return GaussRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussRational.coerce(other))

    def __rsub__(self, other):
        return GaussRational.coerce(other) - self

    def __mul__(self, other):
        other = GaussRational.coerce(other)
        if not self.im and not other.im:
            return GaussRational(self.re * other.re)
        return GaussRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def inverse(self) -> "GaussRational":
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("inverse of zero GaussRational")
        return GaussRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * GaussRational.coerce(other).inverse()

    def __rtruediv__(self, other):
        return GaussRational.coerce(other) * self.inverse()

    def conjugate(self) -> "GaussRational":
        return GaussRational(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other):
        try:
            other = GaussRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return not self.is_zero()

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            if self.im == 1:
                return "i"
            if self.im == -1:
                return "-i"
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        mag = abs(self.im)
        istr = "i" if mag == 1 else f"{mag}*i"
        return f"({self.re}{sign}{istr})"

    def __repr__(self):
        return f"GaussRational({self.re!r}, {self.im!r})"


GR_ZERO = GaussRational(0)
GR_ONE = GaussRational(1)
GR_I = GaussRational(0, 1)


# ---------------------------------------------------------------------------
# Laurent polynomials in q over GaussRational, as plain dicts {exp: coeff}.
# Internal helpers; Scalar is the public face.
# ---------------------------------------------------------------------------

def lp_zero():
    return {}


def lp_const(c: GaussRational):
    c = GaussRational.coerce(c)
    return {} if c.is_zero() else {0: c}


def lp_q(exp: int = 1):
    return {exp: GR_ONE}


def lp_add(a, b):
    out = dict(a)
    for e, c in b.items():
        s = out.get(e, GR_ZERO) + c
        if s.is_zero():
            out.pop(e, None)
        else:
            out[e] = s
    return out


def lp_neg(a):
    return {e: -c for e, c in a.items()}


def lp_mul(a, b):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            s = out.get(e, GR_ZERO) + ca * cb
            if s.is_zero():
                out.pop(e, None)
            else:
                out[e] = s
    return out


def lp_scale(a, c: GaussRational):
    if c.is_zero():
        return {}
    return {e: cc * c for e, cc in a.items()}


def lp_shift(a, k: int):
    return {e + k: c for e, c in a.items()}


def lp_low(a) -> int:
    return min(a)


def lp_high(a) -> int:
    return max(a)


def lp_divmod(a, b):
    """Polynomial division (nonnegative exponents required) over Q(i)."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    rem = dict(a)
    quo = {}
    db = lp_high(b)
    lb = b[db]
    while rem and lp_high(rem) >= db:
        dr = lp_high(rem)
        c = rem[dr] / lb
        quo[dr - db] = c
        for e, cb in b.items():
            s = rem.get(e + dr - db, GR_ZERO) - c * cb
            if s.is_zero():
                rem.pop(e + dr - db, None)
            else:
                rem[e + dr - db] = s
    return quo, rem


def lp_gcd(a, b):
    """Monic gcd of two polynomials with nonnegative exponents."""
    while b:
        _, r = lp_divmod(a, b)
        a, b = b, r
    if a:
        a = lp_scale(a, a[lp_high(a)].inverse())
    return a


class Scalar:
    """An element of Q(sqrt(-1))(q) as a reduced Laurent fraction.

    Canonical form: den is an honest polynomial with nonzero constant term
    and leading coefficient 1; num is a Laurent polynomial (it carries the
    monomial content of the fraction); gcd(num shifted to a polynomial,
    den) = 1.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, _canonical=False):
        if den is None:
            den = lp_const(GR_ONE)
        if not isinstance(num, dict) or not isinstance(den, dict):
            raise TypeError("Scalar expects Laurent-poly dicts")
        if not den:
            raise ZeroDivisionError("Scalar with zero denominator")
        if not _canonical:
            num, den = self._reduce(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("Scalar is immutable")

    @staticmethod
    def _reduce(num, den):
        if not num:
            return {}, lp_const(GR_ONE)
        shift_n = lp_low(num)
        shift_d = lp_low(den)
        pn = lp_shift(num, -shift_n)
        pd = lp_shift(den, -shift_d)
        if len(pn) > 1 and len(pd) > 1:
            g = lp_gcd(pn, pd)
            if lp_high(g) > 0 or g.get(0) != GR_ONE:
                pn, _ = lp_divmod(pn, g)
                pd, _ = lp_divmod(pd, g)
        lc = pd[lp_high(pd)]
        if lc != GR_ONE:
            inv = lc.inverse()
            pn = lp_scale(pn, inv)
            pd = lp_scale(pd, inv)
        return lp_shift(pn, shift_n - shift_d), pd

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_int(n) -> "Scalar":
        return Scalar(lp_const(GaussRational(n)))

    @staticmethod
    def from_gauss(g: GaussRational) -> "Scalar":
        return Scalar(lp_const(g))

    @staticmethod
    def q_power(k: int) -> "Scalar":
        return Scalar(lp_q(k))

    @staticmethod
    def coerce(v) -> "Scalar":
        if isinstance(v, Scalar):
            return v
        if isinstance(v, GaussRational):
            return Scalar.from_gauss(v)
        if isinstance(v, (int, Fraction)):
            return Scalar(lp_const(GaussRational(v)))
        raise TypeError(f"cannot coerce {type(v).__name__} to Scalar")

    # -- arithmetic -------------------------------------------------------

    @staticmethod
    def _den_is_one(den) -> bool:
        return len(den) == 1 and den.get(0) == GR_ONE

    def __add__(self, other):
        other = Scalar.coerce(other)
        if Scalar._den_is_one(self.den) and Scalar._den_is_one(other.den):
            return Scalar(lp_add(self.num, other.num), None, _canonical=True)
        num = lp_add(lp_mul(self.num, other.den), lp_mul(other.num, self.den))
        return Scalar(num, lp_mul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return Scalar(lp_neg(self.num), self.den, _canonical=True)

    def __sub__(self, other):
        return self + (-Scalar.coerce(other))

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __mul__(self, other):
        other = Scalar.coerce(other)
        if Scalar._den_is_one(self.den) and Scalar._den_is_one(other.den):
            return Scalar(lp_mul(self.num, other.num), None, _canonical=True)
        return Scalar(lp_mul(self.num, other.num), lp_mul(self.den, other.den))

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if not self.num:
            raise ZeroDivisionError("inverse of zero Scalar")
        return Scalar(self.den, self.num)

    def __truediv__(self, other):
        return self * Scalar.coerce(other).inverse()

    def __rtruediv__(self, other):
        return Scalar.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = S_ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash(
            (frozenset(self.num.items()), frozenset(self.den.items()))
        )

    def as_gauss(self) -> GaussRational:
        """The value as a Gaussian rational; fails if q occurs."""
        if set(self.den) != {0} or any(e != 0 for e in self.num):
            raise ValueError("scalar depends on q")
        return self.num.get(0, GR_ZERO) / self.den[0]

    def subs_q(self, value: "Scalar") -> "Scalar":
        """Evaluate at q = value (value an invertible Scalar)."""
        def ev(poly):
            out = S_ZERO
            for e, c in poly.items():
                out = out + Scalar.from_gauss(c) * value ** e
            return out
        return ev(self.num) / ev(self.den)

    # -- printing ---------------------------------------------------------

    @staticmethod
    def _poly_str(poly) -> str:
        if not poly:
            return "0"
        parts = []
        for e in sorted(poly, reverse=True):
            c = poly[e]
            cs = str(c)
            if e == 0:
                parts.append(cs)
            else:
                qs = "q" if e == 1 else f"q^{e}"
                if cs == "1":
                    parts.append(qs)
                elif cs == "-1":
                    parts.append(f"-{qs}")
                else:
                    parts.append(f"{cs}*{qs}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __str__(self):
        ns = Scalar._poly_str(self.num)
        if self.den == lp_const(GR_ONE):
            return ns
        ds = Scalar._poly_str(self.den)
        if len(self.num) > 1:
            ns = f"({ns})"
        if len(self.den) > 1:
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self):
        return f"Scalar({self})"


S_ZERO = Scalar(lp_zero())
S_ONE = Scalar(lp_const(GR_ONE))
S_I = Scalar(lp_const(GR_I))
S_Q = Scalar(lp_q(1))
