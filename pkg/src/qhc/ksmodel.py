"""Localized model with formal intertwiners, used as an arithmetic oracle.

Elements live in the algebra generated by rational functions in x_1..x_n,
Clifford generators, idempotents, and symbols s_w satisfying the braid
relations exactly, with s_k^2 the central element R_{k,k+1}.  Normal form:
f * c^eta * s_w * e(nu) with f a rational function.  The defining algebra
embeds here, which gives an independent route for checking its products.
"""
from __future__ import annotations

import functools

from . import perms
from .cartan import qtilde
from .multivar import MvPoly, MvRat
from .scalars import S_ONE, Scalar


def _bivar_to_rat(bivar: MvPoly, n: int, iu: int, iv: int) -> MvRat:
    out = {}
    for (du, dv), g in bivar.terms.items():
        e = [0] * n
        e[iu - 1] += du
        e[iv - 1] += dv
        key = tuple(e)
        prev = out.get(key)
        out[key] = g if prev is None else prev + g
    return MvRat(MvPoly(n, out))


class LocalizationError(ValueError):
    """A denominator escaped the allowed multiplicative set."""


def _check_localized(den: MvPoly):
    """Verify den is a monomial times a product of (X_a +/- X_b) factors."""
    n = den.nvars
    rem = den.shift(tuple(-m for m in den.monomial_content()))
    factors = []
    for a in range(1, n + 1):
        for b in range(a + 1, n + 1):
            for sign in (-1, 1):
                xa = MvPoly.var(n, a)
                xb = MvPoly.var(n, b)
                factors.append(xa + xb.scale(sign))
    changed = True
    while changed:
        changed = False
        for f in factors:
            while True:
                try:
                    quo = rem.divide_exact(f)
                except ValueError:
                    break
                rem = quo
                changed = True
    if len(rem.terms) != 1 or any(any(e) for e in rem.terms):
        raise LocalizationError(f"denominator {den} is not localized")


def _clifford_merge(eta1, eta2):
    """Product of two ascending Clifford monomials: (sign, merged bits)."""
    word = [p for p, b in enumerate(eta1) if b] + [
        p for p, b in enumerate(eta2) if b
    ]
    sign = 1
    i = 0
    while True:
        moved = False
        for i in range(len(word) - 1):
            if word[i] > word[i + 1]:
                word[i], word[i + 1] = word[i + 1], word[i]
                sign = -sign
                moved = True
            elif word[i] == word[i + 1]:
                del word[i : i + 2]
                moved = True
                break
        if not moved:
            break
    eta = [0] * len(eta1)
    for p in word:
        eta[p] = 1
    return sign, tuple(eta)


class KSContext:
    """Shared data: datum, beta, and cached intertwiner products."""

    def __init__(self, datum, beta, n, profiles):
        self.datum = datum
        self.beta = beta
        self.n = n
        self.profiles = list(profiles)
        self.profile_set = set(self.profiles)
        self._stilde_cache = {}

    @classmethod
    def from_algebra(cls, alg) -> "KSContext":
        return cls(alg.datum, alg.beta, alg.n, alg.profiles)

    def r_value(self, k: int, mu) -> MvRat:
        """The coefficient of e(mu) in R_{k,k+1}."""
        li, lj = mu[k - 1], mu[k]
        n = self.n
        if li[0] != lj[0]:
            return _bivar_to_rat(qtilde(self.datum, li, lj), n, k, k + 1)
        out = MvRat(MvPoly(n, {}))
        xk = MvPoly.var(n, k)
        xk1 = MvPoly.var(n, k + 1)
        if li == lj:
            out = out - MvRat(MvPoly.const(n, 1), (xk - xk1) ** 2)
        if li == self.datum.j_involution(lj):
            out = out - MvRat(MvPoly.const(n, 1), (xk + xk1) ** 2)
        return out

    def stilde_times(self, word, v, nu):
        """Expand s_{word} * s_v e(nu) as {u: coefficient}, coefficients
        standing immediately left of s_u e(nu)."""
        key = (tuple(word), tuple(v), tuple(nu))
        cached = self._stilde_cache.get(key)
        if cached is not None:
            return cached
        n = self.n
        cur = {tuple(v): MvRat(MvPoly.const(n, 1))}
        for k in reversed(tuple(word)):
            sk = perms.simple(n, k)
            new = {}
            for u, h in cur.items():
                h2 = h.permute(sk)
                if perms.length(perms.compose(sk, u)) > perms.length(u):
                    u2 = perms.compose(sk, u)
                    r = None
                else:
                    u2 = perms.compose(sk, u)
                    mu = perms.act_on_profile(u2, nu)
                    r = self.r_value(k, mu)
                val = h2 if r is None else r * h2
                prev = new.get(u2)
                new[u2] = val if prev is None else prev + val
            cur = {u: h for u, h in new.items() if not h.is_zero()}
        self._stilde_cache[key] = cur
        return cur


class KSElement:
    """Sum of terms f * c^eta * s_w * e(nu); keys (eta, w, nu) -> MvRat."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: KSContext, terms):
        clean = {}
        for k, f in terms.items():
            if f.is_zero():
                continue
            _check_localized(f.den)
            clean[k] = f
        object.__setattr__(self, "ctx", ctx)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("KSElement is immutable")

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        out = dict(self.terms)
        for k, f in other.terms.items():
            prev = out.get(k)
            out[k] = f if prev is None else prev + f
        return KSElement(self.ctx, out)

    def __neg__(self):
        return KSElement(self.ctx, {k: -f for k, f in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "KSElement":
        return KSElement(self.ctx, {k: g * f for k, g in self.terms.items()})

    def left_profile(self, key):
        eta, w, nu = key
        mu = list(perms.act_on_profile(w, nu))
        for p, b in enumerate(eta):
            if b:
                mu[p] = self.ctx.datum.j_involution(mu[p])
        return tuple(mu)

    def __mul__(self, other):
        if not isinstance(other, KSElement):
            return NotImplemented
        ctx = self.ctx
        n = ctx.n
        out = {}
        lp_cache = {}
        for key2, f2 in other.terms.items():
            eta2, w2, nu2 = key2
            lp = lp_cache.get(key2)
            if lp is None:
                lp = self.left_profile(key2)
                lp_cache[key2] = lp
            for key1, f1 in self.terms.items():
                eta1, w1, nu1 = key1
                if nu1 != lp:
                    continue
                # push s_{w1} through f2 c^{eta2}
                g = f2.permute(w1)
                moved = [w1[p] for p, b in enumerate(eta2) if b]
                sign1 = _sort_sign(moved)
                eta2p = [0] * n
                for p in moved:
                    eta2p[p - 1] = 1
                # merge c^{eta1} (flips g) and c^{eta2p}
                flips = {p + 1: (p + 1, -1) for p, b in enumerate(eta1) if b}
                if flips:
                    g = g.substitute_signed(flips)
                sign2, eta3 = _clifford_merge(eta1, tuple(eta2p))
                base = f1 * g
                if sign1 * sign2 < 0:
                    base = -base
                flips3 = {p + 1: (p + 1, -1) for p, b in enumerate(eta3) if b}
                word1 = perms.canonical_word(w1)
                for u, h in ctx.stilde_times(word1, w2, nu2).items():
                    h2 = h.substitute_signed(flips3) if flips3 else h
                    k = (eta3, u, nu2)
                    val = base * h2
                    prev = out.get(k)
                    out[k] = val if prev is None else prev + val
        return KSElement(ctx, out)

    def __eq__(self, other):
        return isinstance(other, KSElement) and (self - other).is_zero()

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for (eta, w, nu), f in sorted(
            self.terms.items(), key=lambda kv: (kv[0][2], kv[0][1], kv[0][0])
        ):
            cs = "".join(f"c{p + 1}" for p, b in enumerate(eta) if b)
            bits.append(f"({f})*{cs or '1'}*s{w}*e{nu}")
        return " + ".join(bits)


def _sort_sign(values):
    vals = list(values)
    sign = 1
    for i in range(len(vals)):
        for j in range(len(vals) - 1 - i):
            if vals[j] > vals[j + 1]:
                vals[j], vals[j + 1] = vals[j + 1], vals[j]
                sign = -sign
    return sign


# -- constructors -----------------------------------------------------------

def ks_zero(ctx: KSContext) -> KSElement:
    return KSElement(ctx, {})


def ks_e(ctx: KSContext, nu) -> KSElement:
    n = ctx.n
    key = ((0,) * n, perms.identity(n), tuple(nu))
    return KSElement(ctx, {key: MvRat(MvPoly.const(n, 1))})


def ks_one(ctx: KSContext) -> KSElement:
    out = ks_zero(ctx)
    for nu in ctx.profiles:
        out = out + ks_e(ctx, nu)
    return out


def ks_x(ctx: KSContext, i: int) -> KSElement:
    n = ctx.n
    xi = MvRat(MvPoly.var(n, i))
    return KSElement(
        ctx,
        {
            ((0,) * n, perms.identity(n), nu): xi
            for nu in ctx.profiles
        },
    )


def ks_c(ctx: KSContext, i: int) -> KSElement:
    n = ctx.n
    one = MvRat(MvPoly.const(n, 1))
    terms = {}
    for nu in ctx.profiles:
        eta = [0] * n
        eta[i - 1] = 1
        terms[(tuple(eta), perms.identity(n), nu)] = one
    return KSElement(ctx, terms)


def ks_stilde(ctx: KSContext, k: int) -> KSElement:
    n = ctx.n
    one = MvRat(MvPoly.const(n, 1))
    sk = perms.simple(n, k)
    return KSElement(
        ctx, {((0,) * n, sk, nu): one for nu in ctx.profiles}
    )


def ks_rational(ctx: KSContext, f: MvRat, nu) -> KSElement:
    return KSElement(
        ctx, {((0,) * ctx.n, perms.identity(ctx.n), tuple(nu)): f}
    )


# -- the embedding ----------------------------------------------------------

def iota_sigma(ctx: KSContext, a: int) -> KSElement:
    """Image of the a-th crossing generator."""
    n = ctx.n
    datum = ctx.datum
    out = ks_zero(ctx)
    xa = MvPoly.var(n, a)
    xa1 = MvPoly.var(n, a + 1)
    one = MvPoly.const(n, 1)
    for nu in ctx.profiles:
        la, lb = nu[a - 1], nu[a]
        term = ks_stilde(ctx, a) * ks_e(ctx, nu)
        if la[0] != lb[0]:
            out = out + term
            continue
        if la == lb:
            term = term - ks_rational(ctx, MvRat(one, xa - xa1), nu)
        if la == datum.j_involution(lb):
            eta = [0] * n
            eta[a - 1] = eta[a] = 1
            cc_term = KSElement(
                ctx,
                {
                    (tuple(eta), perms.identity(n), tuple(nu)): MvRat(
                        one, xa + xa1
                    )
                },
            )
            term = term + cc_term
        out = out + term
    return out


def iota(elem) -> KSElement:
    """Embed an algebra element through its PBW word expansion."""
    from .engine import Algebra

    alg = elem.algebra
    if alg.clifford_sign != 1:
        raise ValueError("the embedding is defined on the standard algebra")
    ctx = KSContext.from_algebra(alg)
    out = ks_zero(ctx)
    sigmas = {}
    for word, coeff in elem.terms.items():
        acc = ks_e(ctx, word.nu)
        for kind, arg in reversed(Algebra.word_tokens(word)):
            if kind == "x":
                g = ks_x(ctx, arg)
            elif kind == "c":
                g = ks_c(ctx, arg)
            else:
                g = sigmas.get(arg)
                if g is None:
                    g = iota_sigma(ctx, arg)
                    sigmas[arg] = g
            acc = g * acc
        out = out + acc.scale(MvRat(MvPoly.const(ctx.n, _to_mv(coeff))))
    return out


def _to_mv(coeff: Scalar):
    """Scalar -> GaussRational, rejecting genuine q-dependence."""
    g = coeff.as_gauss()
    return g


def central_R(ctx: KSContext, a: int, b: int) -> KSElement:
    """The central element R_{a,b}, a sum over idempotent profiles."""
    if a == b:
        raise ValueError("central_R needs distinct indices")
    n = ctx.n
    datum = ctx.datum
    terms = {}
    ident = perms.identity(n)
    for nu in ctx.profiles:
        la, lb = nu[a - 1], nu[b - 1]
        if la[0] != lb[0]:
            f = _bivar_to_rat(qtilde(datum, la, lb), n, a, b)
        else:
            f = MvRat(MvPoly(n, {}))
            xa = MvPoly.var(n, a)
            xb = MvPoly.var(n, b)
            if la == lb:
                f = f - MvRat(MvPoly.const(n, 1), (xa - xb) ** 2)
            if la == datum.j_involution(lb):
                f = f - MvRat(MvPoly.const(n, 1), (xa + xb) ** 2)
        if not f.is_zero():
            terms[((0,) * n, ident, nu)] = f
    return KSElement(ctx, terms)


def derive_relation(alg, tokens, nu=None) -> KSElement:
    """Expand a generator word over the faithful model.

    tokens is a list of ("x", i) / ("c", i) / ("s", k) pairs, multiplied
    left to right; nu optionally restricts to a single idempotent.  Used at
    build time to settle borderline relation readings.
    """
    ctx = KSContext.from_algebra(alg)
    acc = ks_e(ctx, nu) if nu is not None else ks_one(ctx)
    sigmas = {}
    for kind, arg in reversed(list(tokens)):
        if kind == "x":
            g = ks_x(ctx, arg)
        elif kind == "c":
            g = ks_c(ctx, arg)
        elif kind == "s":
            g = sigmas.get(arg)
            if g is None:
                g = iota_sigma(ctx, arg)
                sigmas[arg] = g
        else:
            raise ValueError(f"unknown generator kind {kind!r}")
        acc = g * acc
    return acc


def oracle_equal(e1, e2) -> bool:
    """Exact equality check of two algebra elements via the embedding."""
    return (iota(e1) - iota(e2)).is_zero()
