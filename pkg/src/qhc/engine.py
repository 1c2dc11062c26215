"""The quiver Hecke-Clifford superalgebra with PBW normal-form arithmetic.

Elements are linear combinations of PBW words x^a c^eta sigma_w e(nu) with
sigma_w expanded along the globally fixed staircase reduced word of w.
Multiplication straightens token words by the defining relations; braid
defects are resolved along explicit move paths between reduced words.
"""
from __future__ import annotations

from collections import namedtuple

from . import perms
from .cartan import (
    enumerate_sequences,
    height,
    profile_root,
    qtilde,
)
from .multivar import MvPoly
from .scalars import S_I, S_ONE, S_ZERO, Scalar

PBWWord = namedtuple("PBWWord", ["a", "eta", "w", "nu"])


def _bivar_subst(bivar: MvPoly, n: int, iu: int, iv: int, neg_u=False) -> MvPoly:
    """Substitute u -> (+/-)X_iu, v -> X_iv into a 2-variable polynomial."""
    out = {}
    for (du, dv), g in bivar.terms.items():
        e = [0] * n
        e[iu - 1] += du
        e[iv - 1] += dv
        if neg_u and du % 2:
            g = -g
        key = tuple(e)
        prev = out.get(key)
        out[key] = g if prev is None else prev + g
    return MvPoly(n, out)


class Algebra:
    """Context object: datum, weight beta, and the Clifford square sign.

    clifford_sign is +1 for the standard algebra (c_p^2 = 1) and -1 for
    the opposite-sign variant appearing as the codomain of psi.
    """

    def __init__(self, datum, beta, clifford_sign: int = 1):
        self.datum = datum
        self.beta = dict(beta)
        self.n = height(beta)
        self.clifford_sign = clifford_sign
        self.profiles = enumerate_sequences(datum, beta)
        self.profile_index = {nu: i for i, nu in enumerate(self.profiles)}
        self._nf_cache = {}

    def __eq__(self, other):
        return (
            isinstance(other, Algebra)
            and self.datum is other.datum
            and self.beta == other.beta
            and self.clifford_sign == other.clifford_sign
        )

    def compatible(self, other: "Algebra") -> bool:
        return self == other

    # -- element constructors --------------------------------------------

    def element(self, terms) -> "AlgebraElement":
        return AlgebraElement(self, terms)

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, {})

    def one(self) -> "AlgebraElement":
        return AlgebraElement(
            self,
            {
                self._word((0,) * self.n, (0,) * self.n, perms.identity(self.n), nu): S_ONE
                for nu in self.profiles
            },
        )

    def _word(self, a, eta, w, nu) -> PBWWord:
        if nu not in self.profile_index:
            raise ValueError(f"profile {nu} not in J^beta")
        return PBWWord(tuple(a), tuple(eta), tuple(w), tuple(nu))

    def e(self, nu) -> "AlgebraElement":
        nu = tuple(nu)
        z = (0,) * self.n
        return AlgebraElement(
            self, {self._word(z, z, perms.identity(self.n), nu): S_ONE}
        )

    def x(self, i: int) -> "AlgebraElement":
        z = (0,) * self.n
        terms = {}
        for nu in self.profiles:
            a = list(z)
            a[i - 1] = 1
            terms[self._word(a, z, perms.identity(self.n), nu)] = S_ONE
        return AlgebraElement(self, terms)

    def c(self, i: int) -> "AlgebraElement":
        z = (0,) * self.n
        terms = {}
        for nu in self.profiles:
            eta = list(z)
            eta[i - 1] = 1
            terms[self._word(z, eta, perms.identity(self.n), nu)] = S_ONE
        return AlgebraElement(self, terms)

    def sigma(self, k: int) -> "AlgebraElement":
        z = (0,) * self.n
        w = perms.simple(self.n, k)
        terms = {self._word(z, z, w, nu): S_ONE for nu in self.profiles}
        return AlgebraElement(self, terms)

    def generator(self, kind: str, idx, nu=None) -> "AlgebraElement":
        if kind == "e":
            return self.e(idx)
        g = {"x": self.x, "c": self.c, "s": self.sigma}[kind](idx)
        if nu is not None:
            g = g * self.e(nu)
        return g

    # -- profile bookkeeping ---------------------------------------------

    def _token_profile_action(self, token, mu):
        kind, arg = token
        if kind == "s":
            out = list(mu)
            out[arg - 1], out[arg] = out[arg], out[arg - 1]
            return tuple(out)
        if kind == "c":
            out = list(mu)
            out[arg - 1] = self.datum.j_involution(out[arg - 1])
            return tuple(out)
        return mu

    def _profile_right_of(self, tokens, pos, nu):
        """Profile seen by the token at pos-1..: fold tokens[pos:] onto nu."""
        mu = tuple(nu)
        for t in reversed(tokens[pos:]):
            mu = self._token_profile_action(t, mu)
        return mu

    def left_profile(self, word: PBWWord):
        mu = word.nu
        mu = perms.act_on_profile(word.w, mu)
        for p in range(self.n, 0, -1):
            if word.eta[p - 1]:
                out = list(mu)
                out[p - 1] = self.datum.j_involution(out[p - 1])
                mu = tuple(out)
        return mu

    # -- straightening core ----------------------------------------------

    @staticmethod
    def word_tokens(word: PBWWord):
        toks = []
        for i, m in enumerate(word.a):
            toks.extend([("x", i + 1)] * m)
        for i, b in enumerate(word.eta):
            if b:
                toks.append(("c", i + 1))
        for k in perms.canonical_word(word.w):
            toks.append(("s", k))
        return tuple(toks)

    def nf(self, tokens, nu):
        """Normal form of (token product) e(nu) as a word -> Scalar dict."""
        key = (tuple(tokens), tuple(nu))
        cached = self._nf_cache.get(key)
        if cached is not None:
            return dict(cached)
        result = {}
        work = [(S_ONE, list(tokens))]
        while work:
            coeff, toks = work.pop()
            progressed = self._nf_step(coeff, toks, nu, work, result)
            del progressed
        result = {w: c for w, c in result.items() if not c.is_zero()}
        self._nf_cache[key] = dict(result)
        return result

    def _nf_step(self, coeff, toks, nu, work, result):
        datum = self.datum
        # pairwise bubble rules
        for i in range(len(toks) - 1):
            (ka, aa), (kb, ab) = toks[i], toks[i + 1]
            if ka == "c" and kb == "x":
                sign = -1 if aa == ab else 1
                toks[i], toks[i + 1] = toks[i + 1], toks[i]
                work.append((coeff * sign, toks))
                return True
            if ka == "s" and kb == "c":
                p = ab
                sp = aa if p == aa + 1 else (aa + 1 if p == aa else p)
                toks[i], toks[i + 1] = ("c", sp), ("s", aa)
                work.append((coeff, toks))
                return True
            if ka == "s" and kb == "x":
                k, p = aa, ab
                if p not in (k, k + 1):
                    toks[i], toks[i + 1] = toks[i + 1], toks[i]
                    work.append((coeff, toks))
                    return True
                mu = self._profile_right_of(toks, i + 2, nu)
                la, lb = mu[k - 1], mu[k]
                eq = la == lb
                ceq = la == datum.j_involution(lb)
                rest_pre, rest_post = toks[:i], toks[i + 2:]
                # Clifford-pair corrections flip sign in the opposite-sign
                # algebra (substitute c = sqrt(-1) c' to see this)
                csgn = self.clifford_sign
                if p == k + 1:
                    main = rest_pre + [("x", k), ("s", k)] + rest_post
                    work.append((coeff, main))
                    if eq:
                        work.append((coeff, rest_pre + rest_post))
                    if ceq:
                        work.append(
                            (
                                -coeff * csgn,
                                rest_pre + [("c", k), ("c", k + 1)] + rest_post,
                            )
                        )
                else:
                    main = rest_pre + [("x", k + 1), ("s", k)] + rest_post
                    work.append((coeff, main))
                    if eq:
                        work.append((-coeff, rest_pre + rest_post))
                    if ceq:
                        work.append(
                            (
                                -coeff * csgn,
                                rest_pre + [("c", k), ("c", k + 1)] + rest_post,
                            )
                        )
                return True
            if ka == "x" and kb == "x" and aa > ab:
                toks[i], toks[i + 1] = toks[i + 1], toks[i]
                work.append((coeff, toks))
                return True
            if ka == "c" and kb == "c":
                if aa > ab:
                    toks[i], toks[i + 1] = toks[i + 1], toks[i]
                    work.append((-coeff, toks))
                    return True
                if aa == ab:
                    sign = self.clifford_sign
                    work.append((coeff * sign, toks[:i] + toks[i + 2:]))
                    return True
        # tokens are now sorted x* c* s*; treat the s-suffix
        soff = 0
        while soff < len(toks) and toks[soff][0] != "s":
            soff += 1
        letters = tuple(t[1] for t in toks[soff:])
        # locate the first length drop
        w = perms.identity(self.n)
        drop = None
        for j, k in enumerate(letters):
            if perms.descends_right(w, k):
                drop = j
                break
            w = perms.compose(w, perms.simple(self.n, k))
        if drop is None:
            target = perms.canonical_word(w)
            if letters == target:
                self._emit(coeff, toks, soff, w, nu, result)
                return False
            steps = perms.word_path(letters, target)
            self._apply_move(coeff, toks, soff, 0, steps[0], nu, work)
            return True
        if drop > 0 and letters[drop - 1] == letters[drop]:
            # adjacent square: (RC8)
            k = letters[drop]
            mu = self._profile_right_of(toks, soff + drop + 1, nu)
            qt = qtilde(self.datum, mu[k - 1], mu[k])
            poly = _bivar_subst(qt, self.n, k, k + 1)
            pre = toks[: soff + drop - 1]
            post = toks[soff + drop + 1:]
            self._push_poly_terms(coeff, poly, pre, post, work)
            return True
        # rewrite the reduced prefix to end with the dropped letter
        prefix = letters[:drop]
        k = letters[drop]
        u = perms.from_word(self.n, prefix)
        target = perms.canonical_word(perms.compose(u, perms.simple(self.n, k))) + (k,)
        steps = perms.word_path(prefix, target)
        self._apply_move(coeff, toks, soff, 0, steps[0], nu, work)
        return True

    def _apply_move(self, coeff, toks, soff, base, step, nu, work):
        """Apply one commutation/braid move to the s-subword."""
        kind, pos, _after = step
        i = soff + base + pos
        if kind == "c":
            toks[i], toks[i + 1] = toks[i + 1], toks[i]
            work.append((coeff, toks))
            return
        a = toks[i][1]
        b = toks[i + 1][1]
        m = min(a, b)
        # old triple is (a, b, a); direction fixes the correction sign
        direction = 1 if a == m + 1 else -1
        mu = self._profile_right_of(toks, i + 3, nu)
        corr = self._braid_defect(m, mu)
        new = [("s", b), ("s", a), ("s", b)]
        main = toks[:i] + new + toks[i + 3:]
        work.append((coeff, main))
        sign = S_ONE if direction == 1 else -S_ONE
        for poly, cliff in self._braid_defect(m, mu):
            self._push_poly_terms(
                coeff * sign, poly, toks[:i], cliff + toks[i + 3:], work
            )

    def _braid_defect(self, m: int, mu):
        """The braid correction at slots (m, m+1, m+2): difference quotients
        of the Q polynomial, the c-conjugate branch carrying c_m c_{m+2}.

        Returns a list of (polynomial, clifford token) parts; the polynomial
        stands to the left of the clifford factor.
        """
        datum = self.datum
        la, lmid, lc = mu[m - 1], mu[m], mu[m + 1]
        parts = []
        if la != lc and la != datum.j_involution(lc):
            return parts
        qt = qtilde(datum, la, lmid)
        n = self.n
        hi = _bivar_subst(qt, n, m + 2, m + 1)
        if la == lc:
            lo = _bivar_subst(qt, n, m, m + 1)
            den = MvPoly.var(n, m + 2) - MvPoly.var(n, m)
            poly = (hi - lo).divide_exact(den)
            if not poly.is_zero():
                parts.append((poly, []))
        if la == datum.j_involution(lc):
            lo = _bivar_subst(qt, n, m, m + 1, neg_u=True)
            den = MvPoly.var(n, m + 2) + MvPoly.var(n, m)
            poly = (hi - lo).divide_exact(den)
            if self.clifford_sign < 0:
                poly = -poly
            if not poly.is_zero():
                parts.append((poly, [("c", m), ("c", m + 2)]))
        return parts

    def _push_poly_terms(self, coeff, poly: MvPoly, pre, post, work):
        for e, g in poly.terms.items():
            toks = list(pre)
            for i, m in enumerate(e):
                toks.extend([("x", i + 1)] * m)
            toks.extend(post)
            work.append((coeff * Scalar.from_gauss(g), toks))

    def _emit(self, coeff, toks, soff, w, nu, result):
        a = [0] * self.n
        eta = [0] * self.n
        for kind, arg in toks[:soff]:
            if kind == "x":
                a[arg - 1] += 1
            else:
                eta[arg - 1] = 1
        word = self._word(a, eta, w, nu)
        s = result.get(word, S_ZERO) + coeff
        if s.is_zero():
            result.pop(word, None)
        else:
            result[word] = s

    # -- grading ----------------------------------------------------------

    def word_degree(self, word: PBWWord) -> int:
        deg = 2 * sum(word.a)
        for i, j in perms.inversion_pairs(word.w):
            deg -= self.datum.a(word.nu[i - 1][0], word.nu[j - 1][0])
        return deg

    @staticmethod
    def word_parity(word: PBWWord) -> int:
        return sum(word.eta) % 2


class AlgebraElement:
    __slots__ = ("algebra", "terms")

    def __init__(self, algebra: Algebra, terms):
        clean = {}
        for w, c in terms.items():
            c = Scalar.coerce(c)
            if not c.is_zero():
                clean[w] = c
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def _check(self, other):
        if not self.algebra.compatible(other.algebra):
            raise ValueError("algebra mismatch")

    def __add__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = out.get(w, S_ZERO) + c
            if s.is_zero():
                out.pop(w, None)
            else:
                out[w] = s
        return AlgebraElement(self.algebra, out)

    def __neg__(self):
        return AlgebraElement(self.algebra, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "AlgebraElement":
        c = Scalar.coerce(c)
        return AlgebraElement(
            self.algebra, {w: cc * c for w, cc in self.terms.items()}
        )

    def __mul__(self, other):
        if isinstance(other, (int, Scalar)):
            return self.scale(other)
        self._check(other)
        alg = self.algebra
        out = {}
        for w2, c2 in other.terms.items():
            left = alg.left_profile(w2)
            toks2 = Algebra.word_tokens(w2)
            for w1, c1 in self.terms.items():
                if w1.nu != left:
                    continue
                nf = alg.nf(Algebra.word_tokens(w1) + toks2, w2.nu)
                cc = c1 * c2
                for w, c in nf.items():
                    s = out.get(w, S_ZERO) + cc * c
                    if s.is_zero():
                        out.pop(w, None)
                    else:
                        out[w] = s
        return AlgebraElement(alg, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Scalar)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        out = self.algebra.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.algebra.compatible(other.algebra) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def degree_parity(self):
        """(degree, parity), either possibly the string "inhomogeneous"."""
        degs = {self.algebra.word_degree(w) for w in self.terms}
        pars = {Algebra.word_parity(w) for w in self.terms}
        deg = degs.pop() if len(degs) == 1 else ("inhomogeneous" if degs else 0)
        par = pars.pop() if len(pars) == 1 else ("inhomogeneous" if pars else 0)
        return deg, par

    def sorted_terms(self):
        return sorted(
            self.terms.items(), key=lambda kv: (kv[0].nu, kv[0].w, kv[0].a, kv[0].eta)
        )

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for word, coeff in self.sorted_terms():
            factors = []
            for i, m in enumerate(word.a):
                if m == 1:
                    factors.append(f"x{i + 1}")
                elif m > 1:
                    factors.append(f"x{i + 1}^{m}")
            for i, b in enumerate(word.eta):
                if b:
                    factors.append(f"c{i + 1}")
            for k in perms.canonical_word(word.w):
                factors.append(f"s{k}")
            factors.append(
                "e(" + ",".join(f"{n}:{e}" for n, e in word.nu) + ")"
            )
            cs = str(coeff)
            if cs == "1":
                parts.append("*".join(factors))
            elif cs == "-1":
                parts.append("-" + "*".join(factors))
            else:
                if ("+" in cs[1:] or "-" in cs[1:] or "/" in cs) and not (
                    cs.startswith("(") and cs.endswith(")")
                ):
                    cs = f"({cs})"
                parts.append(cs + "*" + "*".join(factors))
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    __repr__ = __str__


# ---------------------------------------------------------------------------
# Distinguished elements
# ---------------------------------------------------------------------------

def block_idempotent(alg: Algebra, beta1, beta2) -> AlgebraElement:
    """e(beta1, beta2): sum of e(nu) with nu splitting as J^b1 * J^b2."""
    n1 = height(beta1)
    b1 = dict(beta1)
    b2 = dict(beta2)
    terms = {}
    z = (0,) * alg.n
    ident = perms.identity(alg.n)
    for nu in alg.profiles:
        if profile_root(nu[:n1]) == b1 and profile_root(nu[n1:]) == b2:
            terms[alg._word(z, z, ident, nu)] = S_ONE
    return AlgebraElement(alg, terms)


def dagger_idempotent(alg: Algebra) -> AlgebraElement:
    terms = {}
    z = (0,) * alg.n
    ident = perms.identity(alg.n)
    for nu in alg.profiles:
        if all(eps == 0 for _, eps in nu):
            terms[alg._word(z, z, ident, nu)] = S_ONE
    return AlgebraElement(alg, terms)


def intertwiner(alg: Algebra, a: int) -> AlgebraElement:
    """The intertwiner phi_a, assembled per idempotent profile."""
    datum = alg.datum
    out = alg.zero()
    sig = alg.sigma(a)
    xa = alg.x(a)
    for nu in alg.profiles:
        la, lb = nu[a - 1], nu[a]
        e = alg.e(nu)
        if la[0] != lb[0]:
            out = out + sig * e
        elif datum.is_jc(la):
            out = out + (sig * xa * xa - xa * xa * sig) * e
        elif la == lb:
            sign = -S_ONE if la[1] else S_ONE
            out = out + ((sig * xa - xa * sig) * e).scale(sign)
        elif la == datum.j_involution(lb):
            sign = -S_ONE if la[1] else S_ONE
            out = out + ((sig * xa + xa * sig) * e).scale(sign)
        # distinct labels over the same node cannot occur beyond these cases
    return out


def intertwiner_w(alg: Algebra, w, word=None) -> AlgebraElement:
    if word is None:
        word = perms.canonical_word(tuple(w))
    out = alg.one()
    for a in word:
        out = out * intertwiner(alg, a)
    return out


def p_central(alg: Algebra, node: int) -> AlgebraElement:
    """The central element attached to a node: signed x's over its slots."""
    exp = 2 if alg.datum.parity(node) else 1
    terms = {}
    ident = perms.identity(alg.n)
    z = (0,) * alg.n
    for nu in alg.profiles:
        a = [0] * alg.n
        sign = S_ONE
        for slot, (nd, eps) in enumerate(nu):
            if nd == node:
                a[slot] += exp
                if eps and exp % 2:
                    sign = -sign
        terms[alg._word(a, z, ident, nu)] = sign
    return AlgebraElement(alg, terms)


def psi(elem: AlgebraElement, target: Algebra | None = None) -> AlgebraElement:
    """The antiautomorphism: reverses words, fixes e, x, sigma, and sends
    c_i to -sqrt(-1) c_i; lands in the opposite-Clifford-sign algebra."""
    alg = elem.algebra
    if target is None:
        target = Algebra(alg.datum, alg.beta, -alg.clifford_sign)
    out = target.zero()
    for word, coeff in elem.terms.items():
        m = sum(word.eta)
        factor = (-S_I) ** m if m else S_ONE
        acc = target.e(word.nu)
        toks = Algebra.word_tokens(word)
        for kind, arg in reversed(toks):
            if kind == "x":
                acc = acc * target.x(arg)
            elif kind == "c":
                acc = acc * target.c(arg)
            else:
                acc = acc * target.sigma(arg)
        out = out + acc.scale(coeff * factor)
    return out


# ---------------------------------------------------------------------------
# Coset normal form
# ---------------------------------------------------------------------------

class TensorElement:
    """An element of RC_{beta1} (x) RC_{beta2}: pairs of PBW words."""

    __slots__ = ("alg1", "alg2", "terms")

    def __init__(self, alg1: Algebra, alg2: Algebra, terms):
        clean = {}
        for k, c in terms.items():
            c = Scalar.coerce(c)
            if not c.is_zero():
                clean[k] = c
        object.__setattr__(self, "alg1", alg1)
        object.__setattr__(self, "alg2", alg2)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("TensorElement is immutable")

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return (
            isinstance(other, TensorElement)
            and self.terms == other.terms
        )

    def __repr__(self):
        return " + ".join(
            f"({c})*[{w1}|{w2}]" for (w1, w2), c in self.terms.items()
        ) or "0"


def tensor_embed(big: Algebra, t: TensorElement) -> AlgebraElement:
    """The parabolic inclusion RC_{b1} (x) RC_{b2} -> RC_{b1+b2}."""
    n1 = t.alg1.n
    terms = {}
    for (w1, w2), c in t.terms.items():
        a = w1.a + w2.a
        eta = w1.eta + w2.eta
        w = tuple(w1.w) + tuple(x + n1 for x in w2.w)
        nu = w1.nu + w2.nu
        word = big._word(a, eta, w, nu)
        terms[word] = terms.get(word, S_ZERO) + c
    return AlgebraElement(big, terms)


def _sort_sign(values) -> int:
    vals = list(values)
    sign = 1
    for i in range(len(vals)):
        for j in range(len(vals) - 1 - i):
            if vals[j] > vals[j + 1]:
                vals[j], vals[j + 1] = vals[j + 1], vals[j]
                sign = -sign
    return sign


def left_coset_normal_form(elem: AlgebraElement, beta1, beta2):
    """Decompose e = sum_w sigma_w . (t_w) over minimal coset reps.

    Requires e to be right-stable under e(beta1, beta2).  Returns a list of
    (w, TensorElement) pairs; round-tripping through tensor_embed and
    multiplication recovers e.
    """
    alg = elem.algebra
    n1, n2 = height(beta1), height(beta2)
    alg1 = Algebra(alg.datum, beta1, alg.clifford_sign)
    alg2 = Algebra(alg.datum, beta2, alg.clifford_sign)
    eb = block_idempotent(alg, beta1, beta2)
    if (elem * eb).terms != elem.terms:
        raise ValueError("element is not right-stable under e(beta1,beta2)")
    rem = dict(elem.terms)
    out = {}
    guard = 0
    while rem:
        guard += 1
        if guard > 10000:
            raise RuntimeError("coset normal form failed to terminate")
        wc_best = max(
            (perms.coset_factorize(w.w, n1)[0] for w in rem),
            key=lambda wc: (perms.length(wc), wc),
        )
        batch = {}
        for word, coeff in list(rem.items()):
            wc, wp = perms.coset_factorize(word.w, n1)
            if wc != wc_best:
                continue
            b = tuple(word.a[wc[i] - 1] for i in range(alg.n))
            theta = tuple(word.eta[wc[i] - 1] for i in range(alg.n))
            nu = word.nu
            csign = _sort_sign(
                [perms.inverse(wc)[j - 1] for j in range(1, alg.n + 1) if word.eta[j - 1]]
            )
            w1 = alg1._word(
                b[:n1], theta[:n1], wp[:n1], nu[:n1]
            )
            w2 = alg2._word(
                b[n1:],
                theta[n1:],
                tuple(x - n1 for x in wp[n1:]),
                nu[n1:],
            )
            key = (w1, w2)
            batch[key] = batch.get(key, S_ZERO) + coeff * (
                S_ONE if csign > 0 else -S_ONE
            )
        if wc_best in out:
            merged = dict(out[wc_best].terms)
            for k, c in batch.items():
                s = merged.get(k, S_ZERO) + c
                merged[k] = s
            t = TensorElement(alg1, alg2, merged)
        else:
            t = TensorElement(alg1, alg2, batch)
        out[wc_best] = t
        t = TensorElement(alg1, alg2, batch)
        sigma_wc = AlgebraElement(
            alg,
            {
                alg._word((0,) * alg.n, (0,) * alg.n, wc_best, nu): S_ONE
                for nu in alg.profiles
            },
        )
        recon = sigma_wc * tensor_embed(alg, t)
        for word, coeff in recon.terms.items():
            s = rem.get(word, S_ZERO) - coeff
            if s.is_zero():
                rem.pop(word, None)
            else:
                rem[word] = s
    return sorted(out.items(), key=lambda kv: kv[0])


# ---------------------------------------------------------------------------
# Relation suite
# ---------------------------------------------------------------------------

def check_relations(alg: Algebra, verbose: bool = False):
    """Evaluate every defining relation instance through multiplication.

    Returns a list of (name, detail, ok) triples.
    """
    n = alg.n
    datum = alg.datum
    report = []

    def rec(name, detail, lhs, rhs):
        report.append((name, detail, (lhs - rhs).is_zero()))

    one = alg.one()
    total = alg.zero()
    for nu in alg.profiles:
        total = total + alg.e(nu)
    rec("RC1", "sum of idempotents", total, one)
    for nu in alg.profiles:
        for mu in alg.profiles:
            expect = alg.e(nu) if nu == mu else alg.zero()
            rec("RC1", f"e{mu}e{nu}", alg.e(mu) * alg.e(nu), expect if nu == mu else alg.zero())
    for p in range(1, n + 1):
        for nu in alg.profiles:
            rec("RC1", f"x{p}e", alg.x(p) * alg.e(nu), alg.e(nu) * alg.x(p))
            cnup = list(nu)
            cnup[p - 1] = datum.j_involution(cnup[p - 1])
            rec(
                "RC1",
                f"c{p}e",
                alg.c(p) * alg.e(nu),
                alg.e(tuple(cnup)) * alg.c(p),
            )
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            rec("RC2", f"x{p}x{q}", alg.x(p) * alg.x(q), alg.x(q) * alg.x(p))
            lhs = alg.c(p) * alg.c(q) + alg.c(q) * alg.c(p)
            rhs = one.scale(2 * alg.clifford_sign) if p == q else alg.zero()
            rec("RC2", f"c{p}c{q}", lhs, rhs)
            sign = -S_ONE if p == q else S_ONE
            rec(
                "RC3",
                f"c{p}x{q}",
                alg.c(p) * alg.x(q),
                (alg.x(q) * alg.c(p)).scale(sign),
            )
    for a in range(1, n):
        sa = perms.simple(n, a)
        for nu in alg.profiles:
            rec(
                "RC4",
                f"s{a}e{nu}",
                alg.sigma(a) * alg.e(nu),
                alg.e(perms.act_on_profile(sa, nu)) * alg.sigma(a),
            )
        for p in range(1, n + 1):
            rec(
                "RC4",
                f"s{a}c{p}",
                alg.sigma(a) * alg.c(p),
                alg.c(sa[p - 1]) * alg.sigma(a),
            )
        for p in range(1, n + 1):
            if p in (a, a + 1):
                continue
            rec(
                "RC5",
                f"s{a}x{p}",
                alg.sigma(a) * alg.x(p),
                alg.x(p) * alg.sigma(a),
            )
        for nu in alg.profiles:
            e = alg.e(nu)
            la, lb = nu[a - 1], nu[a]
            corr6 = alg.zero()
            corr7 = alg.zero()
            if la == lb:
                corr6 = corr6 + e
                corr7 = corr7 + e
            if la == datum.j_involution(lb):
                cc = (alg.c(a) * alg.c(a + 1) * e).scale(alg.clifford_sign)
                corr6 = corr6 - cc
                corr7 = corr7 + cc
            rec(
                "RC6",
                f"s{a}x{a + 1}e{nu}",
                (alg.sigma(a) * alg.x(a + 1) - alg.x(a) * alg.sigma(a)) * e,
                corr6,
            )
            rec(
                "RC7",
                f"x{a + 1}s{a}e{nu}",
                (alg.x(a + 1) * alg.sigma(a) - alg.sigma(a) * alg.x(a)) * e,
                corr7,
            )
            qt = qtilde(datum, la, lb)
            poly = _bivar_subst(qt, n, a, a + 1)
            rhs = alg.zero()
            for exp, g in poly.terms.items():
                term = e.scale(Scalar.from_gauss(g))
                for i, mlt in enumerate(exp):
                    for _ in range(mlt):
                        term = alg.x(i + 1) * term
                rhs = rhs + term
            rec("RC8", f"s{a}^2 e{nu}", alg.sigma(a) * alg.sigma(a) * e, rhs)
        for b in range(1, n):
            if abs(a - b) > 1:
                rec(
                    "RC9",
                    f"s{a}s{b}",
                    alg.sigma(a) * alg.sigma(b),
                    alg.sigma(b) * alg.sigma(a),
                )
    for a in range(1, n - 1):
        for nu in alg.profiles:
            e = alg.e(nu)
            lhs = (
                alg.sigma(a + 1) * alg.sigma(a) * alg.sigma(a + 1)
                - alg.sigma(a) * alg.sigma(a + 1) * alg.sigma(a)
            ) * e
            rhs = alg.zero()
            for poly, cliff in alg._braid_defect(a, nu):
                base = e
                for kind, arg in reversed(cliff):
                    base = alg.c(arg) * base
                for exp, g in poly.terms.items():
                    term = base.scale(Scalar.from_gauss(g))
                    for i, mlt in enumerate(exp):
                        for _ in range(mlt):
                            term = alg.x(i + 1) * term
                    rhs = rhs + term
            rec("RC10", f"braid defect a={a} e{nu}", lhs, rhs)
    if verbose:
        for name, detail, ok in report:
            if not ok:
                print(f"FAIL {name}: {detail}")
    return report
