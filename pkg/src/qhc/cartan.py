"""Cartan superdata, the doubled label set J, roots and the Q polynomials.

J-labels are plain tuples (node, eps); profiles are tuples of J-labels.
Roots are dicts node -> positive multiplicity.
"""
from __future__ import annotations

import itertools

from .multivar import MvPoly
from .scalars import S_Q, Scalar


class CartanData:
    """Cartan superdatum together with the bivariate Q polynomial family.

    q_family(i, j) returns Q_{ij}(u, v) as a 2-variable MvPoly (u = X1,
    v = X2).  spectral(node, eps) gives the base-point map X(.) when the
    datum has one (the type A presets).
    """

    def __init__(self, name, parity, a, q_family, spectral=None, symmetric=False):
        self.name = name
        self.parity = parity          # node -> True iff odd-type
        self.a = a                    # (i, j) -> integer
        self.q_family = q_family      # (i, j) -> MvPoly in (u, v)
        self.spectral = spectral      # (node, eps) -> Scalar, or None
        self._symmetric = symmetric

    def is_symmetric(self) -> bool:
        """True iff every node is even-type (the I_odd = empty case)."""
        return self._symmetric

    def eps_values(self, node):
        return (0,) if self.parity(node) else (0, 1)

    def j_involution(self, label):
        """The involution c on J: flips eps on even-type nodes."""
        node, eps = label
        if self.parity(node):
            return label
        return (node, 1 - eps)

    def is_jc(self, label) -> bool:
        """Membership in J^c, the c-fixed (odd-type) labels."""
        return self.parity(label[0])


def _a_type_a(i, j):
    if i == j:
        return 2
    if abs(i - j) == 1:
        return -1
    return 0


def _q_type_a(i, j):
    u = MvPoly.var(2, 1)
    v = MvPoly.var(2, 2)
    if i == j:
        return MvPoly(2, {})
    p = _a_type_a(i, j)
    if i > j:
        return (u - v) ** (-p)
    return (v - u) ** (-p)


def make_type_a_inf(variant: str = "untwisted") -> CartanData:
    """Type A_infinity datum (all nodes even) with its spectral map."""
    if variant not in ("untwisted", "twisted"):
        raise ValueError(f"unknown variant {variant!r}")

    if variant == "untwisted":
        def spectral(node, eps):
            return S_Q ** (-2 * node)
    else:
        def spectral(node, eps):
            return S_Q ** (-(-1) ** eps * 2 * node)

    datum = CartanData(
        name=f"a_inf_{variant}",
        parity=lambda i: False,
        a=_a_type_a,
        q_family=_q_type_a,
        spectral=spectral,
        symmetric=True,
    )
    return datum


def make_nilhecke_clifford(node: int = 0) -> CartanData:
    """A single odd-type node with Q_{ii} = 0."""
    def a(i, j):
        if i != node or j != node:
            raise ValueError("datum has a single node")
        return 2

    def q_family(i, j):
        if i != node or j != node:
            raise ValueError("datum has a single node")
        return MvPoly(2, {})

    datum = CartanData(
        name="nilhecke_clifford",
        parity=lambda i: True,
        a=a,
        q_family=q_family,
        spectral=None,
    )
    return datum


PRESETS = {
    "a_inf_untwisted": lambda: make_type_a_inf("untwisted"),
    "a_inf_twisted": lambda: make_type_a_inf("twisted"),
    "nilhecke_clifford": lambda: make_nilhecke_clifford(),
}


def qtilde(datum: CartanData, li, lj) -> MvPoly:
    """Q with the signs (-1)^{pi2} substituted into each variable."""
    base = datum.q_family(li[0], lj[0])
    su = -1 if li[1] else 1
    sv = -1 if lj[1] else 1
    if su == 1 and sv == 1:
        return base
    return base.substitute(
        {
            1: MvPoly.var(2, 1) if su == 1 else -MvPoly.var(2, 1),
            2: MvPoly.var(2, 2) if sv == 1 else -MvPoly.var(2, 2),
        }
    )


# -- roots ------------------------------------------------------------------

def root(coeffs) -> dict:
    """Normalize a root given as a dict or iterable of (node, mult)."""
    out = {}
    for node, mult in (coeffs.items() if isinstance(coeffs, dict) else coeffs):
        if mult < 0:
            raise ValueError("root multiplicities must be nonnegative")
        if mult:
            out[node] = out.get(node, 0) + mult
    return dict(sorted(out.items()))


def root_from_string(text: str) -> dict:
    """Parse the "0:1,1:2" syntax meaning alpha_0 + 2*alpha_1."""
    out = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        node, mult = part.split(":")
        out[int(node)] = out.get(int(node), 0) + int(mult)
    return root(out)


def root_to_string(beta: dict) -> str:
    return ",".join(f"{node}:{mult}" for node, mult in sorted(beta.items()))


def simple_root(node: int) -> dict:
    return {node: 1}


def add_roots(b1: dict, b2: dict) -> dict:
    out = dict(b1)
    for node, mult in b2.items():
        out[node] = out.get(node, 0) + mult
    return root(out)


def height(beta: dict) -> int:
    return sum(beta.values())


def bilinear_form(datum: CartanData, b1: dict, b2: dict) -> int:
    return sum(
        m1 * m2 * datum.a(i, j)
        for i, m1 in b1.items()
        for j, m2 in b2.items()
    )


def enumerate_sequences(datum: CartanData, beta: dict):
    """All J-profiles for beta, lexicographic on (node list, eps bits)."""
    nodes = []
    for node, mult in sorted(beta.items()):
        nodes.extend([node] * mult)
    orders = sorted(set(itertools.permutations(nodes)))
    out = []
    for order in orders:
        for eps in itertools.product(*(datum.eps_values(i) for i in order)):
            out.append(tuple(zip(order, eps)))
    return out


def profile_root(profile) -> dict:
    return root([(node, 1) for node, _ in profile])
