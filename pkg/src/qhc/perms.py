"""Permutation combinatorics: reduced words, canonical forms, cosets.

Permutations of {1..n} are tuples w with w[i-1] = w(i).  Products compose
as functions: (u * v)(i) = u(v(i)), so a word [k1, ..., kl] multiplies out
to s_{k1} ∘ ... ∘ s_{kl}.
"""
from __future__ import annotations

import functools
import itertools
from collections import deque


def identity(n: int):
    return tuple(range(1, n + 1))


def simple(n: int, k: int):
    """The transposition s_k swapping k and k+1."""
    w = list(range(1, n + 1))
    w[k - 1], w[k] = w[k], w[k - 1]
    return tuple(w)


def compose(u, v):
    """(u * v)(i) = u(v(i))."""
    return tuple(u[v[i] - 1] for i in range(len(u)))


def inverse(w):
    out = [0] * len(w)
    for i, x in enumerate(w):
        out[x - 1] = i + 1
    return tuple(out)


def length(w) -> int:
    n = len(w)
    return sum(
        1 for i in range(n) for j in range(i + 1, n) if w[i] > w[j]
    )


def inversion_pairs(w):
    """Pairs (i, j), i < j, with w(i) > w(j)."""
    n = len(w)
    return [
        (i + 1, j + 1)
        for i in range(n)
        for j in range(i + 1, n)
        if w[i] > w[j]
    ]


def from_word(n: int, word):
    w = identity(n)
    for k in word:
        w = compose(w, simple(n, k))
    return w


def descends_right(w, k: int) -> bool:
    """True iff l(w s_k) < l(w), i.e. w(k) > w(k+1)."""
    return w[k - 1] > w[k]


@functools.lru_cache(maxsize=None)
def canonical_word(w):
    """The staircase reduced word built from the Lehmer code.

    For code c_i = #{j > i : w(j) < w(i)} the word is the concatenation of
    descending runs [i + c_i - 1, ..., i + 1, i] for i = 1 up to n-1.
    """
    n = len(w)
    code = [
        sum(1 for j in range(i + 1, n) if w[j] < w[i]) for i in range(n)
    ]
    word = []
    for i in range(1, n):
        c = code[i - 1]
        word.extend(range(i + c - 1, i - 1, -1))
    word = tuple(word)
    assert from_word(n, word) == w and len(word) == length(w)
    return word


def all_permutations(n: int):
    return [tuple(p) for p in itertools.permutations(range(1, n + 1))]


def _word_moves(word):
    """All single commutation/braid moves applicable to a reduced word."""
    out = []
    lst = list(word)
    for i in range(len(lst) - 1):
        a, b = lst[i], lst[i + 1]
        if abs(a - b) >= 2:
            out.append(("c", i, tuple(lst[:i] + [b, a] + lst[i + 2:])))
    for i in range(len(lst) - 2):
        a, b, c = lst[i], lst[i + 1], lst[i + 2]
        if a == c and abs(a - b) == 1:
            out.append(("b", i, tuple(lst[:i] + [b, a, b] + lst[i + 3:])))
    return out


@functools.lru_cache(maxsize=None)
def word_path(source, target):
    """A sequence of moves turning one reduced word into another.

    Both words must be reduced words for the same permutation.  Returns a
    tuple of (kind, position, word-after-move) steps; kind is "c" for a
    commutation move and "b" for a braid move.
    """
    if source == target:
        return ()
    seen = {source: None}
    queue = deque([source])
    while queue:
        cur = queue.popleft()
        for kind, pos, nxt in _word_moves(cur):
            if nxt in seen:
                continue
            seen[nxt] = (cur, kind, pos)
            if nxt == target:
                steps = []
                node = nxt
                while seen[node] is not None:
                    prev, kind, pos = seen[node]
                    steps.append((kind, pos, node))
                    node = prev
                return tuple(reversed(steps))
            queue.append(nxt)
    raise ValueError("words are not connected; not the same permutation?")


def min_coset_reps(n1: int, n2: int):
    """Minimal length representatives of S_{n1+n2} / (S_{n1} x S_{n2}).

    These are the permutations increasing on both blocks; sorted for
    reproducibility.
    """
    n = n1 + n2
    reps = []
    for first in itertools.combinations(range(1, n + 1), n1):
        second = [x for x in range(1, n + 1) if x not in first]
        w = [0] * n
        for i, x in enumerate(first):
            w[i] = x
        for i, x in enumerate(second):
            w[n1 + i] = x
        reps.append(tuple(w))
    return sorted(reps)


def block_transposition(a: int, b: int):
    """The longest minimal coset representative for the split (a, b).

    Maps i -> i + b for i <= a and a + j -> j; length a*b.
    """
    return tuple(
        [i + b for i in range(1, a + 1)] + [j for j in range(1, b + 1)]
    )


def coset_factorize(w, n1: int):
    """Write w = w_c * w_p with w_c block-increasing, w_p block-preserving."""
    n = len(w)
    first = sorted(w[:n1])
    second = sorted(w[n1:])
    w_c = tuple(first + second)
    w_p = compose(inverse(w_c), w)
    return w_c, w_p


def act_on_profile(w, nu):
    """The place permutation action: (w . nu)_{w(i)} = nu_i."""
    out = [None] * len(nu)
    for i, x in enumerate(w):
        out[x - 1] = nu[i]
    return tuple(out)
