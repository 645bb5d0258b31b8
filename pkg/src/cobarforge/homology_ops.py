"""e_i operations, Dyer-Lashof action and ∪_i products on the unstable Milnor coalgebra."""
from __future__ import annotations

import re
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple, Union

from .conventions import DEFAULT, ConventionGap, ConventionTable
from .milnor import (UNIT, KPoly, Mono, as_poly, mul, norm, order_key, toggle, xi)

PolyLike = Union[Mono, Iterable[Mono]]


def _factors(m: Mono) -> List[int]:
    out = []
    for i, e in enumerate(m):
        out += [i] * e
    return out


def _drop_one(m: Mono, g: int) -> Mono:
    e = list(m)
    e[g] -= 1
    return norm(e)


@lru_cache(maxsize=None)
def e_generator(i: int, k: int) -> KPoly:
    """e_i(xi_k): xi_{m+k} xi_l when i = 2^{m+k} - (2^k + ... + 2^l), else 0."""
    out: set = set()
    m = 0
    while (1 << (m + k)) - (1 << (k + 1)) + 1 <= i or m == 0:
        for l in range(k + 1):
            if (1 << (m + k)) - (1 << (k + 1)) + (1 << l) == i:
                toggle(out, mul(xi(m + k), xi(l)))
        m += 1
    return frozenset(out)


@lru_cache(maxsize=None)
def e_mono(i: int, m: Mono) -> KPoly:
    if i < 0:
        return frozenset()
    if m == UNIT:
        return frozenset({UNIT}) if i == 0 else frozenset()
    g = _factors(m)[0]
    rest = _drop_one(m, g)
    out: set = set()
    for k in range(i + 1):
        a = e_generator(k, g)
        if not a:
            continue
        for x in a:
            for y in e_mono(i - k, rest):
                toggle(out, mul(x, y))
    return frozenset(out)


def e_op(i: int, x: PolyLike) -> KPoly:
    out: set = set()
    for m in as_poly(x):
        for t in e_mono(i, m):
            toggle(out, t)
    return frozenset(out)


@lru_cache(maxsize=None)
def q_generator(j: int, k: int) -> KPoly:
    """Q^j(xi_k) read straight off the Dyer-Lashof table, j = i + 2^k - 1."""
    i = j - ((1 << k) - 1)
    if i < 0:
        return frozenset()
    out: set = set()
    for m in range(0, 64):
        top = 1 << (m + k)
        if top - (1 << (k + 1)) + 1 > i and m > 0:
            break
        for l in range(k, -1, -1):
            if top - ((1 << (k + 1)) - (1 << l)) == i:
                toggle(out, mul(xi(m + k), xi(l)))
    return frozenset(out)


@lru_cache(maxsize=None)
def q_mono(j: int, m: Mono) -> KPoly:
    if m == UNIT:
        return frozenset({UNIT}) if j == 0 else frozenset()
    g = _factors(m)[0]
    rest = _drop_one(m, g)
    out: set = set()
    for a in range(j + 1):
        left = q_generator(a, g)
        if not left:
            continue
        for x in left:
            for y in q_mono(j - a, rest):
                toggle(out, mul(x, y))
    return frozenset(out)


def q_op(j: int, x: PolyLike) -> KPoly:
    out: set = set()
    for m in as_poly(x):
        for t in q_mono(j, m):
            toggle(out, t)
    return frozenset(out)


DLWord = Tuple[int, ...]


def dl_admissible(w: Sequence[int], target_dim: int) -> bool:
    w = tuple(w)
    if not w:
        return True
    if any(w[l] > 2 * w[l + 1] for l in range(len(w) - 1)):
        return False
    return w[-1] >= target_dim


def dl_apply(w: Sequence[int], x: PolyLike) -> KPoly:
    """Q^{j1}…Q^{jk} x, innermost operation last in the word."""
    p = as_poly(x)
    for j in reversed(tuple(w)):
        p = q_op(j, p)
    return p


def parse_dl(s: str) -> DLWord:
    s = s.strip()
    out = []
    for part in s.split("."):
        g = re.fullmatch(r"Q(\d+)", part.strip())
        if not g:
            raise ValueError(f"bad Dyer-Lashof letter {part!r}: expected Q<j>")
        out.append(int(g.group(1)))
    return tuple(out)


def format_dl(w: Sequence[int]) -> str:
    return ".".join(f"Q{j}" for j in w)


def _is_generator(m: Mono) -> bool:
    return sum(m) == 1


def cup_mono(i: int, x: Mono, y: Mono, conv: ConventionTable = DEFAULT) -> KPoly:
    return _cup_mono(i, x, y, conv)


@lru_cache(maxsize=None)
def _cup_mono(i: int, x: Mono, y: Mono, conv: ConventionTable) -> KPoly:
    if i == 0:
        return frozenset({mul(x, y)})
    if x == y:
        return e_mono(i, x)
    if order_key(x) > order_key(y):
        x, y = y, x
    ov = conv.override(i, x, y)
    if ov is not None:
        return ov
    if x == UNIT or y == UNIT:
        return frozenset()
    if _is_generator(x) and _is_generator(y):
        if conv.mixed_cup == "strict":
            raise ConventionGap(f"x ∪_{i} y undefined for distinct generators x={x}, y={y}")
        return frozenset()
    # split the product argument: (g a') ∪ b = g (a' ∪ b) + (g ∪ b) a'
    a, b = (y, x) if not _is_generator(y) else (x, y)
    g = _factors(a)[0]
    rest = _drop_one(a, g)
    gm = xi(g)
    out: set = set()
    for t in _cup_mono(i, rest, b, conv):
        toggle(out, mul(gm, t))
    for t in _cup_mono(i, gm, b, conv):
        toggle(out, mul(t, rest))
    return frozenset(out)


def cup_k(i: int, x: PolyLike, y: PolyLike, conv: ConventionTable = DEFAULT) -> KPoly:
    """x ∪_i y on the unstable coalgebra, bilinear over F2."""
    out: set = set()
    for a in as_poly(x):
        for b in as_poly(y):
            for t in _cup_mono(i, a, b, conv):
                toggle(out, t)
    return frozenset(out)


def _cancel_xi0(u: Mono, k: int):
    """u / xi0^k, or None when xi0^k does not divide u (the term is dropped)."""
    if k == 0:
        return u
    a = u[0] if u else 0
    if a < k:
        return None
    return norm((a - k,) + u[1:])


def nabla_e_rhs(i: int, x: PolyLike):
    """Σ xi0^{-k} e_{i-k}(xi0^k x') ⊗ e_k(x'') over ∇x = Σ x'⊗x''."""
    from .milnor import coproduct
    out: set = set()
    for a, b in coproduct(x):
        for k in range(i + 1):
            right = e_mono(k, b)
            if not right:
                continue
            left = e_mono(i - k, mul(xi(0, k), a) if k else a)
            for u in left:
                u = _cancel_xi0(u, k)
                if u is None:
                    continue
                for v in right:
                    toggle(out, (u, v))
    return frozenset(out)


def nabla_e_lhs(i: int, x: PolyLike):
    from .milnor import coproduct
    return coproduct(e_op(i, x))
