"""The Milnor coalgebra over F2, unstable (xi0 a generator of dim 0) and stable (xi0 = 1).

A monomial is a tuple of exponents (e0, e1, ...) with no trailing zeros;
() is the unit. A KPoly is a frozenset of monomials and a KTensor a frozenset
of equal-length tuples of monomials; addition is symmetric difference.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, FrozenSet, Iterable, List, Tuple, Union

Mono = Tuple[int, ...]
Term = Tuple[Mono, ...]
KPoly = FrozenSet[Mono]
KTensor = FrozenSet[Term]

STABLE = "stable"
UNSTABLE = "unstable"
MODES = (STABLE, UNSTABLE)

UNIT: Mono = ()
KEY_WIDTH = 24  # generator indices beyond this never occur in practice


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}, expected one of {MODES}")
    return mode


def norm(e: Iterable[int]) -> Mono:
    e = list(e)
    while e and e[-1] == 0:
        e.pop()
    if any(x < 0 for x in e):
        raise ValueError("negative exponent")
    return tuple(e)


def to_mode(m: Mono, mode: str) -> Mono:
    if mode == STABLE and m and m[0]:
        return norm((0,) + m[1:])
    return m


def xi(i: int, p: int = 1) -> Mono:
    e = [0] * (i + 1)
    e[i] = p
    return norm(e)


def mul(a: Mono, b: Mono) -> Mono:
    if len(a) < len(b):
        a, b = b, a
    return tuple(x + (b[i] if i < len(b) else 0) for i, x in enumerate(a))


def dim(m: Mono) -> int:
    return sum(e * ((1 << i) - 1) for i, e in enumerate(m))


def deg(m: Mono) -> int:
    return sum(m)


def weight(m: Mono) -> int:
    """Σ e_i 2^i; the exponent of xi0 in the left end term of ∇m."""
    return sum(e << i for i, e in enumerate(m))


@dataclass(frozen=True)
class Grading:
    dim: int
    deg: int


def grading_of(m: Mono, mode: str = UNSTABLE) -> Grading:
    check_mode(mode)
    m = to_mode(m, mode)
    return Grading(dim(m), deg(m))


def order_key(m: Mono) -> Tuple:
    """Graded lex: dim first, then exponents read from the highest index down."""
    pad = tuple(m) + (0,) * (KEY_WIDTH - len(m))
    return (dim(m), pad[::-1])


def term_key(t: Term) -> Tuple:
    return tuple(order_key(m) for m in t)


def term_key_last_first(t: Term) -> Tuple:
    return tuple(order_key(m) for m in reversed(t))


def toggle(acc: set, x) -> None:
    if x in acc:
        acc.remove(x)
    else:
        acc.add(x)


def as_poly(x: Union[Mono, Iterable[Mono]]) -> KPoly:
    if isinstance(x, tuple) and all(isinstance(e, int) for e in x):
        return frozenset({x})
    out: set = set()
    for m in x:
        toggle(out, m)
    return frozenset(out)


def poly_mul(a: KPoly, b: KPoly) -> KPoly:
    out: set = set()
    for x in a:
        for y in b:
            toggle(out, mul(x, y))
    return frozenset(out)


def tensor_mul(a: KTensor, b: KTensor) -> KTensor:
    out: set = set()
    for s in a:
        for t in b:
            toggle(out, tuple(mul(x, y) for x, y in zip(s, t)))
    return frozenset(out)


@lru_cache(maxsize=None)
def _gen_coproduct(i: int, b: int, mode: str) -> KTensor:
    # ∇(xi_i^{2^b}) = Σ_k xi_{i-k}^{2^{k+b}} ⊗ xi_k^{2^b}
    out: set = set()
    for k in range(i + 1):
        left = to_mode(xi(i - k, 1 << (k + b)), mode)
        right = to_mode(xi(k, 1 << b), mode)
        toggle(out, (left, right))
    return frozenset(out)


@lru_cache(maxsize=None)
def mono_coproduct(m: Mono, mode: str = UNSTABLE) -> KTensor:
    check_mode(mode)
    m = to_mode(m, mode)
    res: KTensor = frozenset({(UNIT, UNIT)})
    for i, e in enumerate(m):
        b = 0
        while e:
            if e & 1:
                res = tensor_mul(res, _gen_coproduct(i, b, mode))
            e >>= 1
            b += 1
    return res


def coproduct(x: Union[Mono, Iterable[Mono]], mode: str = UNSTABLE) -> KTensor:
    out: set = set()
    for m in as_poly(x):
        for t in mono_coproduct(m, mode):
            toggle(out, t)
    return frozenset(out)


def reduced_coproduct(x: Union[Mono, Iterable[Mono]]) -> KTensor:
    """Stable ∇ minus x⊗1 and 1⊗x."""
    out: set = set()
    for m in as_poly(x):
        m0 = to_mode(m, STABLE)
        if m0 == UNIT:
            raise ValueError("reduced coproduct is undefined on the unit")
        for t in mono_coproduct(m0, STABLE):
            if UNIT not in t:
                toggle(out, t)
    return frozenset(out)


def unstable_ends(m: Mono) -> Tuple[Term, Term]:
    """The two end terms of ∇m in unstable mode: m⊗xi0^deg and xi0^weight⊗m."""
    return (m, xi(0, deg(m)) if deg(m) else UNIT), (xi(0, weight(m)) if weight(m) else UNIT, m)


def reduced_coproduct_unstable(m: Mono) -> KTensor:
    """Unstable ∇m with both end terms removed; the cobar splice uses this."""
    ends = set(unstable_ends(m))
    return frozenset(t for t in mono_coproduct(m, UNSTABLE) if t not in ends)


def coface(t: Term, pos: int, mode: str) -> KTensor:
    """Apply ∇ to slot pos of a tensor term."""
    out: set = set()
    for a, b in mono_coproduct(t[pos], mode):
        toggle(out, t[:pos] + (a, b) + t[pos + 1:])
    return frozenset(out)


def alternating_coface(t: Term, mode: str) -> KTensor:
    """∇(n) = Σ_p 1⊗…⊗∇⊗…⊗1 (signs vanish mod 2)."""
    out: set = set()
    for p in range(len(t)):
        for s in coface(t, p, mode):
            toggle(out, s)
    return frozenset(out)


def _ordered_pairs(terms: Iterable[Term], key) -> set:
    ts = sorted(terms, key=key)
    return {(ts[a], ts[b]) for a in range(len(ts)) for b in range(a + 1, len(ts))}


def _apply_r(pairs: set, f: Callable[[Term], KTensor], key) -> set:
    """(f⊗f) followed by r: keep U⊗V only when U > V, stored as (V, U)."""
    out: set = set()
    for u, v in pairs:
        fu, fv = f(u), f(v)
        for a in fu:
            ka = key(a)
            for b in fv:
                if ka > key(b):
                    toggle(out, (b, a))
    return out


def iterated_nabla(x: Union[Mono, Iterable[Mono]], n: int, mode: str = UNSTABLE) -> KTensor:
    """The bracket (∇(n), …, ∇(2), ∇): p∘∇(n)^{⊗2}∘r∘…∘r∘∇^{⊗2}∘q.

    ∇(k) is read as the first-slot coface ∇⊗1⊗…⊗1 and pairs are ordered by
    comparing the last tensor slot first.
    """
    check_mode(mode)
    if n < 1:
        raise ValueError("n must be >= 1")
    key = term_key_last_first
    out: set = set()
    for m in as_poly(x):
        m = to_mode(m, mode)
        if m == UNIT:
            continue
        if n == 1:
            for t in mono_coproduct(m, mode):
                toggle(out, t)
            continue
        pairs = _ordered_pairs(mono_coproduct(m, mode), key)
        left = lambda t: coface(t, 0, mode)
        for _ in range(n - 2):
            pairs = _apply_r(pairs, left, key)
        for u, v in pairs:
            for t in left(u) & left(v):
                toggle(out, t)
    return frozenset(out)


def psi_n(x: Union[Mono, Iterable[Mono]], n: int, mode: str = UNSTABLE) -> KTensor:
    """Ψⁿ: restriction of (π^{×n+1}, ∇̃(n), …, ∇̃) to x⊗x.

    ∇̃ on x⊗x acts as ∇⊗∇ on the two copies, so the value is
    π∘r∘∇(n)^{⊗2}∘…∘r∘∇^{⊗2}(x⊗x) with π the slotwise product of the copies.
    ∇(k) is read as the last-slot coface 1⊗…⊗1⊗∇.
    """
    check_mode(mode)
    if n < 1:
        raise ValueError("n must be >= 1")
    key = term_key_last_first
    out: set = set()
    for m in as_poly(x):
        m = to_mode(m, mode)
        pairs = _ordered_pairs(mono_coproduct(m, mode), key)
        right = lambda t: coface(t, len(t) - 1, mode)
        for _ in range(n - 1):
            pairs = _apply_r(pairs, right, key)
        for u, v in pairs:
            toggle(out, tuple(to_mode(mul(a, b), mode) for a, b in zip(u, v)))
    return frozenset(out)


# text grammar

_GEN = re.compile(r"xi(\d+)(?:\^(\d+))?$")


def parse_mono(s: str, mode: str = UNSTABLE) -> Mono:
    s = s.strip()
    if s == "1":
        return UNIT
    e: List[int] = []
    for part in s.split("*"):
        g = _GEN.match(part.strip())
        if not g:
            raise ValueError(f"bad monomial factor {part!r}: expected xi<i> or xi<i>^<e>")
        i, p = int(g.group(1)), int(g.group(2) or 1)
        while len(e) <= i:
            e.append(0)
        e[i] += p
    return to_mode(norm(e), mode)


def format_mono(m: Mono) -> str:
    parts = [f"xi{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(m) if e]
    return "*".join(parts) or "1"


def parse_poly(s: str, mode: str = UNSTABLE) -> KPoly:
    s = s.strip()
    if s == "0":
        return frozenset()
    return as_poly(parse_mono(p, mode) for p in s.split("+"))


def sort_poly(p: Iterable[Mono]) -> List[Mono]:
    return sorted(p, key=order_key)


def format_poly(p: Iterable[Mono]) -> str:
    return " + ".join(format_mono(m) for m in sort_poly(p)) or "0"


def parse_tensor(s: str, mode: str = UNSTABLE) -> KTensor:
    s = s.strip()
    if s == "0":
        return frozenset()
    out: set = set()
    for term in s.split("+"):
        slots = re.split(r"\|o\||⊗", term)
        toggle(out, tuple(parse_mono(x, mode) for x in slots))
    return frozenset(out)


def sort_tensor(t: Iterable[Term]) -> List[Term]:
    return sorted(t, key=term_key)


def format_tensor(t: Iterable[Term]) -> str:
    return " + ".join(" ⊗ ".join(format_mono(m) for m in term) for term in sort_tensor(t)) or "0"


def monomials(max_dim: int, mode: str = UNSTABLE, max_xi0: int = 2, min_dim: int = 0) -> List[Mono]:
    """All monomials with min_dim <= dim <= max_dim, sorted; xi0 exponent capped in unstable mode."""
    check_mode(mode)
    gens = []
    i = 1
    while (1 << i) - 1 <= max_dim:
        gens.append(i)
        i += 1
    found: List[List[int]] = []

    def rec(idx: int, cur: List[int], d: int) -> None:
        if idx < 0:
            found.append(list(cur))
            return
        i = gens[idx]
        w = (1 << i) - 1
        e = 0
        while d + e * w <= max_dim:
            cur[i] = e
            rec(idx - 1, cur, d + e * w)
            e += 1
        cur[i] = 0

    rec(len(gens) - 1, [0] * (len(gens) + 1), 0)
    out = []
    for e in found:
        base = norm(e)
        if not min_dim <= dim(base) <= max_dim:
            continue
        if mode == STABLE:
            out.append(base)
        else:
            for a in range(max_xi0 + 1):
                out.append(norm((a,) + tuple(e[1:])))
    return sort_poly(set(out))
