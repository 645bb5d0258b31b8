"""The cobar construction over the Milnor coalgebra.

A word [x1|...|xn] is a tuple of non-unit monomials; a CobarSum is a frozenset
of words (addition is symmetric difference). The bidegree of a word is
s = letter count, t = Σ dim(letter), stem = t - s.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

from .conventions import DEFAULT, ConventionTable
from .gf2 import F2Matrix, bits, homology_basis
from .homology_ops import cup_k
from .milnor import (STABLE, UNIT, UNSTABLE, KTensor, Mono, check_mode, dim, format_mono, mono_coproduct,
                     monomials, mul, order_key, parse_mono, reduced_coproduct, reduced_coproduct_unstable,
                     to_mode, toggle)

Word = Tuple[Mono, ...]
CobarSum = FrozenSet[Word]
EMPTY: Word = ()


def word(*letters: Mono) -> Word:
    return tuple(letters)


def s_of(w: Word) -> int:
    return len(w)


def t_of(w: Word) -> int:
    return sum(dim(x) for x in w)


def stem(w: Word) -> int:
    return t_of(w) - s_of(w)


def bidegree(w: Word) -> Tuple[int, int]:
    return s_of(w), t_of(w)


def word_key(w: Word) -> Tuple:
    return (len(w), tuple(order_key(x) for x in w))


def sort_sum(x: Iterable[Word]) -> List[Word]:
    return sorted(x, key=word_key)


def as_sum(x: Union[Word, Iterable[Word]]) -> CobarSum:
    if isinstance(x, tuple):  # a single word; sums come as sets or lists
        return frozenset({x})
    out: set = set()
    for w in x:
        toggle(out, w)
    return frozenset(out)


def concat(u: Iterable[Word], v: Iterable[Word]) -> CobarSum:
    """The ∪0 product: concatenation, extended bilinearly."""
    out: set = set()
    for a in u:
        for b in v:
            toggle(out, a + b)
    return frozenset(out)


# grammar: [xi1^2|xi2], empty word []

def parse_word(s: str, mode: str = STABLE) -> Word:
    s = s.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ValueError(f"bad cobar word {s!r}: expected [letter|letter|...]")
    body = s[1:-1].strip()
    if not body:
        return EMPTY
    letters = tuple(parse_mono(p, mode) for p in body.split("|"))
    check_word(letters, mode)
    return letters


def check_word(w: Word, mode: str) -> Word:
    check_mode(mode)
    for x in w:
        if x == UNIT:
            raise ValueError("cobar letters must be non-unit monomials")
        if mode == STABLE and to_mode(x, STABLE) != x:
            raise ValueError(f"letter {format_mono(x)} contains xi0, which is 1 in stable mode")
    return w


def format_word(w: Word) -> str:
    return "[" + "|".join(format_mono(x) for x in w) + "]"


def parse_sum(s: str, mode: str = STABLE) -> CobarSum:
    s = s.strip()
    if s == "0":
        return frozenset()
    return as_sum([parse_word(p, mode) for p in s.split("+")])


def format_sum(x: Iterable[Word]) -> str:
    return " + ".join(format_word(w) for w in sort_sum(x)) or "0"


# differential

@dataclass(frozen=True)
class AInfinityData:
    """Higher co-operations ∇_n: letter -> (n+2)-fold tensors, as explicit tables.

    ``higher[n]`` maps a monomial to its set of (n+2)-tuples; missing entries
    are zero. ``coproduct_overrides`` replaces the reduced coproduct of the
    listed monomials, which is how a corrupted table is injected.
    """
    higher: Mapping[int, Mapping[Mono, KTensor]] = field(default_factory=dict)
    coproduct_overrides: Mapping[Mono, KTensor] = field(default_factory=dict)

    def is_zero(self) -> bool:
        return not any(self.higher.values()) and not self.coproduct_overrides

    def key(self) -> Tuple:
        hi = tuple(sorted((n, tuple(sorted((m, tuple(sorted(v))) for m, v in tab.items())))
                          for n, tab in self.higher.items()))
        ov = tuple(sorted((m, tuple(sorted(v))) for m, v in self.coproduct_overrides.items()))
        return hi, ov


STRICT = AInfinityData()


def letter_coproduct(x: Mono, mode: str = STABLE, a_inf: AInfinityData = STRICT) -> KTensor:
    """The reduced coproduct spliced into words; in unstable mode both end terms are dropped."""
    if x in a_inf.coproduct_overrides:
        return frozenset(a_inf.coproduct_overrides[x])
    return _letter_coproduct(x, mode)


@lru_cache(maxsize=None)
def _letter_coproduct(x: Mono, mode: str) -> KTensor:
    if mode == STABLE:
        return reduced_coproduct(x)
    return reduced_coproduct_unstable(x)


def cobar_diff(w: Union[Word, Iterable[Word]], a_inf: AInfinityData = STRICT, mode: str = STABLE) -> CobarSum:
    """Splice the reduced coproduct (and any ∇_n tables) into each letter."""
    check_mode(mode)
    out: set = set()
    for v in as_sum(w):
        if a_inf.is_zero():
            for t in _diff_word(v, mode):
                toggle(out, t)
            continue
        for k, x in enumerate(v):
            pre, post = v[:k], v[k + 1:]
            for a, b in letter_coproduct(x, mode, a_inf):
                toggle(out, pre + (a, b) + post)
            for n, tab in a_inf.higher.items():
                for t in tab.get(x, ()):
                    if len(t) != n + 2:
                        raise ValueError(f"∇_{n} table entry for {format_mono(x)} has {len(t)} slots, expected {n + 2}")
                    toggle(out, pre + tuple(t) + post)
    return frozenset(out)


@lru_cache(maxsize=None)
def _diff_word(v: Word, mode: str) -> CobarSum:
    out: set = set()
    for k, x in enumerate(v):
        pre, post = v[:k], v[k + 1:]
        for a, b in _letter_coproduct(x, mode):
            toggle(out, pre + (a, b) + post)
    return frozenset(out)


# windows of basis words

def letters_upto(max_dim: int, mode: str = STABLE, max_xi0: int = 2) -> List[Mono]:
    return [m for m in monomials(max_dim, mode, max_xi0) if m != UNIT]


def words(s: int, t: int, mode: str = STABLE, max_xi0: int = 2) -> List[Word]:
    """All basis words of bidegree (s, t), sorted."""
    if s == 0:
        return [EMPTY] if t == 0 else []
    letters = letters_upto(t, mode, max_xi0)
    by_dim: Dict[int, List[Mono]] = {}
    for x in letters:
        by_dim.setdefault(dim(x), []).append(x)
    out: List[Word] = []

    def rec(prefix: Tuple[Mono, ...], left: int, remaining: int) -> None:
        if left == 0:
            if remaining == 0:
                out.append(prefix)
            return
        lo = 0 if mode == UNSTABLE else 1
        for d in range(lo, remaining + 1):
            for x in by_dim.get(d, ()):
                rec(prefix + (x,), left - 1, remaining - d)

    rec(EMPTY, s, t)
    return sort_sum(out)


def count_words(s: int, t: int, mode: str = STABLE, max_xi0: int = 2) -> int:
    """Number of basis words of bidegree (s, t), by dynamic programming over letter dimensions."""
    if s == 0:
        return int(t == 0)
    per_dim: Dict[int, int] = {}
    for x in letters_upto(t, mode, max_xi0):
        per_dim[dim(x)] = per_dim.get(dim(x), 0) + 1
    ways = [1] + [0] * t
    for _ in range(s):
        nxt = [0] * (t + 1)
        for u, c in enumerate(ways):
            if c:
                for d, k in per_dim.items():
                    if u + d <= t:
                        nxt[u + d] += c * k
        ways = nxt
    return ways[t]


@dataclass
class DSquaredReport:
    ok: bool
    checked: int
    first_failure: Optional[Word] = None
    residual: CobarSum = frozenset()
    method: str = "letters"

    def as_dict(self) -> dict:
        return {"ok": self.ok, "checked": self.checked, "method": self.method,
                "first_failure": format_word(self.first_failure) if self.first_failure is not None else None,
                "residual": format_sum(self.residual)}


def d_squared_window(max_t: int, max_s: int, a_inf: AInfinityData = STRICT, mode: str = STABLE,
                     max_xi0: int = 1, exhaustive: bool = False) -> DSquaredReport:
    """Check d∘d = 0 on every basis word with t <= max_t, s <= max_s.

    d is a derivation of the tensor algebra, so over F2 so is d∘d, and it
    vanishes on all words iff it vanishes on every letter; the first failing
    word in window order is then the first failing single letter. The
    default uses this reduction and reports how many words it covers;
    ``exhaustive`` applies d twice to every word instead.
    """
    if exhaustive:
        checked = 0
        for t in range(max_t + 1):
            for s in range(max_s + 1):
                for w in words(s, t, mode, max_xi0):
                    checked += 1
                    r = cobar_diff(cobar_diff(w, a_inf, mode), a_inf, mode)
                    if r:
                        return DSquaredReport(False, checked, w, r, "exhaustive")
        return DSquaredReport(True, checked, method="exhaustive")
    covered = sum(count_words(s, t, mode, max_xi0) for t in range(max_t + 1) for s in range(max_s + 1))
    if max_s >= 1:
        for t in range(max_t + 1):
            for w in words(1, t, mode, max_xi0):
                r = cobar_diff(cobar_diff(w, a_inf, mode), a_inf, mode)
                if r:
                    before = sum(count_words(s, u, mode, max_xi0) for u in range(t) for s in range(max_s + 1))
                    return DSquaredReport(False, before + 1 + (t == 0) + words(1, t, mode, max_xi0).index(w), w, r)
    return DSquaredReport(True, covered)


# shuffle coproduct

WordPair = Tuple[Word, Word]


def shuffle_coproduct(w: Word) -> FrozenSet[WordPair]:
    """Σ over (p, q)-shuffles of [x_{i1}..x_{ip}] ⊗ [x_{j1}..x_{jq}]."""
    out: set = set()
    n = len(w)
    for p in range(n + 1):
        for left in itertools.combinations(range(n), p):
            ls = set(left)
            toggle(out, (tuple(w[i] for i in left), tuple(w[j] for j in range(n) if j not in ls)))
    return frozenset(out)


def pair_apply_diff(pairs: Iterable[WordPair], mode: str = STABLE) -> FrozenSet[WordPair]:
    """(d⊗1 + 1⊗d) on a sum of word pairs."""
    out: set = set()
    for a, b in pairs:
        for x in cobar_diff(a, mode=mode):
            toggle(out, (x, b))
        for y in cobar_diff(b, mode=mode):
            toggle(out, (a, y))
    return frozenset(out)


def shuffle_of_sum(x: Iterable[Word]) -> FrozenSet[WordPair]:
    out: set = set()
    for w in x:
        for p in shuffle_coproduct(w):
            toggle(out, p)
    return frozenset(out)


# ∪_i products

def letter_cup(j: int, x: Mono, y: Mono, mode: str = STABLE, conv: ConventionTable = DEFAULT) -> FrozenSet[Mono]:
    """∪_j on the coalgebra: the product for j = 0.

    Stable mode is a commutative Hopf algebra with trivial higher products.
    Unstable mode uses the convention table of homology_ops.
    """
    if j == 0:
        return frozenset({mul(x, y)})
    if mode == STABLE:
        return frozenset()
    return frozenset(cup_k(j, x, y, conv))


def cobar_cup(i: int, u: Union[Word, Iterable[Word]], v: Union[Word, Iterable[Word]], mode: str = STABLE,
              conv: ConventionTable = DEFAULT) -> CobarSum:
    """u ∪_i v on the cobar construction, extended bilinearly."""
    check_mode(mode)
    if i < 0:
        return frozenset()
    out: set = set()
    for a in as_sum(u):
        for b in as_sum(v):
            for w in _cup(i, a, b, mode, conv):
                toggle(out, w)
    return frozenset(out)


def _sum_cup(i: int, u: Iterable[Word], v: Iterable[Word], mode: str, conv: ConventionTable) -> set:
    out: set = set()
    if i < 0:
        return out
    for a in u:
        for b in v:
            for w in _cup(i, a, b, mode, conv):
                toggle(out, w)
    return out


@lru_cache(maxsize=None)
def _cup(i: int, u: Word, v: Word, mode: str, conv: ConventionTable) -> CobarSum:
    if i == 0:
        return frozenset({u + v})
    if not u or not v or i >= len(u) + len(v) + (0 if mode == STABLE else i):
        # the unit is strict, and in stable mode ∪_i vanishes once s would drop below 1
        return frozenset()
    if len(u) == 1 and len(v) == 1:
        return frozenset((p,) for p in letter_cup(i - 1, u[0], v[0], mode, conv) if p != UNIT)
    if len(v) == 1:
        # (x1 x2) ∪_i [y] = (x1 ∪_i [y]) x2 + x1 (x2 ∪_i [y]), letter by letter
        out: set = set()
        for k in range(len(u)):
            for w in _cup(i, (u[k],), v, mode, conv):
                toggle(out, u[:k] + w + u[k + 1:])
        return frozenset(out)
    if len(u) == 1:
        return _letter_cup_word(i, u, v, mode, conv)
    return _word_cup_word(i, u, v, mode, conv)


def _letter_cup_word(i: int, x: Word, y: Word, mode: str, conv: ConventionTable) -> CobarSum:
    """[x] ∪_i Y solved from the Hirsch relation for Y ∪_{i+1} [x]."""
    out: set = set()
    yx = _cup(i + 1, y, x, mode, conv)
    for w in cobar_diff(yx, mode=mode):
        toggle(out, w)
    for w in _sum_cup(i + 1, cobar_diff(y, mode=mode), [x], mode, conv):
        toggle(out, w)
    for w in _sum_cup(i + 1, [y], cobar_diff(x, mode=mode), mode, conv):
        toggle(out, w)
    for w in _cup(i, y, x, mode, conv):
        toggle(out, w)
    return frozenset(out)


def _word_cup_word(i: int, u: Word, v: Word, mode: str, conv: ConventionTable) -> CobarSum:
    """(x1 x2) ∪_i (y1 y2) with x1, y1 the first letters."""
    x1, x2 = u[:1], u[1:]
    y1, y2 = v[:1], v[1:]
    out: set = set()

    def add(ws: Iterable[Word], left: Word = EMPTY, right: Word = EMPTY) -> None:
        for w in ws:
            toggle(out, left + w + right)

    for k in range(i + 1):
        a, b = (x1, y1) if k % 2 == 0 else (y1, x1)
        first = _cup(i - k, a, b, mode, conv)
        if not first:
            continue
        second = _cup(k, x2, y2, mode, conv)
        add(concat(first, second))
    add(_cup(i, x1, v, mode, conv), right=x2)
    add(_cup(i, x2, v, mode, conv), left=x1)
    add(_cup(i, u, y1, mode, conv), right=y2)
    add(_cup(i, u, y2, mode, conv), left=y1)
    for w in _cup(i, x2, y1, mode, conv):
        toggle(out, x1 + w + y2)
    for w in _cup(i, x1, y2, mode, conv):
        toggle(out, y1 + w + x2)
    return frozenset(out)


def cup1_iterated(u: Union[Word, Iterable[Word]], v: Union[Word, Iterable[Word]]) -> CobarSum:
    """Stable ∪1 from the iterated coproduct: [x]∪1[y1|..|ym] = Σ [x(1)y1|..|x(m)ym],
    extended to longer left words as a derivation. An independent check on cobar_cup at i = 1.
    """
    out: set = set()
    for a in as_sum(u):
        for b in as_sum(v):
            for k in range(len(a)):
                for t in _iterated_full(a[k], len(b)):
                    letters = tuple(mul(p, q) for p, q in zip(t, b))
                    toggle(out, a[:k] + letters + a[k + 1:])
    return frozenset(out)


@lru_cache(maxsize=None)
def _iterated_full(x: Mono, m: int) -> FrozenSet[Tuple[Mono, ...]]:
    terms: set = {(x,)}
    for _ in range(m - 1):
        new: set = set()
        for t in terms:
            for a, b in mono_coproduct(t[-1], STABLE):
                toggle(new, t[:-1] + (a, b))
        terms = new
    return frozenset(terms)


def hirsch_defect(i: int, u: Union[Word, Iterable[Word]], v: Union[Word, Iterable[Word]], mode: str = STABLE,
                  conv: ConventionTable = DEFAULT) -> CobarSum:
    """d(u∪_i v) + du∪_i v + u∪_i dv + u∪_{i-1}v + v∪_{i-1}u; zero when the relation holds."""
    u, v = as_sum(u), as_sum(v)
    out: set = set()
    for part in (cobar_diff(cobar_cup(i, u, v, mode, conv), mode=mode),
                 cobar_cup(i, cobar_diff(u, mode=mode), v, mode, conv),
                 cobar_cup(i, u, cobar_diff(v, mode=mode), mode, conv)):
        for w in part:
            toggle(out, w)
    if i >= 1:
        for part in (cobar_cup(i - 1, u, v, mode, conv), cobar_cup(i - 1, v, u, mode, conv)):
            for w in part:
                toggle(out, w)
    return frozenset(out)


def h(n: int) -> Word:
    """h_n = [xi1^{2^n}]."""
    return ((0, 1 << n),)


# homology

@dataclass
class Cell:
    s: int
    t: int
    dim: int
    reps: List[CobarSum]

    @property
    def stem(self) -> int:
        return self.t - self.s

    def as_dict(self) -> dict:
        return {"s": self.s, "t": self.t, "stem": self.stem, "dim": self.dim,
                "reps": [format_sum(r) for r in self.reps]}


def diff_matrix(s: int, t: int, mode: str = STABLE, a_inf: AInfinityData = STRICT,
                max_xi0: int = 1) -> Tuple[F2Matrix, List[Word], List[Word]]:
    """Matrix of d from bidegree (s, t) to (s + 1, t) with its row and column bases."""
    src = words(s, t, mode, max_xi0)
    tgt = words(s + 1, t, mode, max_xi0)
    index = {w: j for j, w in enumerate(tgt)}
    cols = []
    for w in src:
        v = 0
        for x in cobar_diff(w, a_inf, mode):
            v ^= 1 << index[x]
        cols.append(v)
    return F2Matrix.from_columns(len(tgt), cols), src, tgt


def cobar_homology(max_t: int, max_s: int, a_inf: AInfinityData = STRICT, mode: str = STABLE,
                   max_stem: Optional[int] = None, max_xi0: int = 1) -> Dict[Tuple[int, int], Cell]:
    """Homology of the cobar construction on the window s <= max_s, t <= max_t (and stem <= max_stem)."""
    cells: Dict[Tuple[int, int], Cell] = {}
    for t in range(max_t + 1):
        for s in range(max_s + 1):
            if max_stem is not None and t - s > max_stem:
                continue
            if mode == STABLE and s > t:
                continue
            d_out, src, _ = diff_matrix(s, t, mode, a_inf, max_xi0)
            if s == 0:
                d_in = F2Matrix.zero(len(src), 0)
            else:
                d_in, _, _ = diff_matrix(s - 1, t, mode, a_inf, max_xi0)
            _, reps = homology_basis(d_out, d_in)
            if reps or (s, t) == (0, 0):
                cells[(s, t)] = Cell(s, t, len(reps), [frozenset(src[j] for j in bits(r)) for r in reps])
    return cells


def homology_dims(cells: Mapping[Tuple[int, int], Cell]) -> Dict[Tuple[int, int], int]:
    return {k: c.dim for k, c in sorted(cells.items()) if c.dim}
