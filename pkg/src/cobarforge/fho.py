"""Functional homology operations over F2 and the E(2, -) model.

A functional operation H(f^n, ..., f^1) = η∘f^n∘h∘…∘h∘f^1∘ξ is built from a
strong deformation retract (ξ, η, h) of each complex onto its homology.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .gf2 import (Echelon, F2Matrix, GradedComplexF2, bits, homology_basis, image_basis,
                  kernel_basis, solve)


class GradedMap:
    """Per-degree matrices from source degree n to target degree n + shift."""

    def __init__(self, source: GradedComplexF2, target: GradedComplexF2, shift: int,
                 mats: Optional[Dict[int, F2Matrix]] = None):
        self.source, self.target, self.shift = source, target, shift
        self.mats: Dict[int, F2Matrix] = {}
        for n, m in (mats or {}).items():
            want = (target.dim(n + shift), source.dim(n))
            if (m.nrows, m.ncols) != want:
                raise ValueError(f"map block in degree {n} has shape {m.nrows}x{m.ncols}, expected {want[0]}x{want[1]}")
            if not m.is_zero():
                self.mats[n] = m

    def matrix(self, n: int) -> F2Matrix:
        m = self.mats.get(n)
        return m if m is not None else F2Matrix.zero(self.target.dim(n + self.shift), self.source.dim(n))

    def degrees(self) -> range:
        return self.source.degrees()

    def __matmul__(self, other: "GradedMap") -> "GradedMap":
        if other.target is not self.source:
            raise ValueError("composition of maps with mismatched complexes")
        mats = {n: self.matrix(n + other.shift) @ other.matrix(n) for n in other.degrees()}
        return GradedMap(other.source, self.target, self.shift + other.shift, mats)

    def __add__(self, other: "GradedMap") -> "GradedMap":
        if (other.source, other.target, other.shift) != (self.source, self.target, self.shift):
            raise ValueError("sum of maps with different shapes")
        return GradedMap(self.source, self.target, self.shift,
                         {n: self.matrix(n) + other.matrix(n) for n in self.degrees()})

    def is_zero(self) -> bool:
        return not self.mats

    def __eq__(self, other) -> bool:
        return isinstance(other, GradedMap) and (self + other).is_zero()

    __hash__ = None


def identity_map(c: GradedComplexF2) -> GradedMap:
    return GradedMap(c, c, 0, {n: F2Matrix.identity(c.dim(n)) for n in c.degrees()})


def zero_map(s: GradedComplexF2, t: GradedComplexF2, shift: int = 0) -> GradedMap:
    return GradedMap(s, t, shift)


def differential(c: GradedComplexF2) -> GradedMap:
    return GradedMap(c, c, -1, {n: c.d(n) for n in c.degrees()})


def is_chain_map(f: GradedMap) -> bool:
    return (differential(f.target) @ f + f @ differential(f.source)).is_zero()


def graded_module(dims: Dict[int, int], prefix: str = "y") -> GradedComplexF2:
    return GradedComplexF2({n: [f"{prefix}{n}.{j}" for j in range(k)] for n, k in dims.items()})


@dataclass
class SDRData:
    complex: GradedComplexF2
    homology: GradedComplexF2
    xi: GradedMap
    eta: GradedMap
    h: GradedMap


def check_sdr(s: SDRData) -> Dict[str, bool]:
    d = differential(s.complex)
    one = identity_map(s.complex)
    return {
        "eta_xi": s.eta @ s.xi == identity_map(s.homology),
        "dh": d @ s.h + s.h @ d == s.xi @ s.eta + one,
        "h_xi": (s.h @ s.xi).is_zero(),
        "eta_h": (s.eta @ s.h).is_zero(),
        "h_h": (s.h @ s.h).is_zero(),
        "xi_chain": is_chain_map(s.xi),
        "eta_chain": is_chain_map(s.eta),
    }


def make_sdr(x: GradedComplexF2) -> SDRData:
    """Split each C_n = B_n ⊕ H_n ⊕ W_n and read ξ, η, h off the splitting.

    B_n = boundaries, H_n = representatives chosen in basis order, W_n a
    complement of the cycles spanned by basis vectors in order; h sends a
    boundary b to the unique w in W_{n+1} with dw = b and kills H and W.
    """
    reps: Dict[int, List[int]] = {}
    bnd: Dict[int, List[int]] = {}
    comp: Dict[int, List[int]] = {}
    for n in x.degrees():
        bnd[n] = image_basis(x.d(n + 1))
        _, reps[n] = homology_basis(x.d(n), x.d(n + 1))
        e = Echelon()
        for z in kernel_basis(x.d(n)):
            e.add(z)
        comp[n] = [1 << j for j in range(x.dim(n)) if e.add(1 << j)]
    hom = GradedComplexF2({n: [f"H{n}.{j}" for j in range(len(reps[n]))] for n in x.degrees()})
    xi_m, eta_m, h_m = {}, {}, {}
    for n in x.degrees():
        xi_m[n] = F2Matrix.from_columns(x.dim(n), reps[n])
        basis = bnd[n] + reps[n] + comp[n]
        e = Echelon()
        for v in basis:
            e.add(v)
        nb, nh = len(bnd[n]), len(reps[n])
        eta_cols, h_cols = [], []
        dw = F2Matrix.from_columns(x.dim(n), [x.d(n + 1).apply(w) for w in comp.get(n + 1, [])])
        lift = [solve(dw, b) for b in bnd[n]]
        for j in range(x.dim(n)):
            _, combo = e.reduce(1 << j)
            eta_cols.append((combo >> nb) & ((1 << nh) - 1))
            out = 0
            for k in bits(combo & ((1 << nb) - 1)):
                for c in bits(lift[k]):
                    out ^= comp[n + 1][c]
            h_cols.append(out)
        eta_m[n] = F2Matrix.from_columns(nh, eta_cols)
        h_m[n] = F2Matrix.from_columns(x.dim(n + 1), h_cols)
    return SDRData(x, hom, GradedMap(hom, x, 0, xi_m), GradedMap(x, hom, 0, eta_m), GradedMap(x, x, 1, h_m))


def normalize_homotopy(s: SDRData) -> SDRData:
    """Given any h with dh + hd = ξη - 1, enforce hξ = 0, ηh = 0, hh = 0."""
    d = differential(s.complex)
    p = s.xi @ s.eta + identity_map(s.complex)
    h = p @ s.h @ p
    h = h @ d @ h
    return SDRData(s.complex, s.homology, s.xi, s.eta, h)


def _check_chain(sdrs: Sequence[SDRData], maps: Sequence[GradedMap]) -> None:
    if len(sdrs) != len(maps) + 1:
        raise ValueError(f"need {len(maps) + 1} retracts for {len(maps)} maps, got {len(sdrs)}")
    for k, f in enumerate(maps):
        if f.source is not sdrs[k].complex or f.target is not sdrs[k + 1].complex:
            raise ValueError(f"map f^{k + 1} does not run between the complexes of retracts {k + 1} and {k + 2}")


def fho_compose(sdrs: Sequence[SDRData], maps: Sequence[GradedMap]) -> GradedMap:
    """H(f^n, ..., f^1) = η∘f^n∘h∘f^{n-1}∘…∘h∘f^1∘ξ."""
    _check_chain(sdrs, maps)
    acc = maps[0] @ sdrs[0].xi
    for k in range(1, len(maps)):
        acc = maps[k] @ (sdrs[k].h @ acc)
    return sdrs[-1].eta @ acc


def coherence_residual(sdrs: Sequence[SDRData], maps: Sequence[GradedMap]) -> GradedMap:
    """Σ H(…, f^{i+1}∘f^i, …) + Σ H(f^n..f^{i+1})∘H(f^i..f^1); zero for chain maps."""
    _check_chain(sdrs, maps)
    n = len(maps)
    src, tgt = sdrs[0].homology, sdrs[-1].homology
    res = zero_map(src, tgt, sum(f.shift for f in maps) + n - 2)
    for i in range(1, n):
        merged = list(maps[:i - 1]) + [maps[i] @ maps[i - 1]] + list(maps[i + 1:])
        res = res + fho_compose(list(sdrs[:i]) + list(sdrs[i + 1:]), merged)
        res = res + fho_compose(sdrs[i:], maps[i:]) @ fho_compose(sdrs[:i + 1], maps[:i])
    return res


def random_complex(rng: random.Random, max_basis: int = 8, degrees: int = 3) -> GradedComplexF2:
    dims = [0] * degrees
    for _ in range(rng.randint(1, max_basis)):
        dims[rng.randrange(degrees)] += 1
    diffs = {}
    for n in range(1, degrees):
        prev = diffs.get(n - 1)
        ker = kernel_basis(prev) if prev is not None else [1 << j for j in range(dims[n - 1])]
        cols = []
        for _ in range(dims[n]):
            v = 0
            for z in ker:
                if rng.random() < 0.5:
                    v ^= z
            cols.append(v)
        diffs[n] = F2Matrix.from_columns(dims[n - 1], cols)
    return GradedComplexF2({n: [f"c{n}.{j}" for j in range(dims[n])] for n in range(degrees)}, diffs)


def random_chain_map(rng: random.Random, s: GradedComplexF2, t: GradedComplexF2) -> GradedMap:
    """Uniform-ish random element of the space of degree-0 chain maps s -> t."""
    slots = []  # (degree, row, col)
    for n in s.degrees():
        for r in range(t.dim(n)):
            for c in range(s.dim(n)):
                slots.append((n, r, c))
    if not slots:
        return zero_map(s, t)

    def to_map(v: int) -> GradedMap:
        rows: Dict[int, List[int]] = {n: [0] * s.dim(n) for n in s.degrees()}
        for k in bits(v):
            n, r, c = slots[k]
            rows[n][c] |= 1 << r
        return GradedMap(s, t, 0, {n: F2Matrix.from_columns(t.dim(n), cols) for n, cols in rows.items()})

    # constraint columns: one per slot, image of the unit map in the stacked equations
    cols = []
    for k in range(len(slots)):
        f = to_map(1 << k)
        eq = differential(t) @ f + f @ differential(s)
        v, off = 0, 0
        for n in s.degrees():
            m = eq.matrix(n)
            for c in m.cols:
                v |= c << off
                off += m.nrows
        cols.append(v)
    height = max((c.bit_length() for c in cols), default=0)
    ker = kernel_basis(F2Matrix.from_columns(height, cols))
    v = 0
    for z in ker:
        if rng.random() < 0.5:
            v ^= z
    return to_map(v)


# the p, q, r composite on modules with ordered bases

def bracket_chain(maps: Sequence[F2Matrix]) -> F2Matrix:
    """(f^n, ..., f^1) = p∘(f^n)^{⊗2}∘r∘…∘r∘(f^1)^{⊗2}∘q, basis order = index order."""
    if not maps:
        raise ValueError("need at least one map")
    for a, b in zip(maps, maps[1:]):
        if b.ncols != a.nrows:
            raise ValueError("consecutive maps do not compose")
    cols = []
    for j in range(maps[0].ncols):
        cols.append(_bracket_vector(maps, 1 << j))
    return F2Matrix.from_columns(maps[-1].nrows, cols)


def _bracket_vector(maps: Sequence[F2Matrix], x: int) -> int:
    s = bits(maps[0].apply(x))
    if len(maps) == 1:
        return vec_from(s)
    pairs: Set[Tuple[int, int]] = {(a, b) for a, b in itertools.combinations(s, 2)}
    for f in maps[1:-1]:
        new: Set[Tuple[int, int]] = set()
        for a, b in pairs:
            for c in bits(f.cols[a]):
                for d in bits(f.cols[b]):
                    if c > d:
                        new ^= {(d, c)}
        pairs = new
    last = maps[-1]
    out = 0
    for a, b in pairs:
        out ^= last.cols[a] & last.cols[b]
    return out


def vec_from(idx: Sequence[int]) -> int:
    v = 0
    for i in idx:
        v ^= 1 << i
    return v


# E(2, -): chain elements are sets of (i, u, v) = e_i ⊗ u ⊗ v over a flattened basis;
# homology classes are ("e", j, y) for e_j × y and ("p", y1, y2) for y1·y2, y1 < y2.

E2Chain = FrozenSet[Tuple[int, int, int]]
E2Class = FrozenSet[Tuple]


class Flat:
    """Flattened basis of a graded complex: global index ordered by (degree, position)."""

    def __init__(self, c: GradedComplexF2):
        self.c = c
        self.index: Dict[Tuple[int, int], int] = {}
        self.labels: List[Tuple[int, int]] = []
        for n in c.degrees():
            for j in range(c.dim(n)):
                self.index[(n, j)] = len(self.labels)
                self.labels.append((n, j))

    def __len__(self) -> int:
        return len(self.labels)

    def linear(self, f: GradedMap, target: "Flat") -> List[int]:
        """Images of basis vectors as global bitsets in the target."""
        out = []
        for n, j in self.labels:
            col = f.matrix(n).cols[j]
            out.append(vec_from(target.index[(n + f.shift, r)] for r in bits(col)))
        return out

    def matrix(self, f: GradedMap, target: "Flat") -> F2Matrix:
        return F2Matrix.from_columns(len(target), self.linear(f, target))


def _toggle(acc: Set, x) -> None:
    if x in acc:
        acc.remove(x)
    else:
        acc.add(x)


def _e2_apply(elem, fx: List[int], fy: Optional[List[int]] = None) -> Set:
    """e_i ⊗ u ⊗ v ↦ e_i ⊗ f(u) ⊗ g(v)."""
    fy = fx if fy is None else fy
    out: Set = set()
    for i, u, v in elem:
        for a in bits(fx[u]):
            for b in bits(fy[v]):
                _toggle(out, (i, a, b))
    return out


def e2_square(i: int, y: int) -> E2Class:
    return frozenset({("e", i, y)})


def e2_times(j: int, z: int) -> Set:
    """e_j × z for a homology vector z.

    Linear in z for every j: for j = 0 the cross terms y_a⊗y_b + y_b⊗y_a
    are twice y_a·y_b in the symmetric quotient.
    """
    return {("e", j, y) for y in bits(z)}


def _subdivisions(n: int):
    """Ways to cut (f^1, ..., f^n) into consecutive nonempty blocks."""
    for cuts in itertools.product((0, 1), repeat=n - 1):
        blocks, start = [], 0
        for k, c in enumerate(cuts, start=1):
            if c:
                blocks.append((start, k))
                start = k
        blocks.append((start, n))
        yield blocks


def e2_fho_closed(i: int, x: int, maps: Sequence[GradedMap], sdrs: Optional[Sequence[SDRData]] = None,
                  direction: str = "underline") -> E2Class:
    """Closed form: Σ over subdivisions of e_{i+m} × (g^{m+1}, …, g^1)(x).

    The g are functional operations of the consecutive blocks on homology;
    x is a global index in the flattened homology of the first complex.
    With zero differentials only the all-singleton subdivision survives.
    """
    if direction not in ("underline", "overline"):
        raise ValueError("direction must be 'underline' or 'overline'")
    if sdrs is None:
        sdrs = [make_sdr(maps[0].source)] + [make_sdr(f.target) for f in maps]
    _check_chain(sdrs, maps)
    flats = [Flat(s.homology) for s in sdrs]
    out: Set = set()
    for blocks in _subdivisions(len(maps)):
        mats = []
        for a, b in blocks:
            g = fho_compose(sdrs[a:b + 1], maps[a:b])
            mats.append(flats[a].matrix(g, flats[b]))
        m = len(blocks) - 1
        z = _bracket_vector(mats, 1 << x)
        if direction == "underline":
            out ^= e2_times(i + m, z)
        elif i >= m:
            out ^= e2_times(i - m, z)
    return frozenset(out)


class E2Retract:
    """The composite SDR between E(2, X) and E_*(2, X_*) built from (ξ, η, h) of X."""

    def __init__(self, s: SDRData):
        self.s = s
        self.fc = Flat(s.complex)
        self.fh = Flat(s.homology)
        self.xi = self.fh.linear(s.xi, self.fc)
        self.eta = self.fc.linear(s.eta, self.fh)
        self.h = self.fc.linear(s.h, self.fc)
        self.d = self.fc.linear(differential(s.complex), self.fc)
        n = len(self.fc)
        self.xieta = [self._compose(self.xi, self.eta[u]) for u in range(n)]

    @staticmethod
    def _compose(f: List[int], v: int) -> int:
        out = 0
        for k in bits(v):
            out ^= f[k]
        return out

    # maps between E(2, X) and E(2, X_*)
    def E_xi(self, elem) -> Set:
        return _e2_apply(elem, self.xi)

    def E_eta(self, elem) -> Set:
        return _e2_apply(elem, self.eta)

    def E_h(self, elem) -> Set:
        """e_i⊗(x1⊗h x2 + h x1⊗ξη x2) + e_{i-1}⊗h x2⊗h x1."""
        out: Set = set()
        ident = [1 << u for u in range(len(self.fc))]
        for i, u, v in elem:
            one = {(i, u, v)}
            out ^= _e2_apply(one, ident, self.h)
            out ^= _e2_apply(one, self.h, self.xieta)
            if i >= 1:
                # e_{i-1} ⊗ h(x2) ⊗ h(x1): the transposed order is what makes dK + Kd = 1 + E(ξη)
                out ^= _e2_apply({(i - 1, v, u)}, self.h)
        return out

    # maps between E(2, X_*) and its homology
    @staticmethod
    def xi_E(cls_elem) -> Set:
        out: Set = set()
        for c in cls_elem:
            if c[0] == "e":
                _toggle(out, (c[1], c[2], c[2]))
            else:
                _toggle(out, (0, c[1], c[2]))
        return out

    @staticmethod
    def eta_E(elem) -> Set:
        out: Set = set()
        for i, a, b in elem:
            if a == b:
                _toggle(out, ("e", i, a))
            elif i == 0:
                _toggle(out, ("p", min(a, b), max(a, b)))
        return out

    @staticmethod
    def h_E(elem) -> Set:
        out: Set = set()
        for i, a, b in elem:
            if a > b:
                _toggle(out, (i + 1, b, a))
        return out

    def incl(self, cls_elem) -> Set:
        return self.E_xi(self.xi_E(cls_elem))

    def proj(self, elem) -> Set:
        return self.eta_E(self.E_eta(elem))

    def homotopy(self, elem) -> Set:
        return self.E_xi(self.h_E(self.E_eta(elem))) ^ self.E_h(elem)

    def d_chain(self, elem) -> Set:
        """d(e_i ⊗ u ⊗ v) = e_{i-1}(u⊗v + v⊗u) + e_i(du ⊗ v + u ⊗ dv)."""
        out: Set = set()
        ident = [1 << u for u in range(len(self.fc))]
        for i, u, v in elem:
            if i >= 1:
                _toggle(out, (i - 1, u, v))
                _toggle(out, (i - 1, v, u))
            out ^= _e2_apply({(i, u, v)}, self.d, ident)
            out ^= _e2_apply({(i, u, v)}, ident, self.d)
        return out


def e2_fho_direct(i: int, x: int, maps: Sequence[GradedMap], sdrs: Optional[Sequence[SDRData]] = None,
                  max_e: Optional[int] = None) -> E2Class:
    """The functional operation computed on the chain level of E(2, X^k)."""
    if sdrs is None:
        sdrs = [make_sdr(maps[0].source)] + [make_sdr(f.target) for f in maps]
    _check_chain(sdrs, maps)
    n = len(maps)
    bound = i + n if max_e is None else max_e
    rets = [E2Retract(s) for s in sdrs]
    elem = rets[0].incl({("e", i, x)})
    for k, f in enumerate(maps):
        fl = rets[k].fc.linear(f, rets[k + 1].fc)
        elem = _e2_apply(elem, fl)
        if k < n - 1:
            elem = rets[k + 1].homotopy(elem)
        for e, _, _ in elem:
            if e > bound:
                raise ValueError(f"e-index {e} exceeds the window bound {bound}")
    return frozenset(rets[-1].proj(elem))
