"""Verification suites: each returns a Check with a PASS/FAIL verdict and JSON-ready details."""
from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

from . import cobar, fho, may
from .conventions import DEFAULT, ConventionTable
from .homology_ops import e_op, nabla_e_lhs, nabla_e_rhs, q_op
from .milnor import (STABLE, UNIT, UNSTABLE, coproduct, dim, format_mono, iterated_nabla, monomials, mul, norm,
                     poly_mul, psi_n, tensor_mul, toggle, xi)


@dataclass
class Check:
    name: str
    ok: bool
    details: Dict = field(default_factory=dict)
    conventions: str = DEFAULT.hash
    seconds: float = 0.0

    @property
    def verdict(self) -> str:
        return "PASS" if self.ok else "FAIL"

    def as_dict(self) -> Dict:
        return {"name": self.name, "verdict": self.verdict, "conventions": self.conventions,
                "details": self.details}


def _timed(name: str, conv: ConventionTable, body: Callable[[], Dict]) -> Check:
    start = time.perf_counter()
    details = body()
    ok = all(v for k, v in details.items() if k.endswith("_ok"))
    return Check(name, ok, details, conv.hash, time.perf_counter() - start)


def coalgebra(max_dim: int = 20, conv: ConventionTable = DEFAULT) -> Check:
    """Coassociativity on every monomial and ∇(g·m) = ∇g·∇m for every generator g dividing m."""
    def body():
        out = {}
        for mode in (STABLE, UNSTABLE):
            ms = monomials(max_dim, mode)
            bad_assoc, bad_mult = [], []
            for m in ms:
                left, right = set(), set()
                for a, b in coproduct(m, mode):
                    for a1, a2 in coproduct(a, mode):
                        toggle(left, (a1, a2, b))
                    for b1, b2 in coproduct(b, mode):
                        toggle(right, (a, b1, b2))
                if left != right:
                    bad_assoc.append(format_mono(m))
                for i, e in enumerate(m):
                    if not e or (mode == STABLE and i == 0):
                        continue
                    rest = norm(m[:i] + (e - 1,) + m[i + 1:])
                    if coproduct(m, mode) != tensor_mul(coproduct(xi(i), mode), coproduct(rest, mode)):
                        bad_mult.append(format_mono(m))
            out[mode] = {"monomials": len(ms), "coassociativity_failures": bad_assoc[:5],
                         "multiplicativity_failures": bad_mult[:5]}
            out[f"{mode}_ok"] = not bad_assoc and not bad_mult
        return out
    return _timed("coalgebra", conv, body)


def thm10(max_dim: int = 10, max_i: int = 12, conv: ConventionTable = DEFAULT) -> Check:
    """e_0(x) = x^2, the Cartan rule and ∇-compatibility with the xi0-cancellation reading."""
    def body():
        ms = monomials(max_dim)
        sq = [format_mono(m) for m in ms if e_op(0, m) != {mul(m, m)}]
        cartan, nabla = [], []
        for x, y in itertools.combinations_with_replacement(ms, 2):
            if x == UNIT or y == UNIT or dim(x) + dim(y) > max_dim:
                continue
            for i in range(max_i + 1):
                direct: set = set()
                for k in range(i + 1):
                    direct ^= set(poly_mul(e_op(k, x), e_op(i - k, y)))
                if e_op(i, mul(x, y)) != direct:
                    cartan.append([i, format_mono(x), format_mono(y)])
        for m in ms:
            for i in range(max_i + 1):
                if nabla_e_lhs(i, m) != nabla_e_rhs(i, m):
                    nabla.append([i, format_mono(m)])
        return {"monomials": len(ms), "square_failures": sq[:5], "cartan_failures": cartan[:5],
                "nabla_failures": nabla[:5], "square_ok": not sq, "cartan_ok": not cartan, "nabla_ok": not nabla}
    return _timed("thm10", conv, body)


def _table_rows(k: int, m_max: int):
    rows = {}
    for m in range(m_max + 1):
        for l in range(k + 1):
            if m == 0 and l != k:
                continue
            i = (1 << (m + k)) - (1 << (k + 1)) + (1 << l)
            rows.setdefault(i, set()).add(mul(xi(m + k), xi(l)))
    return rows


def thm11(max_k: int = 3, max_m: int = 4, conv: ConventionTable = DEFAULT) -> Check:
    """e_i(xi_k) and Q^j(xi_k) against the case table, including the zero rows."""
    def body():
        bad = []
        rows_checked = 0
        for k in range(max_k + 1):
            rows = _table_rows(k, max_m)
            top = max(rows)
            for i in range(top + 1):
                want = rows.get(i, set())
                rows_checked += 1
                if e_op(i, xi(k)) != want:
                    bad.append(["e", i, k])
                if q_op(i + (1 << k) - 1, xi(k)) != want:
                    bad.append(["Q", i + (1 << k) - 1, k])
            for j in range((1 << k) - 1):
                if q_op(j, xi(k)):
                    bad.append(["Q-excess", j, k])
        return {"rows": rows_checked, "failures": bad[:10], "table_ok": not bad}
    return _timed("thm11", conv, body)


def _psi1(n, m):
    out: set = set()
    for i, j in itertools.combinations(range(n + 1), 2):
        toggle(out, (mul(xi(n - i, 2 ** (i + m)), xi(n - j, 2 ** (j + m))), mul(xi(i, 2 ** m), xi(j, 2 ** m))))
    return frozenset(out)


def _psi2(n, m):
    out: set = set()
    for i, j in itertools.combinations(range(n + 1), 2):
        for k in range(i + 1):
            for l in range(min(k, j + 1)):
                toggle(out, (mul(xi(n - i, 2 ** (i + m)), xi(n - j, 2 ** (j + m))),
                             mul(xi(i - k, 2 ** (k + m)), xi(j - l, 2 ** (l + m))),
                             mul(xi(k, 2 ** m), xi(l, 2 ** m))))
    return frozenset(out)


def psi(max_n: int = 4, max_m: int = 3, conv: ConventionTable = DEFAULT) -> Check:
    """Ψ¹(xi_n^{2^m}) and Ψ²(xi_1^{2^m}) against the closed forms; iterated ∇ on powers for n = 2."""
    def body():
        bad1 = [[n, m] for n in range(1, max_n + 1) for m in range(max_m + 1)
                if psi_n(xi(n, 2 ** m), 1) != _psi1(n, m)]
        bad2 = [m for m in range(max_m + 1) if psi_n(xi(1, 2 ** m), 2) != _psi2(1, m)]
        bad3 = [[i, k, mode] for mode in (STABLE, UNSTABLE) for i in range(1, max_n + 1)
                for k in range(max_m + 1) if iterated_nabla(xi(i, 2 ** k), 2, mode)]
        return {"psi1_failures": bad1, "psi2_failures": bad2, "iterated_nabla_failures": bad3,
                "psi1_ok": not bad1, "psi2_ok": not bad2, "iterated_ok": not bad3}
    return _timed("psi", conv, body)


def fho_suite(seed: int = 0, conv: ConventionTable = DEFAULT) -> Check:
    """SDR side conditions, coherence for chain maps n ≤ 4, closed = direct on small modules."""
    def body():
        rng = random.Random(seed)
        sdr_bad = 0
        for _ in range(200):
            s = fho.make_sdr(fho.random_complex(rng, 8))
            sdr_bad += not all(fho.check_sdr(s).values())
        coh_bad = coh = 0
        for n in range(1, 5):
            for _ in range(40):
                xs = [fho.random_complex(rng, 5 if n < 4 else 4) for _ in range(n + 1)]
                maps = [fho.random_chain_map(rng, xs[k], xs[k + 1]) for k in range(n)]
                coh_bad += not fho.coherence_residual([fho.make_sdr(x) for x in xs], maps).is_zero()
                coh += 1
        agree = mismatch = 0
        for n in (1, 2, 3):
            for _ in range(150):
                ms = [fho.graded_module({d: rng.randint(0, 3) for d in range(2)}) for _ in range(n + 1)]
                maps = [fho.GradedMap(ms[k], ms[k + 1], 0,
                                      {d: fho.F2Matrix.from_columns(ms[k + 1].dim(d),
                                                                    [rng.getrandbits(ms[k + 1].dim(d))
                                                                     for _ in range(ms[k].dim(d))])
                                       for d in ms[k].degrees()}) for k in range(n)]
                sdrs = [fho.make_sdr(m) for m in ms]
                for x in range(len(fho.Flat(sdrs[0].homology))):
                    for i in range(4):
                        if fho.e2_fho_closed(i, x, maps, sdrs) == fho.e2_fho_direct(i, x, maps, sdrs):
                            agree += 1
                        else:
                            mismatch += 1
        return {"sdr_failures": sdr_bad, "coherence_checked": coh, "coherence_failures": coh_bad,
                "closed_direct_agree": agree, "closed_direct_mismatch": mismatch,
                "sdr_ok": sdr_bad == 0, "coherence_ok": coh_bad == 0, "closed_direct_ok": mismatch == 0 and agree > 0}
    return _timed("thm12", conv, body)


def cobar_suite(seed: int = 0, hirsch_samples: int = 300, conv: ConventionTable = DEFAULT) -> Check:
    """d² window, random Hirsch relation, shuffle coproduct, ∪0 and h_n ∪1 h_n."""
    def body():
        d2 = cobar.d_squared_window(24, 6)
        rng = random.Random(seed)
        pool = [w for t in range(1, 12) for s in range(1, 4) for w in cobar.words(s, t)]
        hirsch_bad = []
        tried = 0
        while tried < hirsch_samples:
            u, v, i = rng.choice(pool), rng.choice(pool), rng.randint(1, 3)
            if cobar.t_of(u) + cobar.t_of(v) > 12:
                continue
            tried += 1
            if cobar.hirsch_defect(i, u, v, conv=conv):
                hirsch_bad.append([i, cobar.format_word(u), cobar.format_word(v)])
        sh_bad = 0
        sh_words = [w for t in range(1, 9) for s in range(1, 5) for w in cobar.words(s, t)]
        for w in sh_words:
            d = cobar.shuffle_coproduct(w)
            if {(b, a) for a, b in d} != d or (w, ()) not in d or ((), w) not in d:
                sh_bad += 1
                continue
            left: set = set()
            right: set = set()
            for a, b in d:
                for a1, a2 in cobar.shuffle_coproduct(a):
                    toggle(left, (a1, a2, b))
                for b1, b2 in cobar.shuffle_coproduct(b):
                    toggle(right, (a, b1, b2))
            sh_bad += left != right
        small = [w for t in range(1, 6) for s in range(1, 3) for w in cobar.words(s, t)]
        cup0_bad = sum(cobar.cobar_cup(0, a, b) != {a + b} for a in small for b in small)
        hn_bad = [n for n in range(5) if cobar.cobar_cup(1, cobar.h(n), cobar.h(n)) != {cobar.h(n + 1)}]
        return {"d_squared": d2.as_dict(), "hirsch_sampled": tried, "hirsch_failures": len(hirsch_bad),
                "hirsch_first": hirsch_bad[:3], "shuffle_words": len(sh_words), "shuffle_failures": sh_bad,
                "cup0_failures": cup0_bad, "hn_cup1_failures": hn_bad,
                "d_squared_ok": d2.ok, "hirsch_ok": not hirsch_bad, "shuffle_ok": sh_bad == 0,
                "cup0_ok": cup0_bad == 0, "hn_ok": not hn_bad}
    return _timed("thm15", conv, body)


def ext_s1(max_t: int = 32, conv: ConventionTable = DEFAULT) -> Check:
    def body():
        cells = cobar.cobar_homology(max_t, 1)
        s1 = {t: c.dim for (s, t), c in cells.items() if s == 1 and c.dim}
        want = {t: 1 for t in (1, 2, 4, 8, 16, 32) if t <= max_t}
        return {"s1": {str(t): d for t, d in sorted(s1.items())}, "s1_ok": s1 == want}
    return _timed("ext", conv, body)


def thm22(max_n: int = 4, conv: ConventionTable = DEFAULT) -> Check:
    def body():
        r = may.thm22_report(max_n, conv)
        return {"report": r, "base_cases_ok": r["base_cases"], "closed_form_ok": r["ok"]}
    return _timed("thm22", conv, body)


def star(ns=(3, 4, 5), conv: ConventionTable = DEFAULT) -> Check:
    def body():
        rows = [may.star_check(n, conv) for n in ns]
        return {"rows": rows, "star_ok": all(r["ok"] for r in rows)}
    return _timed("star", conv, body)


def thm23(n: int = 4, conv: ConventionTable = DEFAULT) -> Check:
    def body():
        r = may.kervaire_pipeline(n, conv=conv)
        out = {"report": r, "complete_ok": not r["incomplete"], "low_vanish_ok": r["low_vanish"]}
        if not r["incomplete"]:
            out.update({"g_cycle_ok": r["g_is_d1_cycle"], "d5_ok": r["d5_matches_up_to_d1_boundary"],
                        "corollary_ok": r["gh_vanishes_on_e2"]})
        return out
    return _timed("thm23", conv, body)


SUITES: Dict[str, Callable[..., Check]] = {
    "coalgebra": coalgebra, "thm10": thm10, "thm11": thm11, "psi": psi, "thm12": fho_suite,
    "thm15": cobar_suite, "ext": ext_s1, "thm22": thm22, "star": star, "thm23": thm23,
}


def run_all(names: List[str] = None, conv: ConventionTable = DEFAULT) -> List[Check]:
    return [SUITES[n](conv=conv) for n in (names or list(SUITES))]
