"""Acceptance suite: one PASS/FAIL line per criterion, printed even under output capture."""
import json
import os
import subprocess
import sys
import time

from cobarforge import cobar, may, verify
from cobarforge.conventions import DEFAULT
from oracles import d1_matrix, oracle_letters, oracle_matrix, oracle_words, rank_mod2


def report(capsys, n, ok, summary, seconds):
    with capsys.disabled():
        print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} ({seconds:.1f}s, conventions {DEFAULT.hash}) {summary}")


def flags(check):
    return ", ".join(f"{k[:-3]}={'ok' if v else 'FAIL'}" for k, v in check.details.items() if k.endswith("_ok"))


def run_check(capsys, n, check, budget, extra=""):
    ok = check.ok and check.seconds < budget
    report(capsys, n, ok, flags(check) + extra, check.seconds)
    assert check.ok, json.dumps(check.as_dict(), sort_keys=True, ensure_ascii=False)[:2000]
    assert check.seconds < budget


def test_criterion_01_coalgebra(capsys):
    run_check(capsys, 1, verify.coalgebra(20), 60)


def test_criterion_02_e_relations(capsys):
    run_check(capsys, 2, verify.thm10(10, 12), 120)


def test_criterion_03_generator_tables(capsys):
    run_check(capsys, 3, verify.thm11(3, 4), 60)


def test_criterion_04_psi(capsys):
    run_check(capsys, 4, verify.psi(4, 3), 120)


def test_criterion_05_fho(capsys):
    run_check(capsys, 5, verify.fho_suite(), 180)


def test_criterion_06_cobar(capsys):
    c = verify.cobar_suite()
    extra = f"; hirsch failures {c.details['hirsch_failures']}/{c.details['hirsch_sampled']}"
    run_check(capsys, 6, c, 300, extra)


def test_criterion_07_ext_window(capsys):
    start = time.perf_counter()
    s1 = verify.ext_s1(32)
    max_stem, max_s = 8, 5
    letters = oracle_letters(max_stem + max_s)
    got = cobar.homology_dims(cobar.cobar_homology(max_stem + max_s, max_s, max_stem=max_stem))
    want = {}
    for s in range(max_s + 1):
        for t in range(s, s + max_stem + 1):
            n = len(oracle_words(s, t, letters))
            if not n:
                continue
            out = rank_mod2(oracle_matrix(s, t, letters))
            inn = rank_mod2(oracle_matrix(s - 1, t, letters)) if s else 0
            if n - out - inn:
                want[(s, t)] = n - out - inn
    seconds = time.perf_counter() - start
    ok = s1.ok and got == want and seconds < 300
    report(capsys, 7, ok, f"s=1 classes at t={sorted(map(int, s1.details['s1']))}; "
                          f"oracle cells {len(want)} on stem<={max_stem}, s<={max_s}", seconds)
    assert s1.ok and got == want and seconds < 300


def test_criterion_08_d_hn(capsys):
    c = verify.thm22(4)
    rows = c.details["report"]["rows"]
    extra = "; " + "; ".join(f"n={r['n']} extra {r['extra_terms']} (∪1/∪2 discrepancy {r['cup_discrepancy']})"
                             for r in rows if r["extra_terms"] != "0")
    run_check(capsys, 8, c, 300, extra)


def test_criterion_09_star(capsys):
    run_check(capsys, 9, verify.star((3, 4, 5)), 180)


def test_criterion_10_h4_squared(capsys):
    start = time.perf_counter()
    c = verify.thm23(4)
    r = c.details["report"]
    # rank oracle: g0 h3 lies outside im d1 iff appending it raises the rank
    gh = may.sum_mul(may.g_class(4), may.gen_sum((1, 3)))
    src, tgt = may.ps_cell(28, 4), may.ps_cell(27, 5)
    oracle_vanishes = rank_mod2(d1_matrix(src, tgt, [gh])) == rank_mod2(d1_matrix(src, tgt))
    seconds = time.perf_counter() - start
    agree = oracle_vanishes == r["gh_vanishes_on_e2"]
    k5 = may.kervaire_pipeline(5)
    stretch = (f"; n=5 stretch: low_vanish={k5['low_vanish']}, g cycle={k5['g_is_d1_cycle']}, "
               f"d5 up to d1 boundary={k5['d5_matches_up_to_d1_boundary']}, g1h4 vanishes={k5['gh_vanishes_on_e2']}")
    extra = f"; rank oracle agrees={agree}" + stretch
    report(capsys, 10, c.ok and agree and seconds < 900, flags(c) + extra, seconds)
    assert agree
    assert c.ok, json.dumps(r, sort_keys=True)[:2000]


DETERMINISM_RUNS = [
    ["verify", "thm11", "--format", "json"],
    ["verify", "thm22", "--format", "json"],
    ["verify", "star", "--format", "json"],
    ["kervaire", "4", "--format", "json"],
    ["ext-chart", "--max-stem", "8", "--max-filt", "4", "--format", "json"],
    ["ext-chart", "--may-page", "2", "--max-stem", "10", "--max-filt", "4", "--format", "json"],
    ["may-d", "h4^2", "--format", "json"],
]


def _cli_bytes(argv, seed):
    env = dict(os.environ, PYTHONHASHSEED=str(seed))
    done = subprocess.run([sys.executable, "-m", "cobarforge.cli", *argv, "--no-cache"], env=env,
                          capture_output=True, timeout=600)
    return done.stdout


def test_criterion_11_determinism(capsys):
    start = time.perf_counter()
    differing, empty = [], []
    for argv in DETERMINISM_RUNS:
        first, second = _cli_bytes(argv, 1), _cli_bytes(argv, 2)
        if first != second:
            differing.append(" ".join(argv))
        if not first.strip() or not isinstance(json.loads(first), dict):
            empty.append(" ".join(argv))
    seconds = time.perf_counter() - start
    report(capsys, 11, not differing and not empty,
           f"{len(DETERMINISM_RUNS)} JSON artifacts under two hash seeds; differing: {differing or 'none'}", seconds)
    assert not differing and not empty
