import random

import pytest
from hypothesis import given, settings, strategies as st

from cobarforge.fho import (E2Retract, F2Matrix, Flat, GradedMap, SDRData, bracket_chain, check_sdr,
                            coherence_residual, differential, e2_fho_closed, e2_fho_direct,
                            fho_compose, graded_module, identity_map, is_chain_map, make_sdr,
                            normalize_homotopy, random_chain_map, random_complex)
from cobarforge.gf2 import GradedComplexF2


def chain_of(rng, n, max_basis=4):
    xs = [random_complex(rng, max_basis) for _ in range(n + 1)]
    maps = [random_chain_map(rng, xs[k], xs[k + 1]) for k in range(n)]
    return [make_sdr(x) for x in xs], maps


def random_module_map(rng, s, t):
    return GradedMap(s, t, 0, {d: F2Matrix.from_columns(t.dim(d), [rng.getrandbits(t.dim(d)) for _ in range(s.dim(d))])
                               for d in s.degrees()})


def test_sdr_side_conditions_random():
    rng = random.Random(0)
    for _ in range(200):
        s = make_sdr(random_complex(rng, 8))
        assert all(check_sdr(s).values())


def test_sdr_on_acyclic_pair():
    x = GradedComplexF2({0: ["a"], 1: ["b"]}, {1: F2Matrix.from_rows([[1]])})
    s = make_sdr(x)
    assert s.homology.dim(0) == s.homology.dim(1) == 0
    assert s.h.matrix(0).to_rows() == [[1]]
    assert all(check_sdr(s).values())


@given(st.integers(0, 10 ** 6))
@settings(max_examples=40, deadline=None)
def test_normalize_homotopy_restores_conditions(seed):
    rng = random.Random(seed)
    s = make_sdr(random_complex(rng, 6))
    d = differential(s.complex)
    k = GradedMap(s.complex, s.complex, 2,
                  {n: F2Matrix.from_columns(s.complex.dim(n + 2), [rng.getrandbits(s.complex.dim(n + 2))
                                                                    for _ in range(s.complex.dim(n))])
                   for n in s.complex.degrees()})
    bent = SDRData(s.complex, s.homology, s.xi, s.eta, s.h + d @ k + k @ d)
    assert check_sdr(bent)["dh"]
    assert all(check_sdr(normalize_homotopy(bent)).values())


def test_fho_single_map_is_induced_map():
    rng = random.Random(1)
    for _ in range(30):
        sdrs, maps = chain_of(rng, 1)
        g = fho_compose(sdrs, maps)
        assert g == sdrs[1].eta @ maps[0] @ sdrs[0].xi


@pytest.mark.parametrize("n", [2, 3, 4])
def test_coherence_residual_vanishes(n):
    rng = random.Random(n)
    for _ in range(60):
        sdrs, maps = chain_of(rng, n, 6 if n < 4 else 4)
        assert coherence_residual(sdrs, maps).is_zero()


def test_coherence_residual_detects_non_chain_map():
    rng = random.Random(5)
    for _ in range(500):
        sdrs, maps = chain_of(rng, 3)
        x1, x2 = sdrs[1].complex, sdrs[2].complex
        bad = maps[1] + random_module_map(rng, x1, x2)
        if is_chain_map(bad):
            continue
        if not coherence_residual(sdrs, [maps[0], bad, maps[2]]).is_zero():
            return
    pytest.fail("no failing instance found")


def test_secondary_operation_nonzero_on_small_complex():
    """Exhaustive search: some pair of chain maps with f2∘f1 = 0 has H(f2, f1) != 0."""
    rng = random.Random(7)
    for _ in range(2000):
        sdrs, maps = chain_of(rng, 2, 3)
        if (maps[1] @ maps[0]).is_zero() and not fho_compose(sdrs, maps).is_zero():
            return
    pytest.fail("no nonzero secondary operation found")


def test_explicit_secondary_operation():
    # X = F2 in degree 0, Y = (a, b; db = a) acyclic, Z = F2 in degree 1
    x = graded_module({0: 1, 1: 0})
    y = GradedComplexF2({0: ["a"], 1: ["b"]}, {1: F2Matrix.from_rows([[1]])})
    z = graded_module({0: 0, 1: 1})
    f1 = GradedMap(x, y, 0, {0: F2Matrix.from_rows([[1]])})
    f2 = GradedMap(y, z, 0, {1: F2Matrix.from_rows([[1]])})
    assert is_chain_map(f1) and is_chain_map(f2)
    g = fho_compose([make_sdr(x), make_sdr(y), make_sdr(z)], [f1, f2])
    assert g.shift == 1 and g.matrix(0).to_rows() == [[1]]


def test_bracket_single_map_is_map():
    rng = random.Random(2)
    for _ in range(50):
        f = F2Matrix.from_columns(4, [rng.getrandbits(4) for _ in range(3)])
        assert bracket_chain([f]) == f


def test_bracket_identity_pair_vanishes():
    one = F2Matrix.identity(3)
    assert bracket_chain([one, one]).is_zero()


def test_bracket_swap_then_identity_vanishes():
    # a basis swap sends every vector to a single basis vector, so r has nothing to keep
    swap = F2Matrix.from_columns(2, [0b10, 0b01])
    assert bracket_chain([swap, F2Matrix.identity(2)]).is_zero()


def test_bracket_sum_then_collapse():
    f1 = F2Matrix.from_columns(2, [0b11])      # x -> a + b
    f2 = F2Matrix.from_columns(1, [1, 1])      # a, b -> c
    assert bracket_chain([f1, f2]).to_rows() == [[1]]
    assert bracket_chain([f1, F2Matrix.identity(2)]).is_zero()


def module_chain(rng, n, max_dim=3, degrees=2):
    ms = [graded_module({d: rng.randint(0, max_dim) for d in range(degrees)}) for _ in range(n + 1)]
    maps = [random_module_map(rng, ms[k], ms[k + 1]) for k in range(n)]
    return [make_sdr(m) for m in ms], maps


@pytest.mark.parametrize("n", [1, 2, 3])
def test_closed_matches_direct_on_modules(n):
    rng = random.Random(100 + n)
    checked = 0
    for _ in range(150):
        sdrs, maps = module_chain(rng, n)
        for x in range(len(Flat(sdrs[0].homology))):
            for i in range(4):
                assert e2_fho_closed(i, x, maps, sdrs) == e2_fho_direct(i, x, maps, sdrs)
                checked += 1
    assert checked > 500


def test_closed_matches_direct_single_map_on_complexes():
    rng = random.Random(9)
    for _ in range(100):
        sdrs, maps = chain_of(rng, 1)
        for x in range(len(Flat(sdrs[0].homology))):
            for i in range(3):
                assert e2_fho_closed(i, x, maps, sdrs) == e2_fho_direct(i, x, maps, sdrs)


@pytest.mark.xfail(reason="subdivision formula and chain-level model disagree on some complexes with n >= 2",
                   strict=True)
def test_closed_matches_direct_on_complexes():
    rng = random.Random(11)
    for _ in range(500):
        n = rng.randint(2, 3)
        sdrs, maps = chain_of(rng, n, 5)
        for x in range(len(Flat(sdrs[0].homology))):
            for i in range(3):
                assert e2_fho_closed(i, x, maps, sdrs) == e2_fho_direct(i, x, maps, sdrs)


def test_closed_single_map_underline():
    m = graded_module({0: 2})
    f = GradedMap(m, m, 0, {0: F2Matrix.from_columns(2, [0b11, 0b10])})
    s = make_sdr(m)
    assert e2_fho_closed(2, 0, [f], [s, s]) == {("e", 2, 0), ("e", 2, 1)}


def test_closed_overline_low_index_vanishes():
    rng = random.Random(4)
    sdrs, maps = module_chain(rng, 3, 3, 1)
    for x in range(len(Flat(sdrs[0].homology))):
        assert e2_fho_closed(1, x, maps, sdrs, direction="overline") == frozenset()


def test_closed_rejects_bad_direction():
    s = make_sdr(graded_module({0: 1}))
    with pytest.raises(ValueError):
        e2_fho_closed(0, 0, [identity_map(s.complex)], [s, s], direction="sideways")


def test_direct_window_bound():
    s = make_sdr(graded_module({0: 1}))
    f = identity_map(s.complex)
    with pytest.raises(ValueError, match="window bound"):
        e2_fho_direct(3, 0, [f], [s, s], max_e=2)


def test_h_of_E_spot_value():
    assert E2Retract.h_E({(0, 1, 0)}) == {(1, 0, 1)}
    assert E2Retract.h_E({(0, 0, 1)}) == set()


def e2_basis(r, top):
    n = len(r.fc)
    return [(i, u, v) for i in range(top + 1) for u in range(n) for v in range(n)]


def test_e2_composite_retract_conditions():
    rng = random.Random(3)
    top = 3
    for _ in range(40):
        r = E2Retract(make_sdr(random_complex(rng, 4)))
        for el in e2_basis(r, top):
            e = {el}
            k = r.homotopy(e)
            assert not r.proj(k)
            if el[0] < top:
                assert r.d_chain(k) ^ r.homotopy(r.d_chain(e)) == r.incl(r.proj(e)) ^ e
                assert not r.proj(r.d_chain(e))
            if el[0] < top - 1:
                assert not r.homotopy(k)
        nh = len(r.fh)
        classes = [{("e", i, y)} for i in range(top + 1) for y in range(nh)]
        classes += [{("p", a, b)} for a in range(nh) for b in range(a + 1, nh)]
        for c in classes:
            assert r.proj(r.incl(c)) == c
            assert not r.homotopy(r.incl(c))
            assert not r.d_chain(r.incl(c))
