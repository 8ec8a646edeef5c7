import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from btstrata import dieudonne as dd, hermitian_ff as hf, lattice as lt
from btstrata.acceptance import vertex_of_type
from btstrata.errors import InvalidSignatureParameters, NonSupersingularPattern, SignatureMismatch
from btstrata.ring import FieldCtx

F9 = hf.field(3)


def all_ok(space):
    return all(v["ok"] for v in dd.check_space_axioms(space).values())


def hermitian_curve_count(p, m):
    # maximal curve of genus p(p-1)/2 over F_{p^2}: every Frobenius eigenvalue is -p
    q = p * p
    return q ** m + 1 - p * (p - 1) * (-p) ** m


def test_elementary_spaces():
    S = dd.standard_space("S", F9)
    assert S.n == 1 and S.signature() == (0, 1)
    B1 = dd.standard_space("B", F9, d=1)
    assert B1.signature() == (1, 0)
    M01 = dd.standard_space("M", F9, sigma=0, n=1)
    assert np.array_equal(M01.Fm, B1.Fm) and np.array_equal(M01.pairing, B1.pairing)
    assert all_ok(dd.standard_space("M", F9, sigma=2, n=5))


def test_literal_text_S_fails_signature():
    rep = dd.check_space_axioms(dd.standard_space("S", F9, literal_text=True))
    assert not rep["signature"]["ok"]
    assert not rep["compatibility"]["ok"]
    assert rep["alternating"]["ok"] and rep["perfect"]["ok"]


@pytest.mark.parametrize("d", range(1, 10))
def test_B_axioms(d):
    assert all_ok(dd.standard_space("B", F9, d=d))


def test_invalid_signature_parameters():
    with pytest.raises(InvalidSignatureParameters):
        dd.standard_space("M", F9, sigma=3, n=5)


@pytest.mark.parametrize("n", range(1, 10))
def test_gap_of_M(n):
    for s in range((n - 1) // 2 + 1):
        cert = dd.gap_space(dd.standard_space("M", F9, sigma=s, n=n))
        assert cert.sigma == s
        assert cert.dim_sequence == tuple(range(n, n - s - 1, -1)) + (n - s,)


def test_tau_bar_examples():
    assert dd.tau_bar_dims(dd.standard_space("M", F9, sigma=0, n=4)) == (4, 4)
    assert dd.tau_bar_dims(dd.standard_space("M", F9, sigma=1, n=3)) == (3, 2, 2)
    assert dd.tau_bar_dims(dd.standard_space("M", F9, sigma=2, n=5)) == (5, 4, 3, 3)


def test_gap_errors():
    with pytest.raises(SignatureMismatch):
        dd.tau_bar_dims(dd.standard_space("S", F9))
    with pytest.raises(NonSupersingularPattern):
        dd.gap_space(dd.standard_space("B", F9, d=2))


def test_scramble_identity():
    sp = dd.standard_space("M", F9, sigma=1, n=4)
    same = dd.scramble(sp, None)
    for k in ("Fm", "Vm", "pairing"):
        assert np.array_equal(getattr(same, k), getattr(sp, k))


@given(st.integers(0, 2 ** 31))
def test_scramble_M14(seed):
    sp = dd.standard_space("M", F9, sigma=1, n=4)
    sc = dd.scramble(sp, seed)
    assert all_ok(sc)
    assert dd.tau_bar_dims(sc) == dd.tau_bar_dims(sp)
    assert dd.gap_space(sc).sigma == 1


@settings(max_examples=50)
@given(st.integers(0, 2 ** 31))
def test_scramble_M26(seed):
    assert dd.gap_space(dd.scramble(dd.standard_space("M", F9, sigma=2, n=6), seed)).sigma == 2


def test_gap_invariant_under_field_extension():
    F81 = FieldCtx(3, 2)
    for n, s in [(3, 1), (5, 2), (6, 1)]:
        sp = dd.standard_space("M", F9, sigma=s, n=n)
        big = dd.extend_scalars(sp, F81)
        assert all_ok(big)
        assert dd.tau_bar_dims(big) == dd.tau_bar_dims(sp)
        assert dd.gap_space(dd.scramble(big, 3)).sigma == s


@pytest.mark.parametrize("n", [3, 4, 5])
def test_isocrystal_model(n):
    iso = dd.standard_isocrystal(n, 3)
    assert all(iso.check().values())
    v = iso.gram_valuation()
    assert v % 2 == (n - 1) % 2


def test_isocrystal_n3_transport_to_T_odd():
    iso = dd.IsocrystalCtx(3, 3)
    rep = iso.check()
    assert rep["F_adapted"] and rep["pairing_adapted"]
    assert iso.space.parity == "odd"


@pytest.fixture(scope="module")
def n4():
    sp = lt.PadicHermitianSpace(4, 3)
    iso = dd.IsocrystalCtx(4, 3, space=sp)
    return sp, iso, {m: dd.KRing(iso, m) for m in (1, 2)}


def test_standard_lattice_is_point(n4):
    _, _, kr = n4
    for m in (1, 2):
        M = dd.DieudonneLattice.standard(kr[m])
        ok, rep = dd.is_point(M)
        assert ok, rep
        assert dd.gap_lattice(M).sigma == 0
        Lam, cert = dd.stratum_vertex(M)
        assert cert.t == 0


def test_scaled_standard_lattice(n4):
    M = dd.DieudonneLattice.standard(n4[2][1])
    pM = dd.DieudonneLattice(M.kring, lt.scaled(M.M, 1), 0)
    ok, rep = dd.is_point(pM, 0)
    assert not ok and not rep["self_dual"] and rep["stable"]
    assert dd.is_point(pM, 2)[0]


def test_non_graded_perturbation(n4):
    M = dd.DieudonneLattice.standard(n4[2][1])
    ctx, B = M.kring.ctx, M.M.B
    # p^{-1} (a + b) with a, b basis vectors of M_0 and M_1
    v = ctx.add(B[:, :1], B[:, 4:5])
    gens = np.concatenate([v, ctx.pscale(B, 1)], axis=1)
    bad = lt.Lattice(ctx, gens, M.M.e + 1)
    ok, rep = dd.is_point(dd.DieudonneLattice(M.kring, bad, 0))
    assert not ok and not rep["graded"]


def test_points_over_F9(n4):
    sp, iso, kr = n4
    L = vertex_of_type(sp, 1)
    plus, minus, checks = dd.vertex_lambda_pm(kr[1], L, 0)
    assert all(checks.values())
    pts = dd.enumerate_points(sp, L, 0, 1, iso=iso, kring=kr[1])
    assert len(pts) == 28 == hermitian_curve_count(3, 1)
    for P in pts:
        lp, lm = dd.lambda_pm_lattice(P)
        assert lp == lm == P.M
        Lam, cert = dd.stratum_vertex(P)
        assert cert.t == 0
        assert lt.contains(L, Lam)
    doc = json.loads(dd.point_dump(pts, 1, 3, 1))
    assert doc == {"vertex_type": 1, "field": [3, 2], "count": 28, "gap_histogram": {"0": 28}}


def test_points_over_F81_match_fermat(n4):
    sp, iso, kr = n4
    pts = dd.enumerate_points(sp, vertex_of_type(sp, 1), 0, 2, iso=iso, kring=kr[2])
    assert len(pts) == hf.fermat_count_field(2, kr[2].F) == hermitian_curve_count(3, 2) == 28
    assert {P.origin["quotient_gap"] for P in pts} == {0}


@pytest.mark.slow
def test_points_over_F729_gap_one(n4):
    sp, iso, _ = n4
    kr = dd.KRing(iso, 3)
    pts = dd.enumerate_points(sp, vertex_of_type(sp, 1), 0, 3, iso=iso, kring=kr)
    hist = Counter(P.origin["quotient_gap"] for P in pts)
    assert len(pts) == 892 == hermitian_curve_count(3, 3)
    assert hist == {0: 28, 1: 864}
    gap1 = [P for P in pts if P.origin["quotient_gap"] == 1]
    for P in gap1[:: len(gap1) // 8]:
        sd = dd.sigma_pm(P)
        assert not sd.tau_stable
        assert (sd.gap, sd.minus0) == (1, 2)
        assert all(sd.relations.values())
        Lam, cert = dd.stratum_vertex(P)
        assert cert.t == 1


@pytest.mark.parametrize("m", [1, 2])
def test_type0_vertex_single_point(n4, m):
    sp, iso, kr = n4
    pts = dd.enumerate_points(sp, vertex_of_type(sp, 0), 0, m, iso=iso, kring=kr[m])
    assert len(pts) == 1
    assert dd.is_point(pts[0])[0]
