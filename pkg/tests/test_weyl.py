from itertools import combinations, permutations, product

import pytest
from hypothesis import given, strategies as st

from btstrata import weyl as wy
from btstrata.errors import FeasibilityExceeded, InvalidParameters, NotMinimalRep


def subsets(m):
    return [frozenset(c) for k in range(m) for c in combinations(range(1, m), k)]


def test_context_basics():
    ctx = wy.SymmetricGroupCtx(5)
    assert ctx.w0 == (5, 4, 3, 2, 1)
    assert wy.length(ctx.w0) == 10
    assert ctx.s(2) == (1, 3, 2, 4, 5)
    with pytest.raises(FeasibilityExceeded):
        wy.SymmetricGroupCtx(12).elements()


@given(st.permutations(range(1, 7)), st.permutations(range(1, 7)))
def test_length_and_inverse(u, v):
    u, v = tuple(u), tuple(v)
    assert wy.compose(u, wy.inverse(u)) == tuple(range(1, 7))
    assert wy.length(u) == wy.length(wy.inverse(u))
    assert wy.length(wy.compose(u, v)) <= wy.length(u) + wy.length(v)


def test_min_reps_trivial_and_s3():
    ctx = wy.SymmetricGroupCtx(3)
    assert len(wy.min_double_coset_reps(ctx, (), ())) == 6
    reps = wy.min_double_coset_reps(ctx, {1}, {1})
    assert reps == [c[1][0] for c in sorted(wy.double_cosets_brute(ctx, {1}, {1}), key=lambda c: c[1])]
    assert len(reps) == 2


@pytest.mark.parametrize("m", range(1, 6))
def test_double_coset_partition(m):
    ctx = wy.SymmetricGroupCtx(m)
    W = set(ctx.elements())
    for I, J in product(subsets(m), repeat=2):
        cosets = wy.double_cosets_brute(ctx, I, J)
        assert set().union(*(c[0] for c in cosets)) == W
        assert sum(len(c[0]) for c in cosets) == len(W)
        assert all(len(c[1]) == 1 for c in cosets)
        assert sorted(c[1][0] for c in cosets) == wy.min_double_coset_reps(ctx, I, J) == wy.min_reps_fast(ctx, I, J)


def test_brute_coset_via_parabolics():
    ctx = wy.SymmetricGroupCtx(4)
    I, J = {1, 3}, {2}
    WI, WJ = wy.parabolic_elements(ctx, I), wy.parabolic_elements(ctx, J)
    for w in wy.min_double_coset_reps(ctx, I, J):
        coset = {wy.compose(wy.compose(a, w), b) for a in WI for b in WJ}
        assert min(wy.length(x) for x in coset) == wy.length(w)


def test_f_action():
    ctx = wy.SymmetricGroupCtx(5)
    assert wy.f_action(ctx, ctx.s(1)) == ctx.s(4)
    assert wy.f_action(ctx, frozenset({1})) == frozenset({4})
    for d in range(1, 5):
        c = wy.SymmetricGroupCtx(2 * d + 1)
        want = frozenset(list(range(1, d)) + list(range(d + 1, 2 * d + 1)))
        assert wy.f_action(c, wy.i_lambda(d)) == want
        for s in range(d + 1):
            I = wy.i_sigma(d, s)
            assert wy.f_action(c, I) == I


@given(st.permutations(range(1, 8)))
def test_f_action_involution_and_hom(w):
    ctx = wy.SymmetricGroupCtx(7)
    w = tuple(w)
    assert wy.f_action(ctx, wy.f_action(ctx, w)) == w
    assert wy.length(wy.f_action(ctx, w)) == wy.length(w)


def test_dim_parabolic():
    ctx = wy.SymmetricGroupCtx(3)
    assert wy.dim_parabolic(ctx, ()) == 3
    assert wy.dim_parabolic(ctx, ctx.S) == 0
    for d in range(5):
        c = wy.SymmetricGroupCtx(2 * d + 1)
        assert wy.dim_parabolic(c, wy.i_lambda(d)) == d * (d + 1)


@pytest.mark.parametrize("m", range(2, 7))
def test_dim_parabolic_matches_coset_length(m):
    ctx = wy.SymmetricGroupCtx(m)
    for I in subsets(m) + [ctx.S]:
        longest = max(wy.length(x) for x in wy.parabolic_elements(ctx, I))
        assert wy.dim_parabolic(ctx, I) == wy.length(ctx.w0) - longest


def test_dim_dl_examples():
    for d in range(5):
        ctx = wy.SymmetricGroupCtx(2 * d + 1)
        assert wy.dim_dl(ctx, wy.i_lambda(d), ctx.identity) == d
        assert wy.dim_dl(ctx, (), ctx.identity) == 0
        for s in range(d + 1):
            assert wy.dim_dl(ctx, wy.i_sigma(d, s), wy.w_sigma(d, s)) == s
    ctx = wy.SymmetricGroupCtx(3)
    with pytest.raises(NotMinimalRep):
        wy.dim_dl(ctx, {1}, ctx.s(1))


@pytest.mark.parametrize("m", [3, 5])
def test_dim_dl_envelope(m):
    ctx = wy.SymmetricGroupCtx(m)
    for I in subsets(m):
        FI = wy.f_action(ctx, I)
        for w in wy.min_double_coset_reps(ctx, I, FI):
            assert 0 <= wy.dim_dl(ctx, I, w) <= wy.dim_parabolic(ctx, ())


def test_irreducibility_examples():
    for d in range(1, 5):
        ctx = wy.SymmetricGroupCtx(2 * d + 1)
        assert wy.is_irreducible_dl(ctx, wy.i_lambda(d), ctx.identity)
        for J in wy.f_stable_proper_subsets(ctx):
            assert not wy.is_irreducible_dl(ctx, J, ctx.identity)
        assert not wy.is_irreducible_dl(ctx, (), ctx.identity)


@pytest.mark.parametrize("m", range(2, 8))
def test_irreducible_identity_vs_orbit_union(m):
    ctx = wy.SymmetricGroupCtx(m)
    for I in subsets(m):
        assert wy.is_irreducible_dl(ctx, I, ctx.identity) == (wy.f_orbit_union(ctx, I) == ctx.S)


def test_eo_data_corrected():
    D = wy.eo_dl_data(1, 0)
    assert D.I == frozenset() and D.w == (1, 2, 3) and D.flags["length_is_sigma"]
    for d in range(5):
        ctx = wy.SymmetricGroupCtx(2 * d + 1)
        for s in range(d + 1):
            D = wy.eo_dl_data(d, s)
            assert all(v for k, v in D.flags.items() if k != "dim")
            assert D.flags["dim"] == s
            assert D.w in wy.min_double_coset_reps(ctx, D.I, D.I)
        if d:
            a, b = wy.eo_dl_data(d, d), wy.eo_dl_data(d, d - 1)
            assert a.I == b.I == frozenset() and a.w != b.w


def test_eo_data_printed_ranges():
    D = wy.eo_dl_data(2, 1, printed=True)
    assert D.I == frozenset({4})
    assert D.w == wy.cycle(5, [4, 3]) and wy.length(D.w) == 1
    assert not D.flags["F_stable"]
    assert wy.eo_dl_data(2, 1).I == frozenset()


def test_eo_data_range():
    with pytest.raises(InvalidParameters):
        wy.eo_dl_data(2, 3)


def test_support_matches_reduced_words():
    ctx = wy.SymmetricGroupCtx(4)
    for w in permutations(range(1, 5)):
        # w lies in W_J exactly when J contains its support
        for J in subsets(4) + [ctx.S]:
            assert (w in wy.parabolic_elements(ctx, J)) == (wy.support(w) <= J)
