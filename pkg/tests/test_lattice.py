from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from btstrata import lattice as lt
from btstrata.errors import NotAVertex, NotContained

SPACES = {(n, p): lt.PadicHermitianSpace(n, p) for n in (3, 4, 5, 6) for p in (3, 5)}
seeds = st.integers(0, 2 ** 32 - 1)


def D(space, *r):
    return lt.diag_lattice(space, r)


def test_gram_conventions():
    for (n, p), sp in SPACES.items():
        G = sp.gram
        ctx = sp.ctx
        assert np.array_equal(np.swapaxes(ctx.sigma(G), 0, 1), G)
        C = lt.change_of_basis(sp.standard(), sp.lattice(G))
        assert sum(lt.smith_normal_form(C, ctx)[1]) == (n + 1) % 2


def test_dual_examples(space3, space4):
    assert lt.dual(space3, space3.standard()) == space3.standard()
    L = D(space3, 1, 0, -1)
    assert lt.dual(space3, L) == L
    assert lt.dual(space4, space4.standard()) == D(space4, -1, 0, 0, 0)


@given(seeds, st.sampled_from(sorted(SPACES)))
def test_dual_involution_and_scaling(seed, key):
    sp = SPACES[key]
    rng = np.random.default_rng(seed)
    L = lt.random_lattice(sp.ctx, sp.n, rng)
    Ld = lt.dual(sp, L)
    assert lt.dual(sp, Ld) == L
    assert lt.dual(sp, lt.scaled(L, 1)) == lt.scaled(Ld, -1)


@given(seeds, st.sampled_from(sorted(SPACES)))
def test_dual_reverses_inclusion(seed, key):
    sp = SPACES[key]
    rng = np.random.default_rng(seed)
    L = lt.random_lattice(sp.ctx, sp.n, rng)
    M = lt.join(L, lt.random_lattice(sp.ctx, sp.n, rng))
    assert lt.contains(M, L)
    assert lt.contains(lt.dual(sp, L), lt.dual(sp, M))


def test_meet_join_diagonal(space5):
    rng = np.random.default_rng(0)
    for _ in range(20):
        r, s = rng.integers(-2, 3, 5), rng.integers(-2, 3, 5)
        A, B = lt.diag_lattice(space5, r), lt.diag_lattice(space5, s)
        assert lt.meet(A, B) == lt.diag_lattice(space5, np.maximum(r, s))
        assert lt.join(A, B) == lt.diag_lattice(space5, np.minimum(r, s))
        assert lt.join(A, A) == A == lt.meet(A, A)


@given(seeds)
def test_meet_after_conjugation(seed):
    sp = SPACES[(4, 3)]
    rng = np.random.default_rng(seed)
    r, s = rng.integers(-2, 3, 4), rng.integers(-2, 3, 4)
    g = sp.ctx.random_unimodular(rng, 4)
    A, B = lt.apply_matrix(g, lt.diag_lattice(sp, r)), lt.apply_matrix(g, lt.diag_lattice(sp, s))
    assert lt.meet(A, B) == lt.apply_matrix(g, lt.diag_lattice(sp, np.maximum(r, s)))


@given(seeds, st.sampled_from(sorted(SPACES)))
def test_meet_join_duality_and_modularity(seed, key):
    sp = SPACES[key]
    rng = np.random.default_rng(seed)
    L, M = lt.random_lattice(sp.ctx, sp.n, rng), lt.random_lattice(sp.ctx, sp.n, rng)
    I, S = lt.meet(L, M), lt.join(L, M)
    assert lt.dual(sp, I) == lt.join(lt.dual(sp, L), lt.dual(sp, M))
    # L / (L meet M) is isomorphic to (L + M) / M
    assert lt.index_length(L, I) == lt.index_length(S, M)


def test_index_length_examples(space4):
    for sp in SPACES.values():
        L = sp.standard()
        assert lt.index_length(L, lt.scaled(L, 1)) == sp.n
        assert lt.index_length(L, L) == 0
    L = space4.standard()
    assert lt.index_length(L, lt.scaled(lt.dual(space4, L), 1)) == 3


@given(seeds)
def test_index_length_additive(seed):
    sp = SPACES[(5, 3)]
    rng = np.random.default_rng(seed)
    A = lt.random_lattice(sp.ctx, 5, rng)
    B = lt.meet(A, lt.random_lattice(sp.ctx, 5, rng))
    C = lt.meet(B, lt.random_lattice(sp.ctx, 5, rng))
    assert lt.index_length(A, C) == lt.index_length(A, B) + lt.index_length(B, C)


def test_index_length_not_contained(space3):
    L = space3.standard()
    with pytest.raises(NotContained):
        lt.index_length(lt.scaled(L, 1), L)


def test_vertex_type_examples(space3, space4):
    assert lt.vertex_type(space3, space3.standard(), 0).t == 1
    assert lt.vertex_type(space4, space4.standard(), 0).t == 1
    assert lt.vertex_type(space4, D(space4, 0, 1, 0, 0), 0).t == 0
    with pytest.raises(NotAVertex):
        lt.vertex_type(space4, D(space4, 0, 0, 1, 0), 0)
    with pytest.raises(ValueError):
        lt.vertex_type(space3, space3.standard(), 1)


def test_diag_vertex_closed_form(space5):
    r = (0, 0, 0, 1, 0)
    t = lt.vertex_type(space5, lt.diag_lattice(space5, r), 0).t
    assert t == lt.diag_type_closed_form(5, r) == 1


@pytest.mark.parametrize("n", [3, 4, 5])
def test_diagonal_scan(n):
    sp = SPACES[(n, 3)]
    types = {}
    for r in product(range(-2, 3), repeat=n):
        L = lt.diag_lattice(sp, r)
        try:
            cert = lt.vertex_type(sp, L, 0)
        except NotAVertex:
            assert lt.diag_type_closed_form(n, r) is None
            continue
        assert cert.length % 2 == 1
        assert cert.t == lt.diag_type_closed_form(n, r)
        types[r] = cert.t
    assert max(types.values()) == (n - 1) // 2
    # strict inclusions between vertices lower the type
    items = list(types.items())
    for (r, t), (s, u) in product(items[:40], items):
        if r != s and all(a >= b for a, b in zip(r, s)):
            assert t < u


def test_even_n_i2_vertices(space4):
    L = lt.scaled(space4.standard(), -1)
    assert lt.vertex_type(space4, L, -2).t == 1


def test_v_lambda_quotient(space4):
    L = space4.standard()
    Q = lt.v_lambda_quotient(space4, L, 0)
    assert Q.dim == 3 and Q.W.F.rank(Q.W.gram) == 3
    L0 = D(space4, 0, 1, 0, 0)
    assert lt.v_lambda_quotient(space4, L0, 0).dim == 1
    rng = np.random.default_rng(4)
    for k in range(4):
        U = Q.W.sub(rng.integers(0, 9, size=(k, 3)))
        M = Q.lift(U)
        assert lt.contains(L, M) and Q.project(M) == U
