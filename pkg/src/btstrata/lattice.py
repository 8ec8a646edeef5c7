"""Lattices over truncated Witt rings and the hermitian vertex combinatorics.

A lattice is p^{-e} times the column span of an integral basis B, kept in
canonical Hermite form so that equal lattices have equal (B, e).  The generic
operations take any WittCtx; the hermitian layer uses Z_{p^2} = W(F_{p^2}).
"""
from dataclasses import dataclass

import numpy as np

from .errors import NotAVertex, NotContained, OddIndexViolation, PrecisionExhausted
from .hermitian_ff import FiniteHermitianSpace, Subspace
from .ring import FieldCtx, WittCtx, hermite_form, inv_unimodular, smith_normal_form


class Lattice:
    __slots__ = ("ctx", "B", "e", "_key")

    def __init__(self, ctx, B, e=0, canonical=False):
        self.ctx = ctx
        if canonical:
            self.B, self.e = B, e
        else:
            H, _ = hermite_form(B, ctx)
            v = int(ctx.val(H).min())
            if v:
                H = ctx.pdiv(H, v)
                e -= v
            self.B, self.e = H, e
        self._key = None

    @property
    def n(self):
        return self.B.shape[0]

    def key(self):
        if self._key is None:
            self._key = (self.e, self.B.tobytes())
        return self._key

    def __eq__(self, other):
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Lattice(n={self.n}, e={self.e})"


_SLACK = [None]


def reset_slack():
    _SLACK[0] = None


def min_slack():
    """Smallest Smith slack seen since the last reset (None if no lattice work ran)."""
    return _SLACK[0]


def _snf(A, ctx):
    U, d, V, slack = smith_normal_form(A, ctx)
    if _SLACK[0] is None or slack < _SLACK[0]:
        _SLACK[0] = int(slack)
    if slack < 1:
        raise PrecisionExhausted(f"Smith slack {slack} at precision p^{ctx.N}")
    return U, d, V


def scaled(L, a):
    """p^a L."""
    return Lattice(L.ctx, L.B, L.e - a, canonical=True)


def change_of_basis(L, M):
    """Integral C with M.basis = L.basis C (scales included), or None if M is not inside L."""
    ctx = L.ctx
    U, d, V = _snf(L.B, ctx)
    Y = ctx.matmul(U, M.B)
    shift = L.e - M.e
    rows = []
    for j, dj in enumerate(d):
        k = dj - shift
        row = Y[j]
        if k > 0:
            if ctx.val(row).min() < k:
                return None
            row = ctx.pdiv(row, k)
        elif k < 0:
            row = ctx.pscale(row, -k)
        rows.append(row)
    return ctx.matmul(V, np.stack(rows))


def contains(L, M):
    """M inside L."""
    return change_of_basis(L, M) is not None


def index_length(L, M):
    """Length of L / M for M inside L: sum of Smith exponents of the change of basis."""
    C = change_of_basis(L, M)
    if C is None:
        raise NotContained("sublattice is not contained")
    _, d, _ = _snf(C, L.ctx)
    return int(sum(d))


def join(L, M):
    ctx = L.ctx
    e = max(L.e, M.e)
    A = np.concatenate([ctx.pscale(L.B, e - L.e), ctx.pscale(M.B, e - M.e)], axis=1)
    return Lattice(ctx, A, e)


def dual_form(L, G, twist):
    """{z : x^T G sigma^twist(z) integral for all x in L}."""
    ctx = L.ctx
    A = ctx.matmul(np.swapaxes(L.B, 0, 1), G)
    U, d, V = _snf(A, ctx)
    dmax = max(d)
    D = V.copy()
    for j, dj in enumerate(d):
        D[:, j] = ctx.pscale(V[:, j], dmax - dj)
    return Lattice(ctx, ctx.sigma(D, -twist), dmax - L.e)


def std_dual(L):
    return dual_form(L, L.ctx.eye(L.n), 0)


def meet(L, M):
    # intersection via the coordinate dot-product duality, independent of any hermitian form
    return std_dual(join(std_dual(L), std_dual(M)))


def random_lattice(ctx, n, rng, lo=-2, hi=2, exps=None):
    """U0 diag(p^r) V0 with random unimodular U0, V0."""
    r = np.asarray(exps if exps is not None else rng.integers(lo, hi + 1, size=n))
    U0 = ctx.random_unimodular(rng, n)
    e = max(0, -int(r.min()))
    D = ctx.zeros(n, n)
    for j in range(n):
        D[j, j, 0] = ctx.p ** int(r[j] + e)
    return Lattice(ctx, ctx.matmul(U0, D), e)


def apply_matrix(g, L):
    """g L for an integral matrix g with unit determinant."""
    return Lattice(L.ctx, L.ctx.matmul(g, L.B), L.e)


# ---------- hermitian space over Q_{p^2} ----------

def default_precision(p):
    # largest N keeping the valuation lookup table (size p^N) small, capped at 12
    N = 1
    while N < 12 and p ** (N + 1) <= 1 << 21:
        N += 1
    return N


@dataclass(frozen=True)
class VertexCertificate:
    i: int
    t: int
    length: int


class PadicHermitianSpace:
    """Q_{p^2}^n with {x, y} = x^T G sigma(y).

    Odd n: G is the antidiagonal all-ones matrix.  Even n: G = diag(p) plus the
    antidiagonal all-ones matrix of size n - 1, which is hermitian with det of
    valuation 1.
    """

    def __init__(self, n, p, N=None):
        if n < 1:
            raise ValueError("n >= 1")
        if N is None:
            N = default_precision(p)
        self.n, self.p = n, p
        self.F = FieldCtx(p, 1)
        self.ctx = WittCtx(self.F, N)
        self.parity = "odd" if n % 2 else "even"
        G = self.ctx.zeros(n, n)
        if n % 2:
            for j in range(n):
                G[j, n - 1 - j, 0] = 1
        else:
            G[0, 0, 0] = p
            for j in range(1, n):
                G[j, n - j, 0] = 1
        self.gram = G

    def pairing(self, x, y):
        ctx = self.ctx
        return ctx.matmul(ctx.matmul(x[None], self.gram), ctx.sigma(y)[:, None])[0, 0]

    def standard(self):
        return Lattice(self.ctx, self.ctx.eye(self.n), 0)

    def lattice(self, B, e=0):
        return Lattice(self.ctx, np.asarray(B, dtype=np.int64), e)


def diag_lattice(space, r):
    ctx = space.ctx
    r = [int(x) for x in r]
    if len(r) != space.n:
        raise ValueError("need n exponents")
    e = -min(r)
    B = ctx.zeros(space.n, space.n)
    for j, rj in enumerate(r):
        B[j, j, 0] = space.p ** (rj + e)
    return Lattice(ctx, B, e, canonical=True)


def dual(space, L):
    return dual_form(L, space.gram, 1)


def vertex_type(space, L, i):
    if (space.n * i) % 2:
        raise ValueError(f"n*i must be even (n={space.n}, i={i})")
    Ld = dual(space, L)
    low = scaled(Ld, i + 1)
    high = scaled(Ld, i)
    if not contains(L, low):
        raise NotAVertex("p^{i+1} L^dual is not inside L", failed="lower")
    if not contains(high, L):
        raise NotAVertex("L is not inside p^i L^dual", failed="upper")
    length = index_length(L, low)
    if length == 0:
        raise NotAVertex("p^{i+1} L^dual equals L", failed="strict")
    if length % 2 == 0:
        raise OddIndexViolation(f"even index {length}")
    return VertexCertificate(i, (length - 1) // 2, length)


def is_vertex(space, L, i):
    try:
        vertex_type(space, L, i)
        return True
    except NotAVertex:
        return False


def diag_type_closed_form(n, r, i=0):
    """Predicted orbit type of diag_lattice(r) from the exponent pairing, or None."""
    if n % 2:
        pairs = [(j, n - 1 - j) for j in range((n - 1) // 2)]
        mid = [(n - 1) // 2]
        head = []
    else:
        pairs = [(j, n - j) for j in range(1, n // 2)]
        mid = [n // 2]
        head = [0]
    length = 0
    for a, b in pairs:
        s = r[a] + r[b]
        if s not in (i, i + 1):
            return None
        length += 2 * (i + 1 - s)
    for c in mid:
        if 2 * r[c] not in (i, i + 1):
            return None
        length += i + 1 - 2 * r[c]
    for c in head:
        if 2 * r[c] not in (i - 1, i):
            return None
        length += i - 2 * r[c]
    if length == 0:
        return None
    return (length - 1) // 2


# ---------- finite quotients ----------

class FiniteQuotient:
    """big / small with pA inside small, carrying the form p^shift {,} mod p."""

    def __init__(self, space, big, small, shift):
        ctx, F = space.ctx, space.F
        self.space, self.big, self.small, self.shift = space, big, small, shift
        C = change_of_basis(big, small)
        if C is None:
            raise NotContained("small is not inside big")
        U, d, V = _snf(C, ctx)
        if max(d) > 1:
            raise ValueError("quotient is not killed by p")
        Uinv = inv_unimodular(U, ctx)
        self.A = ctx.matmul(big.B, Uinv)  # adapted basis of big, scale big.e
        self.qcols = [j for j, dj in enumerate(d) if dj == 1]
        self.dim = len(self.qcols)
        self.Ainv = U  # coordinates w.r.t. A are U big.B^{-1} x
        Aq = self.A[:, self.qcols]
        raw = ctx.matmul(ctx.matmul(np.swapaxes(Aq, 0, 1), space.gram), ctx.sigma(Aq))
        s = shift - 2 * big.e
        raw = ctx.pdiv(raw, -s) if s < 0 else ctx.pscale(raw, s)
        self.W = FiniteHermitianSpace(F, ctx.reduce(raw))

    def project(self, L):
        """Subspace of the quotient cut out by small <= L <= big."""
        C = change_of_basis(self.big, L)
        if C is None:
            raise NotContained("lattice is not inside big")
        coords = self.space.ctx.matmul(self.Ainv, C)[self.qcols]
        rows = self.space.ctx.reduce(coords).T
        return Subspace(self.space.F, rows)

    def lift(self, U):
        ctx = self.space.ctx
        rows = U.basis if isinstance(U, Subspace) else np.asarray(U)
        if len(rows) == 0:
            return self.small
        Aq = self.A[:, self.qcols]
        gens = ctx.matmul(Aq, np.swapaxes(ctx.lift(rows), 0, 1))
        return join(self.small, Lattice(ctx, np.concatenate([gens, ctx.pscale(self.big.B, 1)], axis=1), self.big.e))


def v_lambda_quotient(space, L, i):
    cert = vertex_type(space, L, i)
    Q = FiniteQuotient(space, L, scaled(dual(space, L), i + 1), -i)
    assert Q.dim == cert.length
    return Q


def dual_side_quotient(space, L, i):
    """p^i L^dual / L with the form p^{1-i} {,}, dimension n - (2t+1)."""
    vertex_type(space, L, i)
    return FiniteQuotient(space, scaled(dual(space, L), i), L, 1 - i)
