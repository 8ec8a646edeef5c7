"""Hermitian spaces over F_{p^2}: N(r, W), nu(r, l), and Fermat point counts.

The same machinery serves the sesquilinear spaces V (x) k over larger fields
F_{p^{2m}}: the form is (x, y) = x^T G phi(y) with phi(y) = y^p throughout.
"""
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import _kernels
from .errors import FeasibilityExceeded
from .ring import FieldCtx

DEFAULT_CAP = 10 ** 7


@lru_cache(maxsize=None)
def field(p, m=1):
    return FieldCtx(p, m)


def gauss_binom(n, k, q):
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


class Subspace:
    """Row space in reduced row echelon form; equality is equality of forms."""

    def __init__(self, F, rows):
        rows = np.asarray(rows, dtype=np.int64)
        self.basis = F.span(rows) if rows.size else rows.reshape(0, rows.shape[-1])
        self.dim = len(self.basis)

    def key(self):
        return (self.basis.shape, self.basis.tobytes())

    def __eq__(self, other):
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Subspace(dim={self.dim}, basis={self.basis.tolist()})"


class FiniteHermitianSpace:
    def __init__(self, F, gram, check=True):
        self.F = F
        self.gram = np.asarray(gram, dtype=np.int64)
        self.l = self.gram.shape[0]
        self.phi = F.frob_tab[1]
        if check:
            if not np.array_equal(self.gram.T, self.phi[self.gram]):
                raise ValueError("Gram matrix is not hermitian")
            if F.rank(self.gram) != self.l:
                raise ValueError("Gram matrix is degenerate")

    @classmethod
    def standard(cls, p, l, m=1):
        F = field(p, m)
        return cls(F, np.eye(l, dtype=np.int64))

    def form(self, x, y):
        F = self.F
        return F.dot(x, F.dot(self.gram, self.phi[np.asarray(y)][..., None, :]))

    def gram_of(self, X, Y):
        F = self.F
        return F.matmul(F.matmul(X, self.gram), self.phi[np.asarray(Y)].T)

    def sub(self, rows):
        return Subspace(self.F, rows)


def _as_rows(W, U):
    if isinstance(U, Subspace):
        return U.basis
    U = np.asarray(U, dtype=np.int64)
    return U.reshape(-1, W.l)


def orth_complement(W, U):
    """Right orthogonal {v : (u, v) = 0 for all u in U}."""
    F = W.F
    U = _as_rows(W, U)
    if U.shape[1] != W.l:
        raise ValueError("dimension mismatch")
    if len(U) == 0:
        return Subspace(F, np.eye(W.l, dtype=np.int64))
    K = F.nullspace(F.matmul(U, W.gram))
    inv_phi = F.frob_tab[-1 % F.D]
    return Subspace(F, inv_phi[K]) if len(K) else Subspace(F, np.zeros((0, W.l), dtype=np.int64))


def left_orth(W, T):
    """Left orthogonal {u : (u, t) = 0 for all t in T}."""
    F = W.F
    T = _as_rows(W, T)
    if len(T) == 0:
        return Subspace(F, np.eye(W.l, dtype=np.int64))
    K = F.nullspace(F.matmul(W.phi[T], W.gram.T))
    return Subspace(F, K) if len(K) else Subspace(F, np.zeros((0, W.l), dtype=np.int64))


def echelon_patterns(l, s):
    for piv in combinations(range(l), s):
        frees = [[c for c in range(pc + 1, l) if c not in piv] for pc in piv]
        yield piv, frees


def enumerate_isotropic(W, s, cap=DEFAULT_CAP):
    """RREF bases (K, s, l) of the s-dimensional T with (t, t') = 0 for all t, t' in T."""
    F, l = W.F, W.l
    projected = gauss_binom(l, s, F.q)
    if projected > cap:
        raise FeasibilityExceeded(f"projected {projected} candidate subspaces exceed cap {cap}")
    if s == 0:
        return np.zeros((1, 0, l), dtype=np.int64)
    out = []
    for piv, frees in echelon_patterns(l, s):
        pre = np.zeros((1, 0, l), dtype=np.int64)
        for a in range(s):
            pre = _kernels.extend_isotropic(pre, piv[a], np.array(frees[a], dtype=np.int64),
                                            W.gram, F.add, F.mul, W.phi)
            if not len(pre):
                break
        if len(pre):
            # zero out entries at later pivot columns is automatic: frees exclude pivots
            out.append(pre)
    if not out:
        return np.zeros((0, s, l), dtype=np.int64)
    return np.concatenate(out)


def enumerate_N(W, r, cap=DEFAULT_CAP):
    """All U of dimension r with U^perp inside U, as canonical Subspaces."""
    l = W.l
    if not (2 * r >= l and r <= l):
        raise ValueError(f"need l/2 <= r <= l, got r={r}, l={l}")
    Ts = enumerate_isotropic(W, l - r, cap)
    res = [left_orth(W, T) for T in Ts]
    res.sort(key=lambda U: U.basis.tobytes())
    return res


def all_subspaces(F, l, r, cap=DEFAULT_CAP):
    """Every r-dimensional subspace of F^l in RREF, pattern by pattern."""
    total = gauss_binom(l, r, F.q)
    if total > cap:
        raise FeasibilityExceeded(f"{total} subspaces exceed cap {cap}")
    for piv, frees in echelon_patterns(l, r):
        cells = [(a, c) for a in range(r) for c in frees[a]]
        n = F.q ** len(cells)
        B = np.zeros((n, r, l), dtype=np.int64)
        B[:, np.arange(r), list(piv)] = 1
        idx = np.arange(n)
        for a, c in cells:
            B[:, a, c] = idx % F.q
            idx //= F.q
        yield from B


def enumerate_N_brute(W, r, cap=DEFAULT_CAP):
    """Oracle: filter all r-dimensional subspaces by U^perp inside U."""
    F = W.F
    out = []
    for U in all_subspaces(F, W.l, r, cap):
        perp = orth_complement(W, U)
        if F.contains(U, perp.basis):
            out.append(Subspace(F, U))
    out.sort(key=lambda U: U.basis.tobytes())
    return out


@lru_cache(maxsize=None)
def nu(r, l, p, cap=DEFAULT_CAP):
    W = FiniteHermitianSpace.standard(p, l)
    if not (2 * r >= l and r <= l):
        raise ValueError(f"need l/2 <= r <= l, got r={r}, l={l}")
    return len(enumerate_isotropic(W, l - r, cap))


def random_congruent(W, rng):
    """(W', A) with Gram A^T G phi(A); U' in W' corresponds to U' A^T in W."""
    F = W.F
    while True:
        A = rng.integers(0, F.q, size=(W.l, W.l))
        if F.rank(A) == W.l:
            break
    G2 = F.matmul(F.matmul(A.T, W.gram), W.phi[A])
    return FiniteHermitianSpace(F, G2), A


def transport(W, U, A):
    return Subspace(W.F, W.F.matmul(_as_rows(W, U), np.asarray(A).T))


# ---------- Fermat hypersurfaces X_l : x_0^{p+1} + ... + x_l^{p+1} = 0 ----------

def fermat_count_field(l, F, cap=DEFAULT_CAP):
    """Projective points of X_l over the field F by direct enumeration."""
    if F.q ** (l + 1) > cap:
        raise FeasibilityExceeded(f"{F.q}^{l + 1} tuples exceed cap {cap}")
    pw = F.pow(np.arange(F.q), F.p + 1)
    aff = _kernels.fermat_affine_count(pw, F.add, l + 1)
    return (aff - 1) // (F.q - 1)


def fermat_a(l, p, method="recursion"):
    if method == "closed":
        return p ** (2 * l - 1) + (-1) ** (l - 1) * p ** (l - 1)
    a = p + 1
    for j in range(2, l + 1):
        a = (p + 1) * p ** (2 * (j - 1)) - p * a
    return a


def fermat_count(l, p, method="closed", cap=DEFAULT_CAP):
    if l < 1:
        raise ValueError("l >= 1")
    if method == "brute":
        return fermat_count_field(l, field(p, 1), cap)
    if method not in ("closed", "recursion"):
        raise ValueError(method)
    return sum(fermat_a(j, p, method) for j in range(1, l + 1))


def sigma_product(l, p, start=0):
    """Product form (p^{l+1}+1) Sigma_l (l even) or (p^l+1) Sigma_l (l odd)."""
    sig = sum(p ** (2 * j) for j in range(start, (l - 1) // 2 + 1))
    return (p ** (l + 1) + 1) * sig if l % 2 == 0 else (p ** l + 1) * sig


def sigma_variant_report(p, lmax=6):
    rows = []
    for l in range(1, lmax + 1):
        b = fermat_count(l, p, "recursion")
        rows.append({"l": l, "b_l": b, "j0": sigma_product(l, p, 0), "j1": sigma_product(l, p, 1)})
    return {
        "rows": rows,
        "j0_consistent": all(r["j0"] == r["b_l"] for r in rows),
        "j1_consistent": all(r["j1"] == r["b_l"] for r in rows),
    }
