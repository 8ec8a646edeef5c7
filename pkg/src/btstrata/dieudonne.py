"""Unitary Dieudonne spaces and lattices: the superspecial gap and points on strata.

Finite side: graded spaces over F_{p^{2m}} with F = Fm . phi and V = Vm . phi^{-1}
acting on coordinate columns, and an alternating pairing matrix.

p-adic side: the isocrystal N = N_0 + N_1 in an adapted basis (e_a, f_a) where
f_a = F(e_a), F(f_a) = p e_a and <e_a, f_b> = delta^{-1} G_ab with G the Gram
matrix of the hermitian space.  In these coordinates tau = p^{-1} F^2 is sigma^2
applied entrywise.
"""
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (DescentFailure, FeasibilityExceeded, InvalidSignatureParameters,
                     NonSupersingularPattern, PrecisionExhausted, SignatureMismatch)
from .hermitian_ff import DEFAULT_CAP, FiniteHermitianSpace, Subspace, enumerate_isotropic, left_orth
from .lattice import (Lattice, PadicHermitianSpace, contains, dual_form, index_length, join, meet,
                      scaled, std_dual, v_lambda_quotient, vertex_type)
from .ring import FieldCtx, WittCtx, make_coefficient_ring, smith_normal_form


# ---------- finite unitary Dieudonne spaces ----------

class UnitaryDieudonneSpace:
    """Coordinates 0..n-1 span M_0, n..2n-1 span M_1."""

    def __init__(self, F, n, Fm, Vm, pairing, r=1, label=""):
        self.F, self.n, self.r, self.label = F, n, r, label
        self.Fm = np.asarray(Fm, dtype=np.int64) % F.q
        self.Vm = np.asarray(Vm, dtype=np.int64) % F.q
        self.pairing = np.asarray(pairing, dtype=np.int64) % F.q
        self.phi = F.frob_tab[1]
        self.phi_inv = F.frob_tab[-1 % F.D]

    def apply_F(self, X):
        """Rows x -> rows of Fm phi(x)."""
        X = np.asarray(X, dtype=np.int64).reshape(-1, 2 * self.n)
        return self.F.matmul(self.phi[X], self.Fm.T)

    def apply_V(self, X):
        X = np.asarray(X, dtype=np.int64).reshape(-1, 2 * self.n)
        return self.F.matmul(self.phi_inv[X], self.Vm.T)

    def signature(self):
        n, F = self.n, self.F
        return n - F.rank(self.Vm[:n, n:]), n - F.rank(self.Vm[n:, :n])

    def __repr__(self):
        return f"UnitaryDieudonneSpace({self.label or '?'}, n={self.n}, q={self.F.q})"


def _field_of(ctx):
    if isinstance(ctx, FieldCtx):
        return ctx
    if isinstance(ctx, tuple):
        return FieldCtx(*ctx)
    return FieldCtx(int(ctx), 1)


def _space_S(F, literal_text=False):
    Fm = np.zeros((2, 2), dtype=np.int64)
    Vm = np.zeros((2, 2), dtype=np.int64)
    P = np.zeros((2, 2), dtype=np.int64)
    Fm[0, 1] = F.neg[1]  # F(h) = -g
    if literal_text:
        Vm[1, 0] = 1  # V(g) = h as printed in the prose
    else:
        Vm[0, 1] = 1  # V(h) = g as drawn in the diagram
    P[1, 0], P[0, 1] = 1, F.neg[1]  # <h, g> = 1
    return UnitaryDieudonneSpace(F, 1, Fm, Vm, P, r=0, label="S" + ("(text)" if literal_text else ""))


def _space_B(F, d):
    if d < 1:
        raise InvalidSignatureParameters(f"B(d) needs d >= 1, got {d}")
    n = d
    Fm = np.zeros((2 * n, 2 * n), dtype=np.int64)
    Vm = np.zeros_like(Fm)
    P = np.zeros_like(Fm)
    e = lambda i: i - 1
    f = lambda i: n + i - 1
    sgn = lambda k: 1 if k % 2 == 0 else int(F.neg[1])
    for i in range(1, d + 1):
        P[e(i), f(i)] = sgn(i)
        P[f(i), e(i)] = sgn(i + 1)
    for i in range(1, d):
        Vm[e(i + 1), f(i)] = 1
    Vm[f(1), e(d)] = 1
    for i in range(2, d + 1):
        Fm[e(i - 1), f(i)] = 1
    Fm[f(d), e(1)] = sgn(d)
    return UnitaryDieudonneSpace(F, n, Fm, Vm, P, r=1, label=f"B({d})")


def direct_sum(*spaces, label=""):
    F = spaces[0].F
    n = sum(s.n for s in spaces)
    out = {k: np.zeros((2 * n, 2 * n), dtype=np.int64) for k in ("Fm", "Vm", "pairing")}
    off = 0
    for s in spaces:
        idx = np.r_[off:off + s.n, n + off:n + off + s.n]
        for k in out:
            out[k][np.ix_(idx, idx)] = getattr(s, k)
        off += s.n
    return UnitaryDieudonneSpace(F, n, out["Fm"], out["Vm"], out["pairing"],
                                 r=sum(s.r for s in spaces), label=label)


def standard_space(kind, ctx=3, d=None, sigma=None, n=None, literal_text=False):
    """kind 'S', 'B' (with d) or 'M' (with sigma, n); ctx is a FieldCtx, a prime p or (p, m)."""
    F = _field_of(ctx)
    if kind == "S":
        sp = _space_S(F, literal_text)
    elif kind == "B":
        sp = _space_B(F, d)
    elif kind == "M":
        if n is None or sigma is None or not 0 <= 2 * sigma <= n - 1:
            raise InvalidSignatureParameters(f"M(sigma, n) needs 0 <= sigma <= (n-1)/2, got ({sigma}, {n})")
        parts = [_space_B(F, 2 * sigma + 1)] + [_space_S(F)] * (n - 2 * sigma - 1)
        sp = direct_sum(*parts, label=f"M({sigma},{n})")
    else:
        raise ValueError(f"unknown kind {kind}")
    if not literal_text:
        rep = check_space_axioms(sp)
        if not all(v["ok"] for v in rep.values()):
            raise AssertionError(f"standard space {sp.label} fails {rep}")
    return sp


def check_space_axioms(space):
    """Per-axiom pass/fail, with a failing basis index where one exists."""
    F, n = space.F, space.n
    P, Fm, Vm = space.pairing, space.Fm, space.Vm
    rep = {}

    def first_bad(mask):
        idx = np.argwhere(mask)
        return None if not len(idx) else int(idx[0][0])

    rep["alternating"] = first_bad((P != space.F.neg[P.T]) | (np.diag(np.diag(P)) != 0))
    iso = np.zeros_like(P, dtype=bool)
    iso[:n, :n] = P[:n, :n] != 0
    iso[n:, n:] = P[n:, n:] != 0
    rep["isotropic"] = first_bad(iso)
    rep["perfect"] = None if F.rank(P) == 2 * n else 0
    deg = np.zeros_like(P, dtype=bool)
    for M in (Fm, Vm):
        deg[:n, :n] |= M[:n, :n] != 0
        deg[n:, n:] |= M[n:, n:] != 0
    rep["degree"] = first_bad(deg.T)
    # <F e_a, e_b> = <e_a, V e_b>^p
    lhs = F.matmul(Fm.T, P)
    rhs = space.phi[F.matmul(P, Vm)]
    rep["compatibility"] = first_bad(lhs != rhs)
    fv = F.matmul(Fm, space.phi[Vm])
    vf = F.matmul(Vm, space.phi_inv[Fm])
    rep["FV_zero"] = first_bad(((fv != 0) | (vf != 0)).T)
    sig = space.signature()
    rep["signature"] = None if sig == (space.r, n - space.r) else (0 if sig[0] != space.r else n)
    return {k: {"ok": v is None, "basis_index": v} for k, v in rep.items()}


def _preimage_V_in_M1(space, W):
    """{x in M_1 : V x in W} for a subspace W (rows)."""
    F, n = space.F, space.n
    C = F.nullspace(W) if len(W) else np.eye(2 * n, dtype=np.int64)
    if len(C) == 0:
        Z = np.eye(n, dtype=np.int64)
    else:
        Z = F.nullspace(F.matmul(C, space.Vm[:, n:]))
    out = np.zeros((len(Z), 2 * n), dtype=np.int64)
    if len(Z):
        out[:, n:] = space.phi[Z]
    return out


def tau_bar_dims(space):
    if space.signature() != (1, space.n - 1):
        raise SignatureMismatch(f"signature {space.signature()} is not (1, {space.n - 1})")
    F, n = space.F, space.n
    U = np.zeros((n, 2 * n), dtype=np.int64)
    U[:, n:] = np.eye(n, dtype=np.int64)
    dims = [n]
    while True:
        FU = F.span(space.apply_F(U)) if len(U) else U
        pre = _preimage_V_in_M1(space, FU)
        U = F.intersect(pre, U) if len(pre) else pre
        dims.append(len(U))
        if dims[-1] == dims[-2] or len(dims) > n + 1:
            break
    return tuple(dims)


@dataclass(frozen=True)
class GapCertificate:
    sigma: int
    dim_sequence: tuple


def gap_space(space):
    dims = tau_bar_dims(space)
    s = len(dims) - 2
    shape = all(dims[j + 1] == dims[j] - 1 for j in range(s)) and dims[-1] == dims[-2]
    if not shape or 2 * s > space.n - 1:
        raise NonSupersingularPattern(f"dimension sequence {dims} is not of the classified shape")
    return GapCertificate(s, dims)


def _field_inverse(F, A):
    n = len(A)
    R, piv = F.rref(np.hstack([A, np.eye(n, dtype=np.int64)]))
    if piv[:n] != tuple(range(n)):
        raise ZeroDivisionError("singular")
    return R[:, n:]


def _random_invertible(F, n, rng):
    while True:
        A = rng.integers(0, F.q, size=(n, n))
        if F.rank(A) == n:
            return A


def scramble(space, seed=None):
    """Transport the structure through a random graded change of basis (identity for seed None)."""
    F, n = space.F, space.n
    g = np.eye(2 * n, dtype=np.int64)
    if seed is not None:
        rng = np.random.default_rng(seed)
        g[:n, :n] = _random_invertible(F, n, rng)
        g[n:, n:] = _random_invertible(F, n, rng)
    gi = _field_inverse(F, g)
    Fm = F.matmul(F.matmul(gi, space.Fm), space.phi[g])
    Vm = F.matmul(F.matmul(gi, space.Vm), space.phi_inv[g])
    P = F.matmul(F.matmul(g.T, space.pairing), g)
    return UnitaryDieudonneSpace(F, n, Fm, Vm, P, r=space.r, label=space.label + f"~{seed}")


def embed_field(a, F_small, F_big):
    """Embed F_{p^2} (modulus x^2 - u) into F_big, sending x to the least root of X^2 - u."""
    if F_small.m != 1:
        raise ValueError("only F_{p^2} embeds here")
    if F_big.q == F_small.q:
        return np.asarray(a)
    u = (-F_small.modulus[0]) % F_small.p
    roots = np.nonzero(F_big.mul[np.arange(F_big.q), np.arange(F_big.q)] == u)[0]
    rho = int(roots[0])
    dig = F_small.digits[np.asarray(a)]
    return F_big.add[dig[..., 0], F_big.mul[dig[..., 1], rho]]


def extend_scalars(space, F_big):
    emb = lambda M: embed_field(M, space.F, F_big)
    return UnitaryDieudonneSpace(F_big, space.n, emb(space.Fm), emb(space.Vm), emb(space.pairing),
                                 r=space.r, label=space.label + f"@{F_big.q}")


# ---------- the standard isocrystal ----------

def _sqrt_mod(t, p, N):
    t %= p ** N
    r = next((a for a in range(1, p) if (a * a - t) % p == 0), None)
    if r is None:
        return None
    P = p ** N
    for _ in range(N + 1):
        r = (r - (r * r - t) * pow(2 * r, -1, P)) % P
    return r


def _norm_solution(c, u, p, N):
    """(a, b) with a^2 - u b^2 = c mod p^N, c a unit."""
    P = p ** N
    for b in range(p):
        a = _sqrt_mod(c + u * b * b, p, N)
        if a is not None:
            return a, b
    raise ValueError("no norm solution")


class IsocrystalCtx:
    """N = S~^{n-r} + sigma^*(S~)^r in the (g, h) basis plus its adapted basis.

    S~ factor: F(h) = g, F(g) = p h; sigma^* factor: F(g) = h, F(h) = p g; <g, h> = delta.
    For r = 1 the transport T = diag(B, A_hg sigma(B)) carries the adapted basis
    (e, f) into (g, h) coordinates, where B^T {,} sigma(B) is the Gram of `space`.
    T is stored as p^{-1} T_int.
    """

    def __init__(self, n, p, r=1, N=None, space=None):
        if not 0 <= r <= n:
            raise InvalidSignatureParameters(f"need 0 <= r <= n, got r={r}, n={n}")
        self.n, self.p, self.r = n, p, r
        self.space = space or PadicHermitianSpace(n, p, N)
        ctx = self.ctx = self.space.ctx
        self.delta = ctx.delta
        A = ctx.zeros(2 * n, 2 * n)
        J = ctx.zeros(2 * n, 2 * n)
        for a in range(n):
            tilde = a < n - r
            A[n + a, a, 0] = p if tilde else 1
            A[a, n + a, 0] = 1 if tilde else p
            J[a, n + a] = self.delta
            J[n + a, a] = ctx.neg(self.delta)
        self.F_matrix, self.V_matrix, self.pairing = A, A, J
        # {x, y} = delta <x, F y> = x^T (delta J A)_{00} sigma(y)
        DJ = ctx.mul(self.delta[None, None], J)
        self.gram_gh = ctx.matmul(DJ, A)[:n, :n]
        self.T_int = None
        if r == 1:
            self._build_transport()

    def _build_transport(self):
        ctx, n, p = self.ctx, self.n, self.p
        P, N = ctx.P, ctx.N
        u = int(-ctx.modulus[0] % P)
        lam = _norm_solution(P - 1, u, p, N)
        mu = _norm_solution(pow(u, -1, P), u, p, N)
        lam_e = np.array(lam, dtype=np.int64)
        mu_e = np.array(mu, dtype=np.int64)
        inv2u = pow(2 * u, -1, P)
        B = ctx.zeros(n, n)
        pairs, singles = [], []
        if n % 2:
            k = (n - 1) // 2
            for j in range(k):
                pairs.append((2 * j, 2 * j + 1, j, n - 1 - j))
            singles.append((n - 1, k))
        else:
            for j in range((n - 2) // 2):
                pairs.append((2 * j, 2 * j + 1, 1 + j, n - 1 - j))
            singles += [(n - 2, 0), (n - 1, n // 2)]
        for a, b, pv, pw in pairs:
            B[a, pv, 0] = p
            B[b, pv] = ctx.pscale(lam_e, 1)
            B[a, pw, 0] = inv2u
            B[b, pw] = (-lam_e * inv2u) % P
        for a, pos in singles:
            B[a, pos] = ctx.pscale(mu_e, 1)
        # B_int^T {,} sigma(B_int) = p^2 G
        chk = ctx.matmul(ctx.matmul(np.swapaxes(B, 0, 1), self.gram_gh), ctx.sigma(B))
        if not np.array_equal(chk, ctx.pscale(self.space.gram, 2)):
            raise AssertionError("transport does not reach the target Gram matrix")
        Ahg = self.F_matrix[n:, :n]
        T = ctx.zeros(2 * n, 2 * n)
        T[:n, :n] = B
        T[n:, n:] = ctx.matmul(Ahg, ctx.sigma(B))
        self.B_int, self.T_int = B, T
        G = self.space.gram
        dinv = ctx.inv_unit(self.delta)
        Fad = ctx.zeros(2 * n, 2 * n)
        Fad[np.arange(n), n + np.arange(n), 0] = p
        Fad[n + np.arange(n), np.arange(n), 0] = 1
        Jad = ctx.zeros(2 * n, 2 * n)
        Jad[:n, n:] = ctx.mul(dinv[None, None], G)
        Jad[n:, :n] = ctx.neg(ctx.mul(dinv[None, None], np.swapaxes(G, 0, 1)))
        self.F_adapted, self.pairing_adapted = Fad, Jad

    def check(self):
        """Invariants of the model: F^2 = p, tau fixes the basis, perfect pairing, transport."""
        ctx, n = self.ctx, self.n
        A = self.F_matrix
        out = {}
        F2 = ctx.matmul(A, ctx.sigma(A))
        out["F2_is_p"] = bool(np.array_equal(F2, ctx.pscale(ctx.eye(2 * n), 1)))
        out["F_equals_V"] = bool(np.array_equal(ctx.matmul(A, ctx.sigma(A, -1)), F2))
        out["tau_fixes_basis"] = bool(np.array_equal(ctx.pdiv(F2, 1), ctx.eye(2 * n)))
        _, exps, _, _ = smith_normal_form(self.pairing, ctx)
        out["pairing_perfect"] = max(exps) == 0
        if self.T_int is not None:
            T = self.T_int
            out["F_adapted"] = bool(np.array_equal(ctx.matmul(A, ctx.sigma(T)), ctx.matmul(T, self.F_adapted)))
            JT = ctx.matmul(ctx.matmul(np.swapaxes(T, 0, 1), self.pairing), T)
            out["pairing_adapted"] = bool(np.array_equal(JT, ctx.pscale(self.pairing_adapted, 2)))
        return out

    def gram_valuation(self):
        _, exps, _, _ = smith_normal_form(self.gram_gh, self.ctx)
        return int(sum(exps))

    def standard_M0(self):
        """The degree-0 part of the standard lattice, in adapted coordinates."""
        n = self.n
        return std_dual(Lattice(self.ctx, np.swapaxes(self.T_int[:n, :n], 0, 1), 1))


def standard_isocrystal(n, p, r=1, N=None, space=None):
    return IsocrystalCtx(n, p, r, N, space)


# ---------- lattices over W(k) ----------

class KRing:
    """W(k)/p^N for k = F_{p^{2m}} with the embedding of the base ring Z_{p^2}."""

    def __init__(self, iso, m, N=None):
        self.iso, self.m = iso, m
        self.base = iso.ctx
        N = N or min(self.base.N, 8)
        self.F, self.ctx = make_coefficient_ring(iso.p, m, N)
        n = iso.n
        self.G = self.embed(iso.space.gram)
        self.delta = self.embed(iso.delta)
        dinv = self.ctx.inv_unit(self.delta)
        J = self.ctx.zeros(2 * n, 2 * n)
        J[:n, n:] = self.ctx.mul(dinv[None, None], self.G)
        J[n:, :n] = self.ctx.neg(self.ctx.mul(dinv[None, None], np.swapaxes(self.G, 0, 1)))
        self.J = J
        Fad = self.ctx.zeros(2 * n, 2 * n)
        Fad[np.arange(n), n + np.arange(n), 0] = iso.p
        Fad[n + np.arange(n), np.arange(n), 0] = 1
        self.Fad = Fad
        self._restrict = None

    def embed(self, a):
        return self.ctx.embed_base(np.asarray(a) % self.ctx.P, self.base)

    def embed_lattice(self, L):
        return Lattice(self.ctx, self.embed(L.B), L.e)

    def embed_field(self, a):
        return self.ctx.reduce(self.embed(self.base.lift(a)))

    def restrict(self, a):
        """Inverse of embed on the image (elements fixed by sigma^2)."""
        ctx = self.ctx
        if self.m == 1:
            return np.asarray(a) % self.base.P
        if self._restrict is None:
            E = np.stack([self.embed(self.base.scalar(1)), self.embed(self.base.gen())], axis=1)
            Z = WittCtx.prime_ring(ctx.p, ctx.N)
            U, exps, V, _ = smith_normal_form(E[:, :, None], Z)
            if max(exps) > 0:
                raise DescentFailure("base ring is not a direct summand")
            self._restrict = (U[:, :, 0], V[:, :, 0])
        U, V = self._restrict
        a = np.asarray(a) % ctx.P
        c = np.einsum("ij,...j->...i", U, a)[..., :2] % ctx.P
        out = np.einsum("ij,...j->...i", V, c) % ctx.P
        if not np.array_equal(self.embed(out), a):
            raise DescentFailure("element does not come from the base ring")
        return out % self.base.P


def _tau(L, k=1):
    return Lattice(L.ctx, L.ctx.sigma(L.B, 2 * k), L.e)


def _block(L0, L1):
    ctx = L0.ctx
    n = L0.n
    e = max(L0.e, L1.e)
    B = ctx.zeros(2 * n, 2 * n)
    B[:n, :n] = ctx.pscale(L0.B, e - L0.e)
    B[n:, n:] = ctx.pscale(L1.B, e - L1.e)
    return Lattice(ctx, B, e)


def _component(M, j, n):
    rows = M.B[:n] if j == 0 else M.B[n:]
    return Lattice(M.ctx, rows, M.e)


@dataclass
class DieudonneLattice:
    kring: KRing
    M: Lattice  # rank 2n in adapted coordinates (e, f)
    i: int
    origin: Optional[dict] = None

    @property
    def n(self):
        return self.kring.iso.n

    def component(self, j):
        return _component(self.M, j, self.n)

    @classmethod
    def from_M0(cls, kring, L0, i, origin=None):
        """M_1 = sigma(p^i L0^vee) is forced by self-duality."""
        L1 = scaled(dual_form(L0, kring.G, 1), i)
        L1 = Lattice(L1.ctx, L1.ctx.sigma(L1.B), L1.e)
        return cls(kring, _block(L0, L1), i, origin)

    @classmethod
    def standard(cls, kring):
        """The standard lattice, a point for i = 0."""
        return cls.from_M0(kring, kring.embed_lattice(kring.iso.standard_M0()), 0)


def is_point(M: DieudonneLattice, i=None):
    """Report on the four conditions describing points of N_i(k)."""
    i = M.i if i is None else i
    kr, n = M.kring, M.n
    if (n * i) % 2:
        raise ValueError("n*i must be even")
    ctx, L = kr.ctx, M.M
    rep = {}
    FL = Lattice(ctx, ctx.matmul(kr.Fad, ctx.sigma(L.B)), L.e)
    VL = Lattice(ctx, ctx.matmul(kr.Fad, ctx.sigma(L.B, -1)), L.e)
    rep["stable"] = contains(L, FL) and contains(L, VL)
    M0, M1 = M.component(0), M.component(1)
    rep["graded"] = contains(L, _block(M0, M1))
    ok = rep["stable"] and rep["graded"]
    if ok:
        VM1 = Lattice(ctx, ctx.pscale(ctx.sigma(M1.B, -1), 1), M1.e)
        VM0 = Lattice(ctx, ctx.sigma(M0.B, -1), M0.e)
        sig = (index_length(M0, VM1), index_length(M1, VM0))
        rep["signature"] = sig == (kr.iso.r, n - kr.iso.r)
    else:
        rep["signature"] = False
    rep["self_dual"] = L == scaled(dual_form(L, kr.J, 0), i)
    return all(rep.values()), rep


# ---------- Lambda^+(M), Lambda^-(M), superspecial gap ----------

def _iterate(L, op, bound):
    """Return (stable lattice, number of steps) for X -> op(X, tau X)."""
    X, steps = L, 0
    while True:
        Y = op(X, _tau(X))
        if Y == X:
            return X, steps
        X, steps = Y, steps + 1
        if steps > bound:
            raise PrecisionExhausted("tau iteration did not stabilise")


def lambda_pm_lattice(M: DieudonneLattice):
    b = M.n + 2
    lp, _ = _iterate(M.M, join, b)
    lm, _ = _iterate(M.M, meet, b)
    return lp, lm


@dataclass
class SigmaData:
    plus0: int
    plus1: int
    minus0: int
    minus1: int
    gap: int
    lengths: tuple
    tau_stable: bool
    relations: dict = field(default_factory=dict)


def sigma_pm(M: DieudonneLattice):
    n = M.n
    lp, lm = lambda_pm_lattice(M)
    b = n + 2
    comps = [M.component(j) for j in (0, 1)]
    vals = {}
    for j, Mj in enumerate(comps):
        P_j, sp = _iterate(Mj, join, b)
        Q_j, sm = _iterate(Mj, meet, b)
        if P_j != _component(lp, j, n) or Q_j != _component(lm, j, n):
            raise AssertionError("Lambda^pm does not decompose along the grading")
        # the infimum in the definition against the index formula
        vals[f"plus{j}"] = (sp, index_length(P_j, Mj))
        vals[f"minus{j}"] = (sm, index_length(Mj, Q_j))
    rel = {}
    for k, (steps, idx) in vals.items():
        rel[f"{k}_index"] = steps == idx
    s = {k: v[0] for k, v in vals.items()}
    tau_stable = _tau(M.M) == M.M
    rel["plus0_eq_minus1"] = s["plus0"] == s["minus1"] and 2 * s["plus0"] <= n - 1
    rel["plus1_eq_minus0"] = s["plus1"] == s["minus0"] and 2 * s["plus1"] <= n + 1
    p = M.kring.iso.p
    rel["chain"] = (contains(lm, scaled(lp, 1)) and contains(M.M, lm) and contains(lp, M.M)
                    and contains(scaled(lm, -1), lp))
    if tau_stable:
        rel["dichotomy"] = s["plus0"] == s["minus0"] == 0
    else:
        rel["dichotomy"] = s["plus0"] == s["minus0"] - 1
    lengths = tuple(index_length(_iterate_k(comps[0], k), comps[0]) for k in range(s["plus0"] + 1))
    gap = s["plus0"]
    if gap > 0:
        rel["gap_index"] = all(index_length(_component(lp, j, n), _component(lm, j, n)) == 2 * gap + 1
                               for j in (0, 1))
    return SigmaData(s["plus0"], s["plus1"], s["minus0"], s["minus1"], gap, lengths, tau_stable, rel)


def _iterate_k(L, k):
    X = L
    for _ in range(k):
        X = join(X, _tau(X))
    return X


def gap_lattice(M: DieudonneLattice):
    sd = sigma_pm(M)
    if not all(sd.relations.values()):
        raise AssertionError(f"relations fail: {sd.relations}")
    return GapCertificate(sd.gap, sd.lengths)


def descend(kring, X):
    """The Z_{p^2}-lattice whose extension to W(k) is the tau-stable lattice X."""
    ctx, base = kring.ctx, kring.base
    if _tau(X) != X:
        raise DescentFailure("lattice is not tau-stable")
    m = kring.m
    gens = []
    for s in range(ctx.D):
        w = ctx.zeros()
        w[s] = 1
        Y = ctx.mul(w[None, None], X.B)
        tr = sum(ctx.sigma(Y, 2 * l) for l in range(m)) % ctx.P
        gens.append(tr)
    G = np.concatenate(gens, axis=1)
    try:
        Gb = kring.restrict(G)
        L = Lattice(base, Gb, X.e)
    except (DescentFailure, PrecisionExhausted) as exc:
        raise DescentFailure(str(exc))
    if kring.embed_lattice(L) != X:
        raise DescentFailure("descended lattice does not extend back to the input")
    return L


def stratum_vertex(M: DieudonneLattice, i=None):
    i = M.i if i is None else i
    lp, _ = lambda_pm_lattice(M)
    X = _component(lp, 0, M.n)
    Lam = descend(M.kring, X)
    cert = vertex_type(M.kring.iso.space, Lam, i)
    gap = gap_lattice(M).sigma
    if cert.t != gap:
        raise AssertionError(f"orbit type {cert.t} differs from gap {gap}")
    if not contains(M.kring.embed_lattice(Lam), M.component(0)):
        raise AssertionError("M_0 is not inside Lambda_k")
    return Lam, cert


# ---------- points on a closed stratum ----------

def vertex_lambda_pm(kring, Lam, i):
    """Lambda^+ = Lambda + V^{-1}(Lambda) and Lambda^- = p^i (Lambda^+)^perp over W(k)."""
    ctx, n = kring.ctx, kring.iso.n
    L0 = kring.embed_lattice(Lam)
    # V(y) = p sigma^{-1}(y) on f-coordinates, so V^{-1}(L0) = sigma(p^{-1} L0)
    L1 = Lattice(ctx, ctx.sigma(L0.B), L0.e + 1)
    plus = _block(L0, L1)
    minus = scaled(dual_form(plus, kring.J, 0), i)
    t = vertex_type(kring.iso.space, Lam, i).t
    checks = {
        "contained": contains(plus, minus),
        "index0": index_length(_component(plus, 0, n), _component(minus, 0, n)) == 2 * t + 1,
        "index1": index_length(_component(plus, 1, n), _component(minus, 1, n)) == 2 * t + 1,
        "dual0": _component(minus, 0, n) == scaled(dual_form(L0, kring.G, 1), i + 1),
    }
    return plus, minus, checks



class WittQuotient:
    """V_Lambda tensored with k, with lifting of subspaces to W(k)-lattices."""

    def __init__(self, kring, Lam, i):
        self.kring = kring
        space = kring.iso.space
        Q = self.base_quotient = v_lambda_quotient(space, Lam, i)
        self.d = (Q.dim - 1) // 2
        self.A = kring.embed(Q.A[:, Q.qcols])
        self.small = kring.embed_lattice(Q.small)
        self.big = kring.embed_lattice(Q.big)
        self.W = FiniteHermitianSpace(kring.F, kring.embed_field(Q.W.gram))

    def lift(self, U):
        ctx = self.kring.ctx
        rows = U.basis if isinstance(U, Subspace) else np.asarray(U)
        gens = ctx.matmul(self.A, np.swapaxes(ctx.lift(rows), 0, 1))
        stack = np.concatenate([gens, ctx.pscale(self.big.B, 1)], axis=1)
        return join(self.small, Lattice(ctx, stack, self.big.e))


def quotient_gap(F, U):
    """(dim sum of tau-iterates - dim U, dim U - dim intersection) on the finite quotient."""
    phi2 = F.frob_tab[2 % F.D]
    S = I = U.basis
    cur = U.basis
    for _ in range(F.D):
        cur = phi2[cur]
        S = F.span(S, cur)
        I = F.intersect(I, cur) if len(I) else I
    return len(S) - U.dim, U.dim - len(I)


def enumerate_points(space, Lam, i, m, N=None, cap=DEFAULT_CAP, iso=None, kring=None):
    """Points of N_Lambda(k) for k = F_{p^{2m}}, as Dieudonne lattices."""
    iso = iso or IsocrystalCtx(space.n, space.p, space=space)
    kring = kring or KRing(iso, m, N)
    WQ = WittQuotient(kring, Lam, i)
    d = WQ.d
    Ts = enumerate_isotropic(WQ.W, d, cap)
    plus, minus, checks = vertex_lambda_pm(kring, Lam, i)
    if not all(checks.values()):
        raise AssertionError(f"Lambda^pm identities fail: {checks}")
    pts = []
    for T in Ts:
        U = left_orth(WQ.W, T)
        gp, gm = quotient_gap(kring.F, U)
        M0 = WQ.lift(U)
        if not (contains(M0, _component(minus, 0, space.n)) and contains(_component(plus, 0, space.n), M0)):
            raise AssertionError("lifted M_0 is outside Lambda^-_0 <= M_0 <= Lambda^+_0")
        pts.append(DieudonneLattice.from_M0(kring, M0, i, {"vertex": Lam, "U": U, "quotient_gap": gp,
                                                           "quotient_minus": gm}))
    return pts


def point_dump(points, vertex_type_, p, m):
    hist = Counter(P.origin["quotient_gap"] for P in points)
    return json.dumps({"vertex_type": vertex_type_, "field": [p, 2 * m], "count": len(points),
                       "gap_histogram": {str(k): v for k, v in sorted(hist.items())}}, sort_keys=True)
