"""Exact arithmetic in F_{p^{2m}} and in the truncated Witt ring W(F_{p^{2m}})/p^N.

Field elements are encoded as integers 0 <= a < q whose base-p digits are the
coefficients in the power basis of F_p[x]/(f).  Witt ring elements are int64
arrays whose last axis holds the 2m coefficients in Z/p^N[x]/(f~).  W(F_q)/p^N
is the Galois ring over Z/p^N of degree 2m, so any monic lift f~ of f works.
"""
import numpy as np
import sympy

from . import _kernels

from .errors import PrecisionExhausted, FeasibilityExceeded

TABLE_CAP = 2500
_INT_BUDGET = 9.0e18


def least_nonresidue(p):
    for u in range(2, p):
        if pow(u, (p - 1) // 2, p) == p - 1:
            return u
    raise ValueError(p)


def _check_prime(p):
    if p == 2:
        raise ValueError("p = 2 is not supported")
    if not sympy.isprime(p):
        raise ValueError(f"p = {p} is not prime")


def _find_modulus(p, D):
    if D == 2:
        return ((-least_nonresidue(p)) % p, 0, 1)
    x = sympy.Symbol("x")
    # lexicographic search; the first irreducible hit is used
    for k in range(1, p ** D):
        low = [(k // p ** j) % p for j in range(D)]
        if low[0] == 0:
            continue
        poly = sympy.Poly([1] + low[::-1], x, modulus=p)
        if poly.is_irreducible:
            return tuple(low) + (1,)
    raise RuntimeError("no irreducible polynomial found")


class FieldCtx:
    """F_{p^{2m}} with table arithmetic and the Frobenius x -> x^p."""

    def __init__(self, p, m, modulus=None):
        _check_prime(p)
        if m < 1:
            raise ValueError("m must be >= 1")
        self.p, self.m, self.D = p, m, 2 * m
        self.q = p ** self.D
        if self.q > TABLE_CAP:
            raise FeasibilityExceeded(f"field of size {self.q} exceeds table cap {TABLE_CAP}")
        self.modulus = tuple(int(c) % p for c in (modulus or _find_modulus(p, self.D)))
        self._build()

    def _build(self):
        p, D, q = self.p, self.D, self.q
        self.pw = p ** np.arange(D, dtype=np.int64)
        self.digits = (np.arange(q)[:, None] // self.pw[None, :]) % p
        f = np.array(self.modulus[:D], dtype=np.int64)
        Mx = np.zeros((D, D), dtype=np.int64)
        for j in range(D - 1):
            Mx[j + 1, j] = 1
        Mx[:, D - 1] = (-f) % p
        self._mulx = Mx
        for g in range(2, q):
            Mg = self._mulmat(self.digits[g])
            v = np.zeros(D, dtype=np.int64)
            v[0] = 1
            exp = np.empty(q - 1, dtype=np.int64)
            ok = True
            for k in range(q - 1):
                e = int(v @ self.pw)
                if k and e == 1:
                    ok = False
                    break
                exp[k] = e
                v = (Mg @ v) % p
            if ok:
                break
        self.gen = g
        self.exp = exp
        self.log = np.full(q, -1, dtype=np.int64)
        self.log[exp] = np.arange(q - 1)
        a = np.arange(q)
        self.add = self.encode((self.digits[:, None, :] + self.digits[None, :, :]) % p)
        la, lb = np.meshgrid(self.log, self.log, indexing="ij")
        mul = exp[(la + lb) % (q - 1)]
        mul[(la < 0) | (lb < 0)] = 0
        self.mul = mul
        self.neg = self.encode((-self.digits) % p)
        inv = np.zeros(q, dtype=np.int64)
        inv[1:] = exp[(-self.log[1:]) % (q - 1)]
        self.inv = inv
        frob = np.zeros((D, q), dtype=np.int64)
        for k in range(D):
            frob[k, 1:] = exp[(self.log[1:] * p ** k) % (q - 1)]
        self.frob_tab = frob
        self.frobenius_image = int(frob[1, p])  # image of the generator x
        assert np.array_equal(self.add[a, self.neg], np.zeros(q, dtype=np.int64))

    def _mulmat(self, coeffs):
        M = np.zeros((self.D, self.D), dtype=np.int64)
        P = np.eye(self.D, dtype=np.int64)
        for c in coeffs:
            M = (M + c * P) % self.p
            P = (self._mulx @ P) % self.p
        return M

    def encode(self, digits):
        return (np.asarray(digits) % self.p) @ self.pw

    def frob(self, a, k=1):
        return self.frob_tab[k % self.D][a]

    def sub(self, a, b):
        return self.add[a, self.neg[b]]

    def pow(self, a, e):
        a = np.asarray(a)
        out = self.exp[(self.log[a] * e) % (self.q - 1)]
        return np.where(a == 0, 0 if e else 1, out)

    def subfield_mask(self, deg):
        """Elements of the subfield F_{p^deg}."""
        a = np.arange(self.q)
        return self.frob(a, deg) == a

    # linear algebra over F_q; vectors are rows
    def dot(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x), np.asarray(y))
        prod = self.mul[x, y]
        acc = np.zeros(prod.shape[:-1], dtype=np.int64)
        for j in range(prod.shape[-1]):
            acc = self.add[acc, prod[..., j]]
        return acc

    def matmul(self, A, B):
        A, B = np.asarray(A), np.asarray(B)
        return self.dot(A[:, None, :], B.T[None, :, :])

    def rref(self, M):
        M = np.array(M, dtype=np.int64).reshape(-1, np.shape(M)[-1]).copy()
        rows, cols = M.shape
        piv, r = [], 0
        for c in range(cols):
            if r == rows:
                break
            nz = np.nonzero(M[r:, c])[0]
            if not len(nz):
                continue
            k = r + nz[0]
            M[[r, k]] = M[[k, r]]
            M[r] = self.mul[self.inv[M[r, c]], M[r]]
            f = self.neg[M[:, c]]
            f[r] = 0
            M = self.add[M, self.mul[f[:, None], M[r][None, :]]]
            piv.append(c)
            r += 1
        return M[:r], tuple(piv)

    def rank(self, M):
        if np.size(M) == 0:
            return 0
        return len(self.rref(M)[1])

    def nullspace(self, M):
        """Basis (rows) of {x : M x = 0}."""
        M = np.asarray(M, dtype=np.int64)
        n = M.shape[1]
        R, piv = self.rref(M) if M.shape[0] else (np.zeros((0, n), dtype=np.int64), ())
        free = [c for c in range(n) if c not in piv]
        out = np.zeros((len(free), n), dtype=np.int64)
        for t, f in enumerate(free):
            out[t, f] = 1
            for i, c in enumerate(piv):
                out[t, c] = self.neg[R[i, f]]
        return out

    def span(self, *mats):
        rows = [np.asarray(m, dtype=np.int64).reshape(-1, np.shape(m)[-1]) for m in mats]
        M = np.vstack(rows)
        if M.shape[0] == 0:
            return M
        return self.rref(M)[0]

    def intersect(self, U, W):
        U, W = np.asarray(U, dtype=np.int64), np.asarray(W, dtype=np.int64)
        if len(U) == 0 or len(W) == 0:
            return np.zeros((0, U.shape[1] if U.ndim == 2 else W.shape[1]), dtype=np.int64)
        K = self.nullspace(np.vstack([U, W]).T)
        if not len(K):
            return np.zeros((0, U.shape[1]), dtype=np.int64)
        return self.span(self.matmul(K[:, : len(U)], U))

    def contains(self, U, W):
        """Row space of W inside row space of U."""
        if len(W) == 0:
            return True
        return self.rank(np.vstack([U, W])) == self.rank(U)


class WittCtx:
    """W(F_{p^{2m}})/p^N as Z/p^N[x]/(f~), with the Hensel-lifted Frobenius sigma."""

    def __init__(self, field, N):
        self.field = field
        self.p, self.m, self.D, self.N = field.p, field.m, field.D, N
        self.P = field.p ** N
        self._setup(np.array(field.modulus, dtype=np.int64))
        self.sigma_image = self._lift_frobenius()
        self.S = self._sigma_matrix()
        self.delta = solve_delta(self)

    @classmethod
    def prime_ring(cls, p, N):
        """Z/p^N viewed as a degree-1 ring, used for integer Smith forms."""
        self = cls.__new__(cls)
        self.field = None
        self.p, self.m, self.D, self.N, self.P = p, 0, 1, N, p ** N
        self._setup(np.array([0, 1], dtype=np.int64))
        self.S = np.eye(1, dtype=np.int64)
        return self

    def _setup(self, f):
        D, P, N = self.D, self.P, self.N
        if P * P * 16 * max(D * D, 16) >= _INT_BUDGET:
            raise FeasibilityExceeded(f"precision p^{self.N} too large for int64 kernels")
        self.modulus = f
        self._vtab = None
        if P <= 1 << 21:
            tab = np.full(P, N, dtype=np.int64)
            for k in range(N):
                tab[self.p ** k:: self.p ** k] = k
            self._vtab = tab
        xp = np.zeros((2 * D - 1, D), dtype=np.int64)
        cur = np.zeros(D, dtype=np.int64)
        cur[0] = 1
        for k in range(2 * D - 1):
            xp[k] = cur
            top = cur[D - 1]
            cur = np.concatenate([[0], cur[:-1]]) - top * f[:D]
            cur %= P
        T = np.zeros((D, D, D), dtype=np.int64)
        for i in range(D):
            for j in range(D):
                T[i, j] = xp[i + j]
        self.T = T
        if D == 2:
            self._x2 = (int(-f[0] % P), int(-f[1] % P))

    # element helpers
    def zeros(self, *shape):
        return np.zeros(shape + (self.D,), dtype=np.int64)

    def scalar(self, c, *shape):
        a = self.zeros(*shape)
        a[..., 0] = c % self.P
        return a

    def eye(self, n):
        a = self.zeros(n, n)
        a[np.arange(n), np.arange(n), 0] = 1
        return a

    def gen(self):
        a = self.zeros()
        a[min(1, self.D - 1)] = 1
        return a

    def mul(self, a, b):
        if self.D == 2:
            # x^2 = c0 + c1 x
            P, (c0, c1) = self.P, self._x2
            a0, a1, b0, b1 = a[..., 0], a[..., 1], b[..., 0], b[..., 1]
            hi = (a1 * b1) % P
            out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
            out[..., 0] = (a0 * b0 + c0 * hi) % P
            out[..., 1] = (a0 * b1 + a1 * b0 + c1 * hi) % P
            return out
        outer = (a[..., :, None] * b[..., None, :]) % self.P
        return np.einsum("...ij,ijk->...k", outer, self.T) % self.P

    def matmul(self, A, B):
        if self.D == 2:
            P, (c0, c1) = self.P, self._x2
            A0, A1, B0, B1 = A[..., 0], A[..., 1], B[..., 0], B[..., 1]
            hi = (A1 @ B1) % P
            out = np.empty(A.shape[:-2] + B.shape[-2:], dtype=np.int64)
            out[..., 0] = ((A0 @ B0) % P + c0 * hi) % P
            out[..., 1] = ((A0 @ B1) % P + (A1 @ B0) % P + c1 * hi) % P
            return out
        prod = np.einsum("rci,csj->rsij", A, B) % self.P
        return np.einsum("rsij,ijk->rsk", prod, self.T) % self.P

    def add(self, a, b):
        return (a + b) % self.P

    def sub(self, a, b):
        return (a - b) % self.P

    def neg(self, a):
        return (-a) % self.P

    def pscale(self, a, k):
        return (a * self.p ** k) % self.P if k < self.N else np.zeros_like(a)

    def pdiv(self, a, k):
        q = self.p ** k
        assert not np.any(a % q), "inexact division by p^k"
        return a // q

    def val(self, a):
        """Valuation of each element; zero maps to N."""
        a = np.asarray(a) % self.P
        tab = self._vtab
        if tab is not None:
            return tab[a].min(axis=-1)
        zero = ~np.any(a, axis=-1)
        v = np.zeros(a.shape[:-1], dtype=np.int64)
        live = ~zero
        r = a
        while live.any():
            div = np.all(r % self.p == 0, axis=-1) & live
            if not div.any():
                break
            v += div
            r = np.where(div[..., None], r // self.p, r)
            live = div
        v[zero] = self.N
        return v

    def is_zero(self, a):
        return not np.any(np.asarray(a) % self.P)

    def sigma(self, a, k=1):
        k %= max(self.D, 1)
        if k == 0:
            return np.array(a, dtype=np.int64) % self.P
        out = np.asarray(a) % self.P
        for _ in range(k):
            out = np.einsum("ij,...j->...i", self.S, out) % self.P
        return out

    def reduce(self, a):
        """Residue field encoding of each element."""
        return self.field.encode(np.asarray(a) % self.p)

    def lift(self, x):
        """Coefficient lift of field elements (digits in [0, p))."""
        return self.field.digits[np.asarray(x)].astype(np.int64)

    def inv_unit(self, a):
        a = np.asarray(a) % self.P
        if self.field is None:
            return np.vectorize(lambda t: pow(int(t), -1, self.P), otypes=[np.int64])(a)
        if self.D == 2 and self._x2[1] == 0:
            # a^{-1} = conj(a) / (a0^2 - u a1^2)
            c0, P = self._x2[0], self.P
            nrm = (a[..., 0] * a[..., 0] - c0 * ((a[..., 1] * a[..., 1]) % P)) % P
            if np.any(nrm % self.p == 0):
                raise ZeroDivisionError("not a unit")
            ninv = np.vectorize(lambda t: pow(int(t), -1, P), otypes=[np.int64])(nrm)
            out = np.empty_like(a)
            out[..., 0] = (a[..., 0] * ninv) % P
            out[..., 1] = (-a[..., 1] * ninv) % P
            return out
        r = self.reduce(a)
        if np.any(r == 0):
            raise ZeroDivisionError("not a unit")
        b = self.lift(self.field.inv[r])
        two = self.scalar(2, *a.shape[:-1])
        prec = 1
        while prec < self.N:
            b = self.mul(b, self.sub(two, self.mul(a, b)))
            prec *= 2
        return b

    def poly_eval(self, coeffs, s):
        acc = self.zeros(*s.shape[:-1])
        for c in reversed(coeffs):
            acc = self.add(self.mul(acc, s), self.scalar(int(c), *s.shape[:-1]))
        return acc

    def _lift_frobenius(self):
        f = self.modulus
        df = [(k * f[k]) % self.P for k in range(1, len(f))]
        s = self.lift(self.field.frobenius_image)
        for _ in range(self.N + 1):
            fs = self.poly_eval(f, s)
            if self.is_zero(fs):
                break
            s = self.sub(s, self.mul(fs, self.inv_unit(self.poly_eval(df, s))))
        assert self.is_zero(self.poly_eval(f, s))
        return s

    def _sigma_matrix(self):
        S = np.zeros((self.D, self.D), dtype=np.int64)
        cur = self.scalar(1)
        for j in range(self.D):
            S[:, j] = cur
            cur = self.mul(cur, self.sigma_image)
        return S

    def sqrt_of(self, c):
        """Hensel lift of a square root of the integer c (must be a square in F_q)."""
        F = self.field
        r0 = int(c) % self.p
        cand = np.nonzero(F.mul[np.arange(F.q), np.arange(F.q)] == r0)[0]
        if not len(cand):
            raise ValueError("not a square")
        s = self.lift(int(cand[0]))
        cc = self.scalar(c)
        for _ in range(self.N + 1):
            err = self.sub(self.mul(s, s), cc)
            if self.is_zero(err):
                break
            s = self.sub(s, self.mul(err, self.inv_unit((2 * s) % self.P)))
        return s

    def embed_base(self, a, base):
        """Image of elements of the m = 1 ring `base` (coefficients a0 + a1*x, x^2 = u)."""
        a = np.asarray(a)
        if self.m == 1:
            return a % self.P
        u = (-int(base.modulus[0])) % self.p
        rho = getattr(self, "_rho", None)
        if rho is None:
            # x^2 = u in the base ring with u the least non-residue (as an integer lift)
            rho = self.sqrt_of(u)
            self._rho = rho
        a0 = self.scalar(0, *a.shape[:-1])
        a0[..., 0] = a[..., 0]
        a1 = self.scalar(0, *a.shape[:-1])
        a1[..., 0] = a[..., 1]
        return self.add(a0, self.mul(a1, rho))

    def random(self, rng, *shape):
        return rng.integers(0, self.P, size=shape + (self.D,), dtype=np.int64)

    def random_unimodular(self, rng, n):
        """Random matrix invertible over the ring (unit determinant)."""
        while True:
            A = self.random(rng, n, n)
            if self.field is None or self.field.rank(self.reduce(A)) == n:
                return A


def make_coefficient_ring(p, m, N):
    _check_prime(p)
    if m < 1 or N < 1:
        raise ValueError("need m >= 1 and N >= 1")
    F = FieldCtx(p, m)
    return F, WittCtx(F, N)


def solve_delta(ctx):
    """A unit delta with sigma(delta) = -delta, from the -1 eigenspace of sigma."""
    if ctx.m == 1 and ctx.modulus[1] == 0:
        return ctx.gen()
    M = (ctx.S + np.eye(ctx.D, dtype=np.int64)) % ctx.P
    Z = WittCtx.prime_ring(ctx.p, ctx.N)
    U, exps, V, _ = smith_normal_form(M[:, :, None], Z, strict=False)
    for j, e in enumerate(exps):
        if e >= ctx.N:
            cand = V[:, j, 0] % ctx.P
            if np.any(cand % ctx.p):
                d = cand.astype(np.int64)
                assert ctx.is_zero(ctx.add(ctx.sigma(d), d))
                return d
    raise RuntimeError("no unit in the -1 eigenspace of sigma")


def _fast(ctx):
    return _kernels.backend() == "numba" and ctx.D == 2 and ctx._vtab is not None


def smith_normal_form(A, ctx, strict=True):
    """U A V = diag(p^e_1, ..., p^e_k) over the truncated ring.

    Returns (U, exponents, V, slack) with slack = N - max(e).  Pivots are chosen
    by minimal valuation, so exponents come out nondecreasing.
    """
    A = np.array(A, dtype=np.int64) % ctx.P
    if _fast(ctx):
        U, e, V, code = _kernels._snf_loop(A, *ctx._x2, ctx.p, ctx.N, ctx._vtab, strict)
        if code:
            raise PrecisionExhausted(f"no unit pivot with precision p^{ctx.N}")
        exps = [int(x) for x in e]
        return U, exps, V, (ctx.N - max(exps) if exps else ctx.N)
    r, c = A.shape[:2]
    U, V = ctx.eye(r), ctx.eye(c)
    exps = []
    for t in range(min(r, c)):
        vals = ctx.val(A[t:, t:])
        k = int(np.argmin(vals))
        i, j = divmod(k, c - t)
        v = int(vals[i, j])
        if v >= ctx.N:
            if strict:
                raise PrecisionExhausted(f"no unit pivot at step {t} with precision p^{ctx.N}")
            exps.extend([ctx.N] * (min(r, c) - t))
            break
        i += t
        j += t
        A[[t, i]] = A[[i, t]]
        U[[t, i]] = U[[i, t]]
        A[:, [t, j]] = A[:, [j, t]]
        V[:, [t, j]] = V[:, [j, t]]
        winv = ctx.inv_unit(ctx.pdiv(A[t, t], v))
        A[t] = ctx.mul(winv[None], A[t])
        U[t] = ctx.mul(winv[None], U[t])
        f = ctx.pdiv(A[t + 1:, t], v)
        A[t + 1:] = ctx.sub(A[t + 1:], ctx.mul(f[:, None], A[t][None]))
        U[t + 1:] = ctx.sub(U[t + 1:], ctx.mul(f[:, None], U[t][None]))
        g = ctx.pdiv(A[t, t + 1:], v)
        A[:, t + 1:] = ctx.sub(A[:, t + 1:], ctx.mul(A[:, t][:, None], g[None]))
        V[:, t + 1:] = ctx.sub(V[:, t + 1:], ctx.mul(V[:, t][:, None], g[None]))
        exps.append(v)
    slack = ctx.N - max(exps) if exps else ctx.N
    return U, exps, V, slack


def hermite_form(A, ctx):
    """Canonical lower-triangular column basis of the lattice spanned by the columns of A.

    Diagonal entries are exact powers p^v_i; entry (i, j), j < i, has coefficients
    reduced into [0, p^v_i).  Requires full row rank at the working precision.
    """
    A = np.array(A, dtype=np.int64) % ctx.P
    if _fast(ctx):
        H, d, code = _kernels._hermite_loop(A, *ctx._x2, ctx.p, ctx.N, ctx._vtab)
        if code:
            raise PrecisionExhausted(f"rank deficient with precision p^{ctx.N}")
        return H, [int(x) for x in d]
    n, k = A.shape[:2]
    diag = []
    for i in range(n):
        vals = ctx.val(A[i, i:])
        j = i + int(np.argmin(vals))
        v = int(vals[j - i])
        if v >= ctx.N:
            raise PrecisionExhausted(f"rank deficient at row {i} with precision p^{ctx.N}")
        A[:, [i, j]] = A[:, [j, i]]
        winv = ctx.inv_unit(ctx.pdiv(A[i, i], v))
        A[:, i] = ctx.mul(A[:, i], winv[None])
        g = ctx.pdiv(A[i, i + 1:], v)
        A[:, i + 1:] = ctx.sub(A[:, i + 1:], ctx.mul(A[:, i][:, None], g[None]))
        diag.append(v)
    A = A[:, :n]
    for i in range(n):
        q = ctx.p ** diag[i]
        if i:
            quo = A[i, :i] // q
            A[:, :i] = ctx.sub(A[:, :i], ctx.mul(A[:, i][:, None], quo[None]))
    return A, diag


def inv_unimodular(A, ctx):
    """Inverse of a matrix invertible over the ring: invert mod p, then Newton."""
    A = np.asarray(A, dtype=np.int64) % ctx.P
    n = A.shape[0]
    F = ctx.field
    if F is None:
        U, _, V, _ = smith_normal_form(A, ctx)
        return ctx.matmul(V, U)
    red = ctx.reduce(A)
    aug = np.hstack([red, np.eye(n, dtype=np.int64)])
    R, piv = F.rref(aug)
    if piv[:n] != tuple(range(n)):
        raise ZeroDivisionError("matrix is not invertible mod p")
    X = ctx.lift(R[:, n:])
    two = ctx.scalar(2, n, n) * np.eye(n, dtype=np.int64)[..., None]
    prec = 1
    while prec < ctx.N:
        X = ctx.matmul(X, ctx.sub(two, ctx.matmul(A, X)))
        prec *= 2
    return X
