"""Hot loops: Fermat point counting, isotropic row extension, Smith and Hermite forms.

Each kernel has a numba version and a pure-numpy version computing the same
thing.  BTSTRATA_NO_JIT=1 (or numba missing) selects numpy.
"""
import os

import numpy as np

try:
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

_backend = "numpy" if (os.environ.get("BTSTRATA_NO_JIT", "").lower() in ("1", "true", "yes")
                       or not HAVE_NUMBA) else "numba"


def backend():
    return _backend


def set_backend(name):
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(name)
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


def _maybe_jit(f):
    return njit(cache=True)(f) if HAVE_NUMBA else f


# ---------- Fermat: count x in F_q^k with sum pw[x_j] = 0 ----------

def _fermat_loop(pw, add, k):
    q = pw.shape[0]
    idx = np.zeros(k, dtype=np.int64)
    count = 0
    total = q ** k
    for _ in range(total):
        s = 0
        for j in range(k):
            s = add[s, pw[idx[j]]]
        if s == 0:
            count += 1
        j = 0
        while j < k:
            idx[j] += 1
            if idx[j] < q:
                break
            idx[j] = 0
            j += 1
    return count


_fermat_jit = _maybe_jit(_fermat_loop)


def _fermat_np(pw, add, k):
    s = np.zeros(1, dtype=np.int64)
    for _ in range(k):
        s = add[s[:, None], pw[None, :]].ravel()
    return int(np.count_nonzero(s == 0))


def fermat_affine_count(pw, add, k):
    pw = np.ascontiguousarray(pw, dtype=np.int64)
    add = np.ascontiguousarray(add, dtype=np.int64)
    if _backend == "numba":
        return int(_fermat_jit(pw, add, k))
    return _fermat_np(pw, add, k)


# ---------- isotropic extension ----------
# Rows are RREF rows of a subspace T; a candidate row x must satisfy
# (x, x) = 0, (t, x) = 0, (x, t) = 0 for earlier rows t, with
# (x, y) = sum_ij x_i G_ij phi(y_j).

@_maybe_jit
def _form(x, y, G, add, mul, phi):
    l = x.shape[0]
    acc = 0
    for i in range(l):
        if x[i] == 0:
            continue
        inner = 0
        for j in range(l):
            inner = add[inner, mul[G[i, j], phi[y[j]]]]
        acc = add[acc, mul[x[i], inner]]
    return acc


@_maybe_jit
def _extend_loop(prefixes, piv, free, G, add, mul, phi):
    S, a, l = prefixes.shape
    q = add.shape[0]
    nf = free.shape[0]
    total = q ** nf
    x = np.zeros(l, dtype=np.int64)
    keep = np.zeros((S, total), dtype=np.bool_)
    for s in range(S):
        for c in range(total):
            x[:] = 0
            x[piv] = 1
            r = c
            for j in range(nf):
                x[free[j]] = r % q
                r //= q
            ok = _form(x, x, G, add, mul, phi) == 0
            b = 0
            while ok and b < a:
                t = prefixes[s, b]
                if _form(t, x, G, add, mul, phi) != 0 or _form(x, t, G, add, mul, phi) != 0:
                    ok = False
                b += 1
            keep[s, c] = ok
    n_out = 0
    for s in range(S):
        for c in range(total):
            if keep[s, c]:
                n_out += 1
    out = np.zeros((n_out, a + 1, l), dtype=np.int64)
    k = 0
    for s in range(S):
        for c in range(total):
            if keep[s, c]:
                out[k, :a] = prefixes[s]
                out[k, a, piv] = 1
                r = c
                for j in range(nf):
                    out[k, a, free[j]] = r % q
                    r //= q
                k += 1
    return out


def _form_np(X, Y, G, add, mul, phi):
    """(x, y) for stacked rows X (k, l) and Y (k, l)."""
    PY = phi[Y]
    l = X.shape[1]
    acc = np.zeros(X.shape[0], dtype=np.int64)
    for i in range(l):
        inner = np.zeros(X.shape[0], dtype=np.int64)
        for j in range(l):
            inner = add[inner, mul[G[i, j], PY[:, j]]]
        acc = add[acc, mul[X[:, i], inner]]
    return acc


def _extend_np(prefixes, piv, free, G, add, mul, phi):
    S, a, l = prefixes.shape
    q = add.shape[0]
    nf = len(free)
    total = q ** nf
    C = np.zeros((total, l), dtype=np.int64)
    C[:, piv] = 1
    r = np.arange(total)
    for j in range(nf):
        C[:, free[j]] = r % q
        r //= q
    C = C[_form_np(C, C, G, add, mul, phi) == 0]
    outs = []
    for s in range(S):
        ok = np.ones(len(C), dtype=bool)
        for b in range(a):
            T = np.broadcast_to(prefixes[s, b], C.shape)
            ok &= _form_np(T, C, G, add, mul, phi) == 0
            ok &= _form_np(C, T, G, add, mul, phi) == 0
        X = C[ok]
        block = np.empty((len(X), a + 1, l), dtype=np.int64)
        block[:, :a] = prefixes[s]
        block[:, a] = X
        outs.append(block)
    if not outs:
        return np.zeros((0, a + 1, l), dtype=np.int64)
    return np.concatenate(outs)


def extend_isotropic(prefixes, piv, free, G, add, mul, phi):
    args = (np.ascontiguousarray(prefixes, dtype=np.int64), int(piv),
            np.ascontiguousarray(free, dtype=np.int64),
            np.ascontiguousarray(G, dtype=np.int64), np.ascontiguousarray(add, dtype=np.int64),
            np.ascontiguousarray(mul, dtype=np.int64), np.ascontiguousarray(phi, dtype=np.int64))
    if _backend == "numba":
        return _extend_loop(*args)
    return _extend_np(*args)


# ---------- Smith and Hermite forms over Z/p^N[x]/(x^2 - c0 - c1 x) ----------
# Elements are coefficient pairs.  Return code 0 means success, 1 means the
# remaining block has no element of valuation < N.

@_maybe_jit
def _inv_mod(a, P):
    r0, r1, s0, s1 = P, a % P, 0, 1
    while r1:
        qq = r0 // r1
        r0, r1 = r1, r0 - qq * r1
        s0, s1 = s1, s0 - qq * s1
    return s0 % P


@_maybe_jit
def _mul2(a0, a1, b0, b1, c0, c1, P):
    hi = (a1 * b1) % P
    return (a0 * b0 + c0 * hi) % P, (a0 * b1 + a1 * b0 + c1 * hi) % P


@_maybe_jit
def _inv2(a0, a1, c0, c1, P):
    # (a0 + a1 x)(b0 + b1 x) = 1 with x^2 = c0 + c1 x; conj(x) = c1 - x
    b0, b1 = (a0 + a1 * c1) % P, (-a1) % P
    n0, _ = _mul2(a0, a1, b0, b1, c0, c1, P)
    ni = _inv_mod(n0, P)
    return (b0 * ni) % P, (b1 * ni) % P


@_maybe_jit
def _snf_loop(A, c0, c1, p, N, vtab, strict):
    P = p ** N
    r, c = A.shape[0], A.shape[1]
    k = min(r, c)
    U = np.zeros((r, r, 2), dtype=np.int64)
    V = np.zeros((c, c, 2), dtype=np.int64)
    for a in range(r):
        U[a, a, 0] = 1
    for a in range(c):
        V[a, a, 0] = 1
    exps = np.full(k, N, dtype=np.int64)
    for t in range(k):
        best, bi, bj = N, -1, -1
        for a in range(t, r):
            for b in range(t, c):
                v = min(vtab[A[a, b, 0]], vtab[A[a, b, 1]])
                if v < best:
                    best, bi, bj = v, a, b
        if best >= N:
            if strict:
                return U, exps, V, 1
            return U, exps, V, 0
        v = best
        for b in range(c):
            for z in range(2):
                A[t, b, z], A[bi, b, z] = A[bi, b, z], A[t, b, z]
        for b in range(r):
            for z in range(2):
                U[t, b, z], U[bi, b, z] = U[bi, b, z], U[t, b, z]
        for a in range(r):
            for z in range(2):
                A[a, t, z], A[a, bj, z] = A[a, bj, z], A[a, t, z]
        for a in range(c):
            for z in range(2):
                V[a, t, z], V[a, bj, z] = V[a, bj, z], V[a, t, z]
        pv = p ** v
        w0, w1 = _inv2(A[t, t, 0] // pv, A[t, t, 1] // pv, c0, c1, P)
        for b in range(c):
            A[t, b, 0], A[t, b, 1] = _mul2(w0, w1, A[t, b, 0], A[t, b, 1], c0, c1, P)
        for b in range(r):
            U[t, b, 0], U[t, b, 1] = _mul2(w0, w1, U[t, b, 0], U[t, b, 1], c0, c1, P)
        for a in range(t + 1, r):
            f0, f1 = A[a, t, 0] // pv, A[a, t, 1] // pv
            if f0 == 0 and f1 == 0:
                continue
            for b in range(c):
                x0, x1 = _mul2(f0, f1, A[t, b, 0], A[t, b, 1], c0, c1, P)
                A[a, b, 0] = (A[a, b, 0] - x0) % P
                A[a, b, 1] = (A[a, b, 1] - x1) % P
            for b in range(r):
                x0, x1 = _mul2(f0, f1, U[t, b, 0], U[t, b, 1], c0, c1, P)
                U[a, b, 0] = (U[a, b, 0] - x0) % P
                U[a, b, 1] = (U[a, b, 1] - x1) % P
        for b in range(t + 1, c):
            g0, g1 = A[t, b, 0] // pv, A[t, b, 1] // pv
            if g0 == 0 and g1 == 0:
                continue
            for a in range(r):
                x0, x1 = _mul2(A[a, t, 0], A[a, t, 1], g0, g1, c0, c1, P)
                A[a, b, 0] = (A[a, b, 0] - x0) % P
                A[a, b, 1] = (A[a, b, 1] - x1) % P
            for a in range(c):
                x0, x1 = _mul2(V[a, t, 0], V[a, t, 1], g0, g1, c0, c1, P)
                V[a, b, 0] = (V[a, b, 0] - x0) % P
                V[a, b, 1] = (V[a, b, 1] - x1) % P
        exps[t] = v
    return U, exps, V, 0


@_maybe_jit
def _hermite_loop(A, c0, c1, p, N, vtab):
    P = p ** N
    n, k = A.shape[0], A.shape[1]
    diag = np.zeros(n, dtype=np.int64)
    for i in range(n):
        best, bj = N, -1
        for b in range(i, k):
            v = min(vtab[A[i, b, 0]], vtab[A[i, b, 1]])
            if v < best:
                best, bj = v, b
        if best >= N:
            return A[:, :n].copy(), diag, 1
        v = best
        for a in range(n):
            for z in range(2):
                A[a, i, z], A[a, bj, z] = A[a, bj, z], A[a, i, z]
        pv = p ** v
        w0, w1 = _inv2(A[i, i, 0] // pv, A[i, i, 1] // pv, c0, c1, P)
        for a in range(n):
            A[a, i, 0], A[a, i, 1] = _mul2(A[a, i, 0], A[a, i, 1], w0, w1, c0, c1, P)
        for b in range(i + 1, k):
            g0, g1 = A[i, b, 0] // pv, A[i, b, 1] // pv
            if g0 == 0 and g1 == 0:
                continue
            for a in range(n):
                x0, x1 = _mul2(A[a, i, 0], A[a, i, 1], g0, g1, c0, c1, P)
                A[a, b, 0] = (A[a, b, 0] - x0) % P
                A[a, b, 1] = (A[a, b, 1] - x1) % P
        diag[i] = v
    H = A[:, :n].copy()
    for i in range(1, n):
        q = p ** diag[i]
        for j in range(i):
            g0, g1 = H[i, j, 0] // q, H[i, j, 1] // q
            if g0 == 0 and g1 == 0:
                continue
            for a in range(n):
                x0, x1 = _mul2(H[a, i, 0], H[a, i, 1], g0, g1, c0, c1, P)
                H[a, j, 0] = (H[a, j, 0] - x0) % P
                H[a, j, 1] = (H[a, j, 1] - x1) % P
    return H, diag, 0
