"""Type A_{m-1} Coxeter combinatorics twisted by conjugation with w0.

Permutations are one-line tuples (w(1), ..., w(m)); generator subsets are
frozensets of indices i standing for s_i = (i, i+1).
"""
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

from .errors import FeasibilityExceeded, InvalidParameters, NotMinimalRep

MAX_M = 11


@dataclass(frozen=True)
class SymmetricGroupCtx:
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise InvalidParameters("m >= 1")

    @property
    def S(self):
        return frozenset(range(1, self.m))

    @property
    def identity(self):
        return tuple(range(1, self.m + 1))

    @property
    def w0(self):
        return tuple(range(self.m, 0, -1))

    def s(self, i):
        w = list(self.identity)
        w[i - 1], w[i] = w[i], w[i - 1]
        return tuple(w)

    def elements(self):
        if self.m > MAX_M:
            raise FeasibilityExceeded(f"S_{self.m} is beyond the enumeration bound m <= {MAX_M}")
        return permutations(range(1, self.m + 1))


def compose(u, v):
    """(u v)(i) = u(v(i))."""
    return tuple(u[x - 1] for x in v)


def inverse(w):
    out = [0] * len(w)
    for i, x in enumerate(w, 1):
        out[x - 1] = i
    return tuple(out)


def length(w):
    return sum(1 for a in range(len(w)) for b in range(a + 1, len(w)) if w[a] > w[b])


def cycle(m, entries):
    """Permutation sending entries[0] -> entries[1] -> ... -> entries[0]."""
    w = list(range(1, m + 1))
    for a, b in zip(entries, entries[1:] + entries[:1]):
        w[a - 1] = b
    return tuple(w)


def right_descents(w):
    return frozenset(i for i in range(1, len(w)) if w[i - 1] > w[i])


def left_descents(w):
    return right_descents(inverse(w))


def support(w):
    """Generators occurring in a reduced word: s_i unless w preserves {1..i}."""
    return frozenset(i for i in range(1, len(w)) if max(w[:i]) > i)


def is_min_rep(w, I, J):
    return not (left_descents(w) & set(I)) and not (right_descents(w) & set(J))


def min_double_coset_reps(ctx, I, J):
    I, J = frozenset(I), frozenset(J)
    return sorted(w for w in ctx.elements() if is_min_rep(w, I, J))


def parabolic_elements(ctx, I):
    """W_I by closure under the generators in I."""
    gens = [ctx.s(i) for i in I]
    seen = {ctx.identity}
    todo = [ctx.identity]
    while todo:
        w = todo.pop()
        for g in gens:
            x = compose(w, g)
            if x not in seen:
                seen.add(x)
                todo.append(x)
    return seen


@lru_cache(maxsize=None)
def perm_tables(m):
    """Element list, lengths, descent bitmasks and multiplication tables by each s_i."""
    ctx = SymmetricGroupCtx(m)
    elems = list(ctx.elements())
    index = {w: k for k, w in enumerate(elems)}
    lens = np.array([length(w) for w in elems], dtype=np.int64)
    ldes = np.array([sum(1 << i for i in left_descents(w)) for w in elems], dtype=np.int64)
    rdes = np.array([sum(1 << i for i in right_descents(w)) for w in elems], dtype=np.int64)
    left = {i: np.array([index[compose(ctx.s(i), w)] for w in elems]) for i in range(1, m)}
    right = {i: np.array([index[compose(w, ctx.s(i))] for w in elems]) for i in range(1, m)}
    return elems, lens, ldes, rdes, left, right


def double_cosets_brute(ctx, I, J):
    """Oracle: components of W under s_i . (i in I) and . s_j (j in J), with their minimal-length elements."""
    elems, lens, _, _, left, right = perm_tables(ctx.m)
    lab = np.arange(len(elems))
    moves = [left[i] for i in I] + [right[j] for j in J]
    while True:
        new = lab
        for mv in moves:
            new = np.minimum(new, new[mv])
        # pointer jumping keeps labels as component minima
        new = new[new]
        if np.array_equal(new, lab):
            break
        lab = new
    out = []
    for c in np.unique(lab):
        members = np.nonzero(lab == c)[0]
        lmin = lens[members].min()
        out.append(({elems[k] for k in members}, sorted(elems[k] for k in members if lens[k] == lmin)))
    return out


def min_reps_fast(ctx, I, J):
    """Descent criterion on the cached tables."""
    elems, _, ldes, rdes, _, _ = perm_tables(ctx.m)
    im = sum(1 << i for i in I)
    jm = sum(1 << j for j in J)
    return sorted(elems[k] for k in np.nonzero(((ldes & im) == 0) & ((rdes & jm) == 0))[0])


def f_action(ctx, x):
    """Conjugation by w0 on permutations; s_i -> s_{m-i} on generator subsets."""
    if isinstance(x, (set, frozenset)):
        return frozenset(ctx.m - i for i in x)
    w0 = ctx.w0
    return compose(compose(w0, tuple(x)), w0)


def _blocks(m, I):
    sizes, cur = [], 1
    for i in range(1, m):
        if i in I:
            cur += 1
        else:
            sizes.append(cur)
            cur = 1
    sizes.append(cur)
    return sizes


def dim_parabolic(ctx, I):
    """l(w0) - l(w0 of W_I): dimension of G/P_I."""
    m = ctx.m
    return m * (m - 1) // 2 - sum(b * (b - 1) // 2 for b in _blocks(m, frozenset(I)))


def _check_rep(ctx, I, w):
    if not is_min_rep(w, I, f_action(ctx, frozenset(I))):
        raise NotMinimalRep(f"{w} is not minimal in W_I w W_F(I) for I = {sorted(I)}")


def dim_dl(ctx, I, w):
    I = frozenset(I)
    _check_rep(ctx, I, w)
    return length(w) + dim_parabolic(ctx, I & f_action(ctx, I)) - dim_parabolic(ctx, I)


def f_stable_proper_subsets(ctx):
    S = sorted(ctx.S)
    for k in range(len(S)):
        for J in combinations(S, k):
            J = frozenset(J)
            if f_action(ctx, J) == J:
                yield J


def is_irreducible_dl(ctx, I, w):
    """No F-stable proper J with W_I w inside W_J."""
    I = frozenset(I)
    _check_rep(ctx, I, w)
    need = I | support(w)
    return not any(need <= J for J in f_stable_proper_subsets(ctx))


def f_orbit_union(ctx, I):
    out, cur = set(I), frozenset(I)
    for _ in range(2):
        cur = f_action(ctx, cur)
        out |= cur
    return frozenset(out)


@dataclass
class DLDatum:
    d: int
    sigma: int
    I_lambda: frozenset
    I: frozenset
    w: tuple
    flags: dict = field(default_factory=dict)

    @property
    def ctx(self):
        return SymmetricGroupCtx(2 * self.d + 1)


def i_lambda(d):
    return frozenset(list(range(1, d + 1)) + list(range(d + 2, 2 * d + 1)))


def i_sigma(d, sigma, printed=False):
    """Default: {s_1..s_{d-sigma-1}} with its w0-mirror {s_{d+sigma+2}..s_{2d}}.

    printed=True evaluates the literal ranges {s_1..s_{d-sigma-1}, s_{2d-sigma+1}..s_{2d}},
    which are not F-stable in general.
    """
    lo = list(range(1, d - sigma))
    hi = list(range(2 * d - sigma + 1, 2 * d + 1)) if printed else list(range(d + sigma + 2, 2 * d + 1))
    return frozenset(lo + hi)


def w_sigma(d, sigma):
    return cycle(2 * d + 1, list(range(d + sigma + 1, d, -1)))


def eo_dl_data(d, sigma, printed=False):
    if not (0 <= sigma <= d):
        raise InvalidParameters(f"need 0 <= sigma <= d, got (d, sigma) = ({d}, {sigma})")
    ctx = SymmetricGroupCtx(2 * d + 1)
    I, w = i_sigma(d, sigma, printed), w_sigma(d, sigma)
    flags = {
        "length_is_sigma": length(w) == sigma,
        "F_stable": f_action(ctx, I) == I,
        "minimal": is_min_rep(w, I, I),
        "twisted_minimal": is_min_rep(w, I, f_action(ctx, I)),
    }
    if flags["twisted_minimal"]:
        flags["dim"] = dim_dl(ctx, I, w)
    return DLDatum(d, sigma, i_lambda(d), I, w, flags)

