"""The eleven acceptance checks, shared by `btstrata verify` and the test suite."""
import time
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import building, dieudonne as dd, hermitian_ff as hf, lattice as lt, weyl
from .errors import NotAVertex, OddIndexViolation


@dataclass
class CriterionResult:
    number: int
    name: str
    ok: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        return f"criterion {self.number:2d} [{'PASS' if self.ok else 'FAIL'}] {self.name} ({self.seconds:.1f}s)"


def _type(space, L, i=0):
    try:
        return lt.vertex_type(space, L, i).t
    except NotAVertex:
        return None


def vertex_of_type(space, t, i=0, box=1, skip=0):
    """A diagonal vertex of type t, taking the skip-th one in scan order."""
    for r in product(range(-box, box + 1), repeat=space.n):
        L = lt.diag_lattice(space, r)
        if _type(space, L, i) == t:
            if skip == 0:
                return L
            skip -= 1
    raise LookupError(f"no diagonal vertex of type {t} in box {box}")


def c1_nu(seed=0):
    want = {(1, 2, 3): 4, (2, 3, 3): 28, (1, 2, 5): 6, (2, 3, 5): 126}
    got, ok = {}, True
    for (r, l, p), v in want.items():
        a = hf.nu(r, l, p)
        W = hf.FiniteHermitianSpace.standard(p, l)
        b = len(hf.enumerate_N_brute(W, r))
        got[f"nu({r},{l}) p={p}"] = [a, b]
        ok &= a == b == v
    return ok, got


def c2_fermat(seed=0):
    det, ok = {}, True
    for l, v in zip((1, 2, 3), (4, 28, 280)):
        vals = [hf.fermat_count(l, 3, m) for m in ("brute", "recursion", "closed")]
        det[f"l={l}"] = vals
        ok &= vals == [v] * 3
    rep = hf.sigma_variant_report(3)
    det["j0_consistent"], det["j1_consistent"] = rep["j0_consistent"], rep["j1_consistent"]
    ok &= rep["j0_consistent"] and not rep["j1_consistent"]
    return ok, det


FERMAT_GRID = {3: range(2, 8), 5: range(2, 6)}


def c3_nu_fermat(seed=0):
    det, ok = {}, True
    for p, ls in FERMAT_GRID.items():
        F = hf.field(p)
        for l in ls:
            a = hf.nu(l - 1, l, p)
            b = hf.fermat_count(l - 1, p, "closed")
            row = [a, b]
            if F.q ** l <= 10 ** 7:
                row.append(hf.fermat_count_field(l - 1, F))
            det[f"p={p} l={l}"] = row
            ok &= len(set(row)) == 1
    return ok, det


def c4_spaces(seed=0, scrambles=100, nmax=9):
    rng = np.random.default_rng(seed)
    F = hf.field(3)
    bad = []
    spaces = [dd.standard_space("S", F)] + [dd.standard_space("B", F, d=d) for d in range(1, nmax + 1)]
    for n in range(1, nmax + 1):
        for s in range((n - 1) // 2 + 1):
            spaces.append(dd.standard_space("M", F, sigma=s, n=n))
    for sp in spaces:
        if not all(v["ok"] for v in dd.check_space_axioms(sp).values()):
            bad.append(sp.label)
    classified = 0
    for n in range(1, nmax + 1):
        for s in range((n - 1) // 2 + 1):
            sp = dd.standard_space("M", F, sigma=s, n=n)
            ref = dd.gap_space(sp)
            if ref.sigma != s:
                bad.append(f"gap M({s},{n}) = {ref.sigma}")
            for _ in range(scrambles):
                sc = dd.scramble(sp, int(rng.integers(1 << 31)))
                if dd.gap_space(sc) != ref:
                    bad.append(f"scramble of M({s},{n})")
                classified += 1
    return not bad, {"spaces": len(spaces), "scrambles": classified, "violations": bad[:10]}


def _transported(space, g):
    """The same abstract space in coordinates x' = g x."""
    ctx = space.ctx
    gi = lt.inv_unimodular(g, ctx)
    out = lt.PadicHermitianSpace(space.n, space.p, ctx.N)
    out.gram = ctx.matmul(ctx.matmul(np.swapaxes(gi, 0, 1), space.gram), ctx.sigma(gi))
    return out


def c5_lattice(seed=0, conjugates=1000, ns=(3, 4, 5, 6), ps=(3, 5)):
    rng = np.random.default_rng(seed)
    viol, stats = [], {}
    for n, p in product(ns, ps):
        sp = lt.PadicHermitianSpace(n, p)
        top = (n - 1) // 2
        verts, tmax = [], -1
        for r in product(range(-2, 3), repeat=n):
            L = lt.diag_lattice(sp, r)
            try:
                t = lt.vertex_type(sp, L, 0).t
            except OddIndexViolation:
                viol.append(("odd", n, p, r))
                continue
            except NotAVertex:
                t = None
            if t != lt.diag_type_closed_form(n, r):
                viol.append(("closed-form", n, p, r))
            if t is not None:
                if not 0 <= t <= top:
                    viol.append(("range", n, p, r))
                verts.append((r, L, t))
                tmax = max(tmax, t)
        if tmax != top:
            viol.append(("max-type", n, p, tmax))
        for (_, A, ta), (_, B, tb) in product(verts, verts):
            if A != B and lt.contains(A, B) and not tb < ta:
                viol.append(("type-ineq", n, p))
        for _ in range(conjugates):
            g = sp.ctx.random_unimodular(rng, n)
            sp2 = _transported(sp, g)
            (_, A, ta) = verts[rng.integers(len(verts))]
            (_, B, tb) = verts[rng.integers(len(verts))]
            A2, B2 = lt.apply_matrix(g, A), lt.apply_matrix(g, B)
            dA = lt.dual(sp2, A2)
            if lt.dual(sp2, dA) != A2:
                viol.append(("involution", n, p))
            if _type(sp2, A2) != ta:
                viol.append(("conjugate-type", n, p))
            M = lt.meet(A2, B2)
            if lt.dual(sp2, M) != lt.join(dA, lt.dual(sp2, B2)):
                viol.append(("meet-join", n, p))
            if not lt.contains(lt.dual(sp2, M), dA):
                viol.append(("reversing", n, p))
        stats[f"n={n} p={p}"] = {"vertices": len(verts), "max_type": tmax}
    return not viol, {"stats": stats, "violations": viol[:10]}


def c6_neighbors(seed=0, cases=((4, 3), (5, 3))):
    rows, ok = [], True
    for n, p in cases:
        sp = lt.PadicHermitianSpace(n, p)
        top = (n - 1) // 2
        for d in range(top + 1):
            L = vertex_of_type(sp, d)
            for dp in range(top + 1):
                if dp == d:
                    continue
                f = building.neighbors_below if dp < d else building.neighbors_above
                res = f(sp, L, 0, dp, full=True)
                good = res.count == res.formula and res.injective and res.provenance != "disagree"
                rows.append({"n": n, "p": p, "d": d, "dprime": dp, "count": res.count,
                             "formula": res.formula, "provenance": res.provenance})
                ok &= good
    return ok, {"rows": rows}


def c7_example_n4(seed=0):
    sp = lt.PadicHermitianSpace(4, 3)
    L1, L0 = vertex_of_type(sp, 1), vertex_of_type(sp, 0)
    below = building.neighbors_below(sp, L1, 0, 0)
    above = building.neighbors_above(sp, L0, 0, 1)
    g1, g0 = building.local_graph(sp, L1, 0), building.local_graph(sp, L0, 0)
    det = {"below": len(below), "above": len(above), "graph1": g1.type_counts(), "graph0": g0.type_counts(),
           "edges": [len(g1.edges), len(g0.edges)]}
    ok = (len(below) == len(above) == 28 and g1.type_counts() == {0: 28, 1: 1}
          and g0.type_counts() == {0: 1, 1: 28} and len(g1.edges) == len(g0.edges) == 28
          and g1.is_connected() and g0.is_connected())
    return ok, det


def c8_witness(seed=0, ns=(4, 5, 6)):
    rows, ok = [], True
    for n in ns:
        sp = lt.PadicHermitianSpace(n, 3)
        top = (n - 1) // 2
        for d, dp in product(range(top + 1), repeat=2):
            for mode in ("meet", "join"):
                targets = range(min(d, dp) + 1) if mode == "meet" else range(max(d, dp), top + 1)
                for tg in targets:
                    w = building.witness_search(sp, 0, d, dp, tg, mode)
                    A, B = w.first, w.second
                    good = _type(sp, A) == d and _type(sp, B) == dp
                    if mode == "meet":
                        good &= _type(sp, lt.meet(A, B)) == tg
                    else:
                        J = lt.join(A, B)
                        tj = _type(sp, J)
                        good &= tj == tg or (tj is None and w.value == tg)
                    rows.append((n, d, dp, mode, tg, bool(good)))
                    ok &= good
    return ok, {"cases": len(rows), "failed": [r for r in rows if not r[-1]]}


def c9_points(seed=0):
    sp = lt.PadicHermitianSpace(4, 3)
    iso = dd.IsocrystalCtx(4, 3, space=sp)
    L = vertex_of_type(sp, 1)
    det, ok = {}, True
    for m in (1, 2):
        kr = dd.KRing(iso, m)
        pts = dd.enumerate_points(sp, L, 0, m, iso=iso, kring=kr)
        gaps, types, rel_ok = [], [], True
        for P in pts:
            good, _ = dd.is_point(P)
            sd = dd.sigma_pm(P)
            Lam, cert = dd.stratum_vertex(P)
            rel_ok &= good and all(sd.relations.values()) and sd.gap == P.origin["quotient_gap"]
            gaps.append(sd.gap)
            types.append(cert.t)
        det[f"F_{3 ** (2 * m)}"] = {"count": len(pts), "gap0": gaps.count(0), "types": sorted(set(types))}
        ok &= rel_ok and gaps == types
        if m == 1:
            ok &= len(pts) == 28 and set(gaps) == {0}
        else:
            brute = hf.fermat_count_field(2, kr.F)
            det["fermat_brute_F81"] = brute
            ok &= len(pts) == brute and gaps.count(0) == 28
    return ok, det


def c10_weyl(seed=0):
    bad = []
    for d in range(5):
        ctx = weyl.SymmetricGroupCtx(2 * d + 1)
        IL = weyl.i_lambda(d)
        if weyl.dim_dl(ctx, IL, ctx.identity) != d or not weyl.is_irreducible_dl(ctx, IL, ctx.identity):
            bad.append(("I_lambda", d))
        for s in range(d + 1):
            D = weyl.eo_dl_data(d, s)
            reps = weyl.min_double_coset_reps(ctx, D.I, D.I)
            if not (D.flags["length_is_sigma"] and D.flags["F_stable"] and D.w in reps
                    and weyl.dim_dl(ctx, D.I, D.w) == s):
                bad.append(("eo", d, s))
    for m in range(1, 8):
        ctx = weyl.SymmetricGroupCtx(m)
        subsets = [frozenset(c) for k in range(m) for c in weyl.combinations(range(1, m), k)]
        for I, J in product(subsets, repeat=2):
            cosets = weyl.double_cosets_brute(ctx, I, J)
            mins = [c[1] for c in cosets]
            if any(len(x) != 1 for x in mins):
                bad.append(("unique", m))
            if sorted(x[0] for x in mins) != weyl.min_reps_fast(ctx, I, J):
                bad.append(("partition", m, sorted(I), sorted(J)))
    return not bad, {"violations": bad[:10]}


def c11_invariance(seed=0):
    sp = lt.PadicHermitianSpace(4, 3)
    verts = [vertex_of_type(sp, 1, skip=k) for k in range(3)]
    counts = [len(dd.enumerate_points(sp, L, 0, 1)) for L in verts]
    distinct = len(set(verts)) == 3
    return distinct and len(set(counts)) == 1, {"counts": counts, "distinct": distinct}


CRITERIA = {
    1: ("nu cross-check", c1_nu),
    2: ("Fermat counts", c2_fermat),
    3: ("nu(l-1, l) equals Fermat count", c3_nu_fermat),
    4: ("Dieudonne spaces and gap", c4_spaces),
    5: ("lattice layer", c5_lattice),
    6: ("neighbour counts", c6_neighbors),
    7: ("n = 4 example", c7_example_n4),
    8: ("meet/join witnesses", c8_witness),
    9: ("points and gap = type", c9_points),
    10: ("Weyl layer", c10_weyl),
    11: ("stratum count invariance", c11_invariance),
}


def run_criterion(k, seed=0, **kw):
    name, fn = CRITERIA[k]
    t = time.perf_counter()
    ok, det = fn(seed=seed, **kw)
    return CriterionResult(k, name, bool(ok), det, time.perf_counter() - t)
