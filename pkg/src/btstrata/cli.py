"""Command-line front end: `btstrata <subcommand> [options]`.

Every command prints one JSON envelope (sorted keys) unless --format csv/text is
chosen; list outputs go out as JSON lines after the envelope with --list.
Exit codes: 0 success, 1 a verification failed, 2 usage error.
"""
import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np
from sympy import isprime

from . import _kernels, building, dieudonne as dd, hermitian_ff as hf, lattice as lt, weyl
from .acceptance import CRITERIA, run_criterion, vertex_of_type
from .errors import BTStrataError

CAP = hf.DEFAULT_CAP


class UsageError(Exception):
    pass


def _ints(s):
    return [int(x) for x in s.replace(" ", "").split(",") if x != ""] if s else []


def _check_p(p):
    if p is None or p == 2 or not isprime(p):
        raise UsageError(f"--p must be an odd prime, got {p}")


def _check_n(n, lo=2):
    if n is None or n < lo:
        raise UsageError(f"--n must be >= {lo}, got {n}")


def _check_ni(n, i):
    if (n * i) % 2:
        raise UsageError(f"n*i must be even, got n={n}, i={i}")


def _space(a):
    _check_p(a.p)
    _check_n(a.n)
    _check_ni(a.n, a.i)
    return lt.PadicHermitianSpace(a.n, a.p, a.precision)


def _vertex(space, a, t):
    if a.exps:
        L = lt.diag_lattice(space, _ints(a.exps))
    else:
        L = vertex_of_type(space, t, a.i)
    return L


def _lat_json(L):
    ctx = L.ctx
    return {"scale": int(L.e), "basis": np.asarray(L.B % ctx.P).tolist()}


# ---------- handlers: each returns (result, provenance, ok, rows) ----------

def cmd_nu(a):
    _check_p(a.p)
    if not (2 * a.r >= a.l and a.r <= a.l):
        raise UsageError(f"need l/2 <= r <= l, got r={a.r}, l={a.l}")
    v = hf.nu(a.r, a.l, a.p, a.cap)
    prov = "enumeration"
    res = {"nu": v}
    if hf.gauss_binom(a.l, a.r, a.p * a.p) <= 20000:
        b = len(hf.enumerate_N_brute(hf.FiniteHermitianSpace.standard(a.p, a.l), a.r))
        res["brute"] = b
        prov = "both-agree" if b == v else "disagree"
    return res, {"nu": prov}, prov != "disagree", [{"r": a.r, "l": a.l, "p": a.p, "formula": res.get("brute", ""),
                                                    "enumerated": v, "agree": prov != "disagree"}]


def cmd_fermat(a):
    _check_p(a.p)
    vals = {"closed": hf.fermat_count(a.l, a.p, "closed"), "recursion": hf.fermat_count(a.l, a.p, "recursion")}
    F = hf.field(a.p)
    if F.q ** (a.l + 1) <= a.cap:
        vals["brute"] = hf.fermat_count(a.l, a.p, "brute", a.cap)
    agree = len(set(vals.values())) == 1
    res = dict(vals, sigma_variants=hf.sigma_variant_report(a.p, max(a.l, 3)))
    prov = "both-agree" if agree and "brute" in vals else ("formula" if agree else "disagree")
    return res, {"count": prov}, agree, [{"l": a.l, "p": a.p, "formula": vals["closed"],
                                          "enumerated": vals.get("brute", ""), "agree": agree}]


def cmd_vertex_type(a):
    sp = _space(a)
    r = _ints(a.exps)
    if len(r) != a.n:
        raise UsageError(f"--exps needs {a.n} entries, got {len(r)}")
    L = lt.diag_lattice(sp, r)
    pred = lt.diag_type_closed_form(a.n, r, a.i)
    try:
        c = lt.vertex_type(sp, L, a.i)
        res = {"vertex": True, "t": c.t, "length": c.length}
        t = c.t
    except BTStrataError as exc:
        res = {"vertex": False, "reason": str(exc), "failed": getattr(exc, "failed", None)}
        t = None
    res["closed_form"] = pred
    agree = pred == t
    return res, {"t": "both-agree" if agree else "disagree"}, agree, []


def cmd_neighbors(a):
    sp = _space(a)
    L = _vertex(sp, a, a.d)
    fn = building.neighbors_below if a.below else building.neighbors_above
    r = fn(sp, L, a.i, a.dprime, a.cap, full=True)
    res = {"direction": "below" if a.below else "above", "count": r.count, "formula": r.formula,
           "lattice_route": r.lattice_route, "injective": r.injective}
    ok = r.count == r.formula and r.injective and r.provenance != "disagree"
    listing = [_lat_json(M) for M in r.lattices] if a.list else None
    return res, {"count": r.provenance, "formula": "formula"}, ok, [
        {"n": a.n, "p": a.p, "d": a.d, "dprime": a.dprime, "formula": r.formula, "enumerated": r.count,
         "agree": r.count == r.formula}], listing


def cmd_incidence(a):
    sp = _space(a)
    A = lt.diag_lattice(sp, _ints(a.first))
    B = lt.diag_lattice(sp, _ints(a.second))
    rep = building.incidence_report(sp, A, B, a.i, exhaustive=not a.fast, cap=a.cap)
    return rep.as_dict(), {"types": "enumeration"}, True, []


def cmd_witness(a):
    sp = _space(a)
    w = building.witness_search(sp, a.i, a.d, a.dprime, a.target, a.mode)
    res = {"first": list(w.exponents[0]), "second": list(w.exponents[1]), "value": w.value,
           "report": w.report.as_dict()}
    return res, {"value": "enumeration"}, True, []


def cmd_local_graph(a):
    sp = _space(a)
    L = _vertex(sp, a, a.d)
    g = building.local_graph(sp, L, a.i, a.radius, a.cap)
    res = {"graph": json.loads(g.to_json()), "type_counts": {str(k): v for k, v in g.type_counts().items()},
           "connected": g.is_connected()}
    return res, {"graph": "enumeration"}, g.is_connected(), []


def _finite_space(a):
    _check_p(a.p)
    F = hf.field(a.p, a.m)
    if a.file:
        with open(a.file) as fh:
            desc = json.load(fh)
        F = hf.field(int(desc["p"]), int(desc.get("m", 1)))
        return dd.UnitaryDieudonneSpace(F, int(desc["n"]), desc["F_matrix"], desc["V_matrix"], desc["pairing"],
                                        r=int(desc.get("r", 1)), label=desc.get("label", a.file))
    kind = a.space
    try:
        if kind == "M":
            sp = dd.standard_space("M", F, sigma=a.sigma, n=a.n)
        elif kind == "B":
            sp = dd.standard_space("B", F, d=a.d)
        else:
            sp = dd.standard_space("S", F, literal_text=a.literal_text)
    except TypeError as exc:
        raise UsageError(str(exc))
    if a.seed is not None:
        sp = dd.scramble(sp, a.seed)
    return sp


def cmd_gap(a):
    sp = _finite_space(a)
    c = dd.gap_space(sp)
    res = {"sigma": c.sigma, "dim_sequence": list(c.dim_sequence), "space": sp.label}
    ok = True
    if a.space == "M" and not a.file:
        ok = c.sigma == a.sigma
    return res, {"sigma": "enumeration"}, ok, []


def cmd_classify_space(a):
    sp = _finite_space(a)
    rep = dd.check_space_axioms(sp)
    res = {"axioms": rep, "signature": list(sp.signature()), "space": sp.label}
    if all(v["ok"] for v in rep.values()) and sp.signature() == (1, sp.n - 1):
        c = dd.gap_space(sp)
        res.update(sigma=c.sigma, dim_sequence=list(c.dim_sequence), **{"class": f"M({c.sigma},{sp.n})"})
    return res, {"class": "enumeration"}, True, []


def _points(a):
    sp = _space(a)
    L = _vertex(sp, a, a.d)
    iso = dd.IsocrystalCtx(a.n, a.p, space=sp)
    kr = dd.KRing(iso, a.m)
    pts = dd.enumerate_points(sp, L, a.i, a.m, cap=a.cap, iso=iso, kring=kr)
    return sp, L, kr, pts


def cmd_enumerate_points(a):
    sp, L, kr, pts = _points(a)
    t = lt.vertex_type(sp, L, a.i).t
    res = json.loads(dd.point_dump(pts, t, a.p, a.m))
    prov = {"count": "enumeration", "gap": "enumeration"}
    ok = True
    if a.verify:
        agree = True
        for P in pts:
            good, _ = dd.is_point(P, a.i)
            g = dd.gap_lattice(P).sigma
            agree &= good and g == P.origin["quotient_gap"]
        prov["gap"] = "both-agree" if agree else "disagree"
        ok = agree
    listing = None
    if a.list:
        listing = [{"index": k, "gap": P.origin["quotient_gap"],
                    "U": np.asarray(P.origin["U"].basis).tolist()} for k, P in enumerate(pts)]
    return res, prov, ok, [], listing


def cmd_stratum_vertex(a):
    sp, L, kr, pts = _points(a)
    if not 0 <= a.index < len(pts):
        raise UsageError(f"--index must be in [0, {len(pts)}), got {a.index}")
    P = pts[a.index]
    Lam, cert = dd.stratum_vertex(P, a.i)
    g = dd.gap_lattice(P)
    res = {"vertex": _lat_json(Lam), "t": cert.t, "length": cert.length, "gap": g.sigma,
           "point_ok": dd.is_point(P, a.i)[0]}
    return res, {"t": "both-agree" if cert.t == g.sigma else "disagree"}, cert.t == g.sigma, []


def _dl_args(a):
    if a.sigma is not None:
        D = weyl.eo_dl_data(a.d, a.sigma, a.printed)
        return weyl.SymmetricGroupCtx(2 * a.d + 1), D.I, D.w
    if a.m_weyl is None:
        raise UsageError("give --d and --sigma, or --m with --I and --w")
    ctx = weyl.SymmetricGroupCtx(a.m_weyl)
    w = tuple(_ints(a.w)) if a.w else ctx.identity
    if sorted(w) != list(ctx.identity):
        raise UsageError(f"--w is not a permutation of 1..{a.m_weyl}: {a.w}")
    I = frozenset(_ints(a.I))
    if not I <= ctx.S:
        raise UsageError(f"--I must be a subset of 1..{a.m_weyl - 1}: {a.I}")
    return ctx, I, w


def cmd_dl_dim(a):
    ctx, I, w = _dl_args(a)
    return {"dim": weyl.dim_dl(ctx, I, w), "I": sorted(I), "w": list(w)}, {"dim": "formula"}, True, []


def cmd_dl_irreducible(a):
    ctx, I, w = _dl_args(a)
    v = weyl.is_irreducible_dl(ctx, I, w)
    res = {"irreducible": v, "I": sorted(I), "w": list(w)}
    prov = "enumeration"
    if w == ctx.identity:
        alt = weyl.f_orbit_union(ctx, I) == ctx.S
        res["orbit_union_test"] = alt
        prov = "both-agree" if alt == v else "disagree"
    return res, {"irreducible": prov}, prov != "disagree", []


def cmd_eo_data(a):
    if a.sigma is None or a.d is None:
        raise UsageError("--d and --sigma are required")
    D = weyl.eo_dl_data(a.d, a.sigma, a.printed)
    res = {"d": D.d, "sigma": D.sigma, "I_lambda": sorted(D.I_lambda), "I_sigma": sorted(D.I), "w_sigma": list(D.w),
           "flags": D.flags}
    return res, {"flags": "formula"}, True, []


def cmd_verify(a):
    which = _ints(a.only) or sorted(CRITERIA)
    out, ok = [], True
    for k in which:
        if k not in CRITERIA:
            raise UsageError(f"--only: no criterion {k}")
        r = run_criterion(k, seed=a.seed)
        print(r.line(), file=sys.stderr)
        out.append({"criterion": k, "name": r.name, "pass": r.ok, "details": r.details,
                    **({"seconds": round(r.seconds, 3)} if a.timing else {})})
        ok &= r.ok
    return {"criteria": out, "all_pass": ok}, {"criteria": "both-agree"}, ok, [
        {"criterion": c["criterion"], "formula": "", "enumerated": "", "agree": c["pass"]} for c in out]


HANDLERS = {
    "nu": cmd_nu, "fermat": cmd_fermat, "vertex-type": cmd_vertex_type, "neighbors": cmd_neighbors,
    "incidence": cmd_incidence, "witness": cmd_witness, "local-graph": cmd_local_graph, "gap": cmd_gap,
    "classify-space": cmd_classify_space, "enumerate-points": cmd_enumerate_points,
    "stratum-vertex": cmd_stratum_vertex, "dl-dim": cmd_dl_dim, "dl-irreducible": cmd_dl_irreducible,
    "eo-data": cmd_eo_data, "verify": cmd_verify,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="btstrata", description="Vertex lattices, strata and Dieudonne data.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, lattice=False):
        sp.add_argument("--format", choices=("json", "csv", "text"), default="json")
        sp.add_argument("--cap", type=int, default=CAP)
        sp.add_argument("--timing", action="store_true", help="include wall time (breaks byte-stability)")
        sp.add_argument("--p", type=int, default=3)
        if lattice:
            sp.add_argument("--n", type=int, default=4)
            sp.add_argument("--i", type=int, default=0)
            sp.add_argument("--precision", type=int, default=None)
            sp.add_argument("--exps", default=None, help="comma separated diagonal exponents")
        return sp

    s = common(sub.add_parser("nu"))
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--l", type=int, required=True)
    s = common(sub.add_parser("fermat"))
    s.add_argument("--l", type=int, required=True)
    common(sub.add_parser("vertex-type"), True)
    s = common(sub.add_parser("neighbors"), True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--below", action="store_true")
    g.add_argument("--above", action="store_true")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--dprime", type=int, required=True)
    s.add_argument("--list", action="store_true")
    s = common(sub.add_parser("incidence"), True)
    s.add_argument("--first", required=True)
    s.add_argument("--second", required=True)
    s.add_argument("--fast", action="store_true", help="skip the exhaustive sub-vertex check")
    s = common(sub.add_parser("witness"), True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--dprime", type=int, required=True)
    s.add_argument("--target", type=int, required=True)
    s.add_argument("--mode", choices=("meet", "join"), default="meet")
    s = common(sub.add_parser("local-graph"), True)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--radius", type=int, default=1)
    for name in ("gap", "classify-space"):
        s = common(sub.add_parser(name))
        s.add_argument("--space", choices=("S", "B", "M"), default="M")
        s.add_argument("--sigma", type=int)
        s.add_argument("--n", type=int)
        s.add_argument("--d", type=int)
        s.add_argument("--m", type=int, default=1)
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--literal-text", action="store_true")
        s.add_argument("--file", default=None, help="JSON space description")
    for name in ("enumerate-points", "stratum-vertex"):
        s = common(sub.add_parser(name), True)
        s.add_argument("--d", type=int, default=1)
        s.add_argument("--m", type=int, default=1)
        if name == "enumerate-points":
            s.add_argument("--list", action="store_true")
            s.add_argument("--verify", action="store_true")
        else:
            s.add_argument("--index", type=int, default=0)
    for name in ("dl-dim", "dl-irreducible", "eo-data"):
        s = common(sub.add_parser(name))
        s.add_argument("--d", type=int)
        s.add_argument("--sigma", type=int)
        s.add_argument("--printed", action="store_true", help="use the literal printed I_sigma ranges")
        if name != "eo-data":
            s.add_argument("--m", dest="m_weyl", type=int)
            s.add_argument("--I", default="")
            s.add_argument("--w", default="")
    s = common(sub.add_parser("verify"))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--only", default="")
    return ap


def _threads():
    t = os.environ.get("BTSTRATA_THREADS")
    if t:
        n = int(t)
        if _kernels.backend() == "numba":
            import numba
            numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))
        return n
    return None


def _emit(env, rows, listing, fmt, stream):
    if fmt == "json":
        stream.write(json.dumps(env, sort_keys=True, default=_default) + "\n")
        for item in listing or ():
            stream.write(json.dumps(item, sort_keys=True, default=_default) + "\n")
    elif fmt == "csv":
        if not rows:
            rows = [{"formula": "", "enumerated": "", "agree": env["ok"]}]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        stream.write(buf.getvalue())
    else:
        for k, v in sorted(env["result"].items()):
            stream.write(f"{k}: {json.dumps(v, sort_keys=True, default=_default)}\n")
        stream.write(f"provenance: {json.dumps(env['provenance'], sort_keys=True)}\n")


def _default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, (set, frozenset, tuple)):
        return sorted(o) if isinstance(o, (set, frozenset)) else list(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def run(argv=None, stream=None):
    stream = stream or sys.stdout
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    request = {k: v for k, v in sorted(vars(a).items()) if v is not None and k not in ("format",)}
    t0 = time.perf_counter()
    lt.reset_slack()
    try:
        threads = _threads()
        out = HANDLERS[a.command](a)
    except (UsageError, ValueError, BTStrataError, LookupError) as exc:
        code = 2
        stream.write(json.dumps({"request": request, "error": type(exc).__name__, "message": str(exc)},
                                sort_keys=True, default=_default) + "\n")
        return code
    res, prov, ok = out[:3]
    rows = out[3] if len(out) > 3 else []
    listing = out[4] if len(out) > 4 else None
    env = {"request": request, "result": res, "provenance": prov, "ok": bool(ok),
           "precision": {"min_slack": lt.min_slack(), "backend": _kernels.backend()}}
    if threads:
        env["threads"] = threads
    if a.timing:
        env["timing_s"] = round(time.perf_counter() - t0, 4)
    _emit(env, rows, listing, a.format, stream)
    return 0 if ok else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
