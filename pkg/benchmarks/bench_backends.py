"""Compare the numba and numpy backends on the hot paths.

    python benchmarks/bench_backends.py [--repeat 3]

Each workload runs once per backend to warm up (JIT compile), then is timed;
results must agree across backends.
"""
import argparse
import time

from btstrata import hermitian_ff as hf, lattice as lt, set_backend
from btstrata.acceptance import vertex_of_type
from btstrata.building import neighbors_below


def fermat():
    return hf.fermat_count_field(5, hf.field(3))


def isotropic():
    # nu is memoised, so call the enumerator directly
    return len(hf.enumerate_isotropic(hf.FiniteHermitianSpace.standard(3, 5), 2))


def vertex_scan():
    sp = lt.PadicHermitianSpace(5, 3)
    return sum(lt.is_vertex(sp, lt.diag_lattice(sp, (a, b, 0, c, d)), 0)
               for a in range(-1, 2) for b in range(-1, 2) for c in range(-1, 2) for d in range(-1, 2))


def neighbors():
    sp = lt.PadicHermitianSpace(5, 3)
    return len(neighbors_below(sp, vertex_of_type(sp, 2), 0, 1))


WORKLOADS = {"fermat X_5 over F_9": fermat, "nu(3,5) p=3": isotropic,
             "vertex scan n=5": vertex_scan, "neighbours below n=5 d=2 d'=1": neighbors}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    print(f"{'workload':34s} {'numba s':>9s} {'numpy s':>9s} {'speedup':>8s}")
    for name, fn in WORKLOADS.items():
        times, vals = {}, {}
        for b in ("numba", "numpy"):
            set_backend(b)
            vals[b] = fn()
            t = time.perf_counter()
            for _ in range(a.repeat):
                fn()
            times[b] = (time.perf_counter() - t) / a.repeat
        assert vals["numba"] == vals["numpy"], (name, vals)
        print(f"{name:34s} {times['numba']:9.3f} {times['numpy']:9.3f} {times['numpy'] / times['numba']:7.1f}x")
    set_backend("numba")


if __name__ == "__main__":
    main()
