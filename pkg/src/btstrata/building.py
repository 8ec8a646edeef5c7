"""Local combinatorics of the vertex lattices: neighbours, incidences, witnesses, graphs."""
import json
from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from .errors import FeasibilityExceeded, InvalidTypeRange, NotAVertex, SearchExhausted
from .hermitian_ff import DEFAULT_CAP, Subspace, all_subspaces, enumerate_isotropic, enumerate_N, nu
from .lattice import (contains, diag_lattice, dual_side_quotient, join, meet, v_lambda_quotient,
                      vertex_type)

LATTICE_ROUTE_CAP = 20000


def _type_or_none(space, L, i):
    try:
        return vertex_type(space, L, i).t
    except NotAVertex:
        return None


@dataclass
class NeighborResult:
    lattices: list
    count: int
    formula: int
    provenance: str  # "both-agree" when the lattice-side filter ran and matched
    lattice_route: Optional[int] = None
    injective: bool = True


def _sorted(lats):
    return sorted(lats, key=lambda L: L.key())


def neighbors_below(space, L, i, dprime, cap=DEFAULT_CAP, lattice_cap=LATTICE_ROUTE_CAP, full=False):
    """Vertices strictly inside L of type dprime."""
    d = vertex_type(space, L, i).t
    if not 0 <= dprime < d:
        raise InvalidTypeRange(f"need 0 <= d' < d = {d}, got d' = {dprime}")
    Q = v_lambda_quotient(space, L, i)
    r = d + dprime + 1
    Us = enumerate_N(Q.W, r, cap)
    lats = [Q.lift(U) for U in Us]
    for M in lats:
        if vertex_type(space, M, i).t != dprime:
            raise AssertionError("lifted subspace is not a vertex of the expected type")
    # the projection must recover each subspace
    injective = all(Q.project(M) == U for M, U in zip(lats, Us)) and len(set(lats)) == len(lats)
    res = NeighborResult(_sorted(lats), len(lats), nu(r, 2 * d + 1, space.p, cap), "enumeration",
                         injective=injective)
    _lattice_route(res, space, Q, i, dprime, r, lattice_cap, full)
    return res if full else res.lattices


def neighbors_above(space, L, i, dprime, cap=DEFAULT_CAP, lattice_cap=LATTICE_ROUTE_CAP, full=False):
    """Vertices strictly containing L of type dprime."""
    d = vertex_type(space, L, i).t
    if not d < dprime <= (space.n - 1) // 2:
        raise InvalidTypeRange(f"need {d} < d' <= {(space.n - 1) // 2}, got d' = {dprime}")
    Q = dual_side_quotient(space, L, i)
    s = dprime - d
    Ts = enumerate_isotropic(Q.W, s, cap)
    Us = [Subspace(Q.space.F, T) for T in Ts]
    lats = [Q.lift(U) for U in Us]
    for M in lats:
        if vertex_type(space, M, i).t != dprime:
            raise AssertionError("lifted subspace is not a vertex of the expected type")
    injective = all(Q.project(M) == U for M, U in zip(lats, Us)) and len(set(lats)) == len(lats)
    l = space.n - (2 * d + 1)
    res = NeighborResult(_sorted(lats), len(lats), nu(l - s, l, space.p, cap), "enumeration",
                         injective=injective)
    _lattice_route(res, space, Q, i, dprime, s, lattice_cap, full)
    return res if full else res.lattices


def _lattice_route(res, space, Q, i, dprime, dim, lattice_cap, full):
    """Independent count: lift every subspace of the given dimension and test it as a lattice."""
    if not full:
        return
    from .hermitian_ff import gauss_binom
    if gauss_binom(Q.dim, dim, Q.space.F.q) > lattice_cap:
        return
    found = set()
    for U in all_subspaces(Q.space.F, Q.dim, dim, lattice_cap):
        M = Q.lift(U)
        if _type_or_none(space, M, i) == dprime:
            found.add(M)
    res.lattice_route = len(found)
    if found == set(res.lattices):
        res.provenance = "both-agree"
    else:
        res.provenance = "disagree"


# ---------- incidences ----------

@dataclass
class IncidenceReport:
    t: int
    t_other: int
    meet_is_vertex: bool
    join_is_vertex: bool
    meet_type: Optional[int]
    join_type: Optional[int]
    first_in_second: bool
    second_in_first: bool
    meet_contains_vertex: Optional[bool] = None

    def as_dict(self):
        return dict(self.__dict__)


def sub_vertices(space, L, i, cap=DEFAULT_CAP):
    """L together with every vertex strictly inside it."""
    d = vertex_type(space, L, i).t
    out = [L]
    for dp in range(d):
        out += neighbors_below(space, L, i, dp, cap)
    return out


def incidence_report(space, L, M, i, exhaustive=True, cap=DEFAULT_CAP):
    t1, t2 = vertex_type(space, L, i).t, vertex_type(space, M, i).t
    A, B = meet(L, M), join(L, M)
    ta, tb = _type_or_none(space, A, i), _type_or_none(space, B, i)
    rep = IncidenceReport(t1, t2, ta is not None, tb is not None, ta, tb,
                          contains(M, L), contains(L, M))
    if exhaustive:
        rep.meet_contains_vertex = any(contains(A, V) for V in sub_vertices(space, L, i, cap))
        if rep.meet_contains_vertex != rep.meet_is_vertex:
            raise AssertionError("a vertex lies inside a meet that is not itself a vertex")
    return rep


# ---------- witnesses for prescribed meet / join types ----------

def diagonal_vertices(space, i, box):
    out = []
    for r in product(range(-box, box + 1), repeat=space.n):
        L = diag_lattice(space, r)
        t = _type_or_none(space, L, i)
        if t is not None:
            out.append((r, L, t))
    return out


@dataclass
class Witness:
    first: object
    second: object
    exponents: tuple
    report: IncidenceReport
    value: int
    covering: Optional[object] = None


def _covering_type(space, B, verts, i):
    """Smallest type among the listed vertices containing B."""
    ts = [t for _, V, t in verts if contains(V, B)]
    return min(ts) if ts else None


def witness_search(space, i, d, dprime, target, mode="meet", box=2, max_box=8):
    top = (space.n - 1) // 2
    if mode == "meet":
        ok = 0 <= target <= min(d, dprime)
    elif mode == "join":
        ok = max(d, dprime) <= target <= top
    else:
        raise ValueError(f"unknown mode {mode}")
    if not ok or not (0 <= d <= top and 0 <= dprime <= top):
        raise InvalidTypeRange(f"inadmissible (d, d', target) = ({d}, {dprime}, {target}) for {mode}")
    while box <= max_box:
        verts = diagonal_vertices(space, i, box)
        firsts = [v for v in verts if v[2] == d]
        seconds = [v for v in verts if v[2] == dprime]
        for r1, L1, _ in firsts:
            for r2, L2, _ in seconds:
                if mode == "meet":
                    val = _type_or_none(space, meet(L1, L2), i)
                    cov = None
                else:
                    B = join(L1, L2)
                    val = _type_or_none(space, B, i)
                    cov = B if val is not None else None
                    if val is None:
                        val = _covering_type(space, B, verts, i)
                if val == target:
                    rep = incidence_report(space, L1, L2, i, exhaustive=False)
                    return Witness(L1, L2, (r1, r2), rep, val, cov)
        box *= 2
    raise SearchExhausted(f"no diagonal witness up to box {max_box}")


# ---------- local graphs ----------

@dataclass
class LocalGraph:
    vertices: list = field(default_factory=list)  # (lattice, type)
    edges: list = field(default_factory=list)  # (smaller index, larger index)
    radius: int = 0

    def type_counts(self):
        out = {}
        for _, t in self.vertices:
            out[t] = out.get(t, 0) + 1
        return dict(sorted(out.items()))

    def is_connected(self):
        if not self.vertices:
            return True
        adj = {k: set() for k in range(len(self.vertices))}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        seen, todo = {0}, [0]
        while todo:
            for b in adj[todo.pop()]:
                if b not in seen:
                    seen.add(b)
                    todo.append(b)
        return len(seen) == len(self.vertices)

    def to_json(self):
        nodes = [{"id": k, "type": t} for k, (_, t) in enumerate(self.vertices)]
        edges = [{"from": a, "to": b} for a, b in self.edges]
        return json.dumps({"nodes": nodes, "edges": edges, "radius": self.radius}, sort_keys=True)


def all_neighbors(space, L, i, cap=DEFAULT_CAP):
    d = vertex_type(space, L, i).t
    out = []
    for dp in range(d):
        out += [(M, dp) for M in neighbors_below(space, L, i, dp, cap)]
    for dp in range(d + 1, (space.n - 1) // 2 + 1):
        out += [(M, dp) for M in neighbors_above(space, L, i, dp, cap)]
    return out


def local_graph(space, L, i, radius=1, cap=DEFAULT_CAP, max_vertices=200000):
    g = LocalGraph(radius=radius)
    index = {L: 0}
    g.vertices.append((L, vertex_type(space, L, i).t))
    frontier = deque([(L, 0)])
    edges = set()
    while frontier:
        V, depth = frontier.popleft()
        if depth == radius:
            continue
        a = index[V]
        for M, t in all_neighbors(space, V, i, cap):
            if M not in index:
                if len(index) >= max_vertices:
                    raise FeasibilityExceeded(f"local graph exceeds {max_vertices} vertices")
                index[M] = len(g.vertices)
                g.vertices.append((M, t))
                frontier.append((M, depth + 1))
            b = index[M]
            edges.add((a, b) if contains(M, V) else (b, a))
    g.edges = sorted(edges)
    return g
