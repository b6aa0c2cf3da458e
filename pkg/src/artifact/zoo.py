"""Named predicates and generators for extremal instances."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

from .relations import Domain, Instance, Relation, RelationPair

BOOL = Domain(["0", "1"])
ARITY_CAP = 64


class GirthViolation(ValueError):
    def __init__(self, cycle: list):
        super().__init__(f"graph has a cycle of length {len(cycle)}: {cycle}")
        self.cycle = cycle


# ---- basic predicates ----

def build_or(p: int) -> Relation:
    return Relation(BOOL, p, (t for t in itertools.product((0, 1), repeat=p) if any(t)), f"OR{p}")


def build_eq(d: int = 2) -> Relation:
    return Relation(Domain.range(d), 2, ((a, a) for a in range(d)), "EQ")


def build_cut() -> Relation:
    return Relation(BOOL, 2, [(0, 1), (1, 0)], "CUT")


def build_one_in_three() -> Relation:
    return Relation(BOOL, 3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)], "1-in-3")


def build_3lin(m: int = 3) -> tuple[Relation, Relation]:
    """x+y+z = 0 mod m, and the same without (0,0,0)."""
    dom = Domain.range(m)
    rows = [t for t in itertools.product(range(m), repeat=3) if sum(t) % m == 0]
    full = Relation(dom, 3, rows, "3LIN")
    return full, full.with_tuples(set(rows) - {(0, 0, 0)}, "3LIN*")


# ---- OR-DP ----

def idx_pq(p: int, q: int) -> list[tuple[int, ...]]:
    """Lexicographic enumeration of [p]^q (0-based), repeated entries included."""
    return list(itertools.product(range(p), repeat=q))


def ordp_domain(q: int) -> Domain:
    return Domain(["0", "1"] + ["(" + "".join(b) + ")" for b in itertools.product("01", repeat=q)])


def pad_value(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = 2 * v + b
    return 2 + v


def build_or_dp(p: int, q: int, arity_cap: int = ARITY_CAP) -> RelationPair:
    """(OR-DP_{p,q}, DP_{p,q}): Boolean part followed by p^q padding positions."""
    if not (p >= q >= 1):
        raise ValueError("need p >= q >= 1")
    if p + p ** q > arity_cap:
        raise ValueError(f"arity {p + p ** q} exceeds cap {arity_cap}")
    dom = ordp_domain(q)
    idx = idx_pq(p, q)
    rows = []
    for x in itertools.product((0, 1), repeat=p):
        rows.append(x + tuple(pad_value([x[t] for t in ts]) for ts in idx))
    dp = Relation(dom, p + p ** q, rows, f"DP{p},{q}")
    ordp = dp.with_tuples([r for r in rows if any(r[:p])], f"OR-DP{p},{q}")
    return RelationPair(ordp, dp)


@dataclass(frozen=True)
class SetFamily:
    """q-sets over [p] (1-based). Each set keeps its given element order, which
    fixes the order in which a projection reads the coordinates."""

    p: int
    q: int
    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(tuple(s) for s in self.sets))
        seen = set()
        for s in self.sets:
            if len(s) != self.q or len(set(s)) != self.q:
                raise ValueError(f"set {s} does not have {self.q} distinct elements")
            if any(not 1 <= i <= self.p for i in s):
                raise ValueError(f"set {s} leaves [1..{self.p}]")
            key = frozenset(s)
            if key in seen:
                raise ValueError(f"set {s} repeated")
            seen.add(key)

    def covers(self) -> bool:
        return set().union(*map(set, self.sets)) == set(range(1, self.p + 1)) if self.sets else self.p == 0

    @classmethod
    def complete(cls, p: int, q: int) -> "SetFamily":
        return cls(p, q, tuple(itertools.combinations(range(1, p + 1), q)))


SHOELACE = SetFamily(3, 2, ((1, 2), (2, 3), (3, 1)))


def build_or_dp_family(F: SetFamily) -> RelationPair:
    """(OR-DP_F, DP_F) over {0,1}^q: x maps to its projections onto the sets of F."""
    if not F.covers():
        missing = sorted(set(range(1, F.p + 1)) - set().union(*map(set, F.sets)))
        raise ValueError(f"coordinates {missing} are not covered by the family")
    dom = Domain("".join(b) for b in itertools.product("01", repeat=F.q))

    def proj(x):
        return tuple(int("".join(str(x[i - 1]) for i in s), 2) for s in F.sets)

    allx = list(itertools.product((0, 1), repeat=F.p))
    dp = Relation(dom, len(F.sets), (proj(x) for x in allx), "DP_F")
    ordp = Relation(dom, len(F.sets), (proj(x) for x in allx if any(x)), "OR-DP_F")
    return RelationPair(ordp, dp)


def _solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """Unique solution of a (possibly overdetermined) system, or None."""
    rows = [list(r) + [v] for r, v in zip(a, b)]
    ncol = len(a[0]) if a else 0
    piv_row = 0
    pivots = []
    for col in range(ncol):
        pr = next((i for i in range(piv_row, len(rows)) if rows[i][col] != 0), None)
        if pr is None:
            return None
        rows[piv_row], rows[pr] = rows[pr], rows[piv_row]
        pv = rows[piv_row][col]
        rows[piv_row] = [x / pv for x in rows[piv_row]]
        for i in range(len(rows)):
            if i != piv_row and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[piv_row])]
        pivots.append(col)
        piv_row += 1
    for i in range(piv_row, len(rows)):
        if rows[i][-1] != 0:
            return None
    return [rows[i][-1] for i in range(ncol)]


def is_regular(F: SetFamily) -> tuple[bool, dict | None]:
    """Is there a distribution on F under which every coordinate has marginal q/p?

    Exact: tries the uniform distribution, then every basic feasible solution.
    """
    target = Fraction(F.q, F.p)
    m = len(F.sets)
    if m == 0:
        return False, None

    def marginals_ok(w):
        return all(sum(wi for wi, s in zip(w, F.sets) if i in s) == target for i in range(1, F.p + 1))

    uni = [Fraction(1, m)] * m
    if marginals_ok(uni):
        return True, {s: wi for s, wi in zip(F.sets, uni)}
    for size in range(1, min(m, F.p + 1) + 1):
        for cols in itertools.combinations(range(m), size):
            a = [[Fraction(1 if i in F.sets[c] else 0) for c in cols] for i in range(1, F.p + 1)]
            a.append([Fraction(1)] * size)
            b = [target] * F.p + [Fraction(1)]
            sol = _solve_exact(a, b)
            if sol is None or any(x < 0 for x in sol):
                continue
            w = [Fraction(0)] * m
            for c, x in zip(cols, sol):
                w[c] = x
            if marginals_ok(w) and sum(w) == 1:
                return True, {s: wi for s, wi in zip(F.sets, w)}
    return False, None


# ---- cycles and friends ----

def build_cycles(k: int) -> tuple[Relation, Relation, Relation, Relation]:
    """(C_2k, C*_2k, C~_2k, C~*_2k) over {0..k-1}."""
    if k < 2:
        raise ValueError("need k >= 2")
    dom = Domain.range(k)
    c = {(0, 0), (k - 1, k - 1)}
    for i in range(k - 1):
        c |= {(i, i + 1), (i + 1, i)}
    ct = {(i, i) for i in range(k)} | {(i, i + 1) for i in range(k - 1)} | {(k - 1, 0)}
    C = Relation(dom, 2, c, f"C{2 * k}")
    Ct = Relation(dom, 2, ct, f"C~{2 * k}")
    return (C, C.with_tuples(c - {(0, 0)}, f"C*{2 * k}"), Ct, Ct.with_tuples(ct - {(0, 0)}, f"C~*{2 * k}"))


def build_r_s(k: int) -> tuple[Relation, Relation]:
    """(R_2k, S_2k) with S_2k = C_2k x {0,1} and R_2k = S_2k minus (0,0,0)."""
    C = build_cycles(k)[0]
    dom = Domain.range(max(k, 2))
    s = {(a, b, z) for (a, b) in C.tuples for z in (0, 1)}
    S = Relation(dom, 3, s, f"S{2 * k}")
    return S.with_tuples(s - {(0, 0, 0)}, f"R{2 * k}"), S


def build_cyc(m: int) -> tuple[Relation, Relation]:
    """(CYC_m, CYC*_m): x+y+z = 0 and y-x in {0,1} over Z/m."""
    if m < 3 or m % 2 == 0:
        raise ValueError("need odd m >= 3")
    rows = {(x, (x + d) % m, (-2 * x - d) % m) for x in range(m) for d in (0, 1)}
    full = Relation(Domain.range(m), 3, rows, f"CYC{m}")
    return full, full.with_tuples(rows - {(0, 0, 0)}, f"CYC*{m}")


def build_bck() -> Relation:
    return Relation.from_names(Domain.range(3), ["111", "222", "012", "120", "201"], name="BCK")


PAULI_MATRIX = (
    "xxyyz",
    "xxzyy",
    "zxxyy",
    "xyyxz",
    "zxyyx",
    "xyzxy",
)


def build_pauli() -> Relation:
    """Columns of the 6x5 matrix over {x,y,z}."""
    dom = Domain(["x", "y", "z"])
    cols = [tuple(row[j] for row in PAULI_MATRIX) for j in range(5)]
    return Relation.from_names(dom, cols, name="PAULI")


# ---- generators ----

def _check_cap(nvars: int, cap: int) -> None:
    if nvars > cap:
        raise ValueError(f"instance would have {nvars} variables, cap is {cap}")


def gen_or_dp_lower(p: int, q: int, n: int, cap: int = 5000) -> Instance:
    """n Boolean variables plus one padding variable per q-tuple; one clause per p-subset."""
    if n < 1:
        raise ValueError("need n >= 1")
    _check_cap(n + n ** q, cap)
    xs = [f"x{i + 1}" for i in range(n)]
    tuples = list(itertools.product(range(n), repeat=q))
    pad_index = {t: n + j for j, t in enumerate(tuples)}
    names = xs + ["(" + ",".join(xs[i] for i in t) + ")" for t in tuples]
    idx = idx_pq(p, q)
    clauses = []
    for sub in itertools.combinations(range(n), p):
        clauses.append(tuple(sub) + tuple(pad_index[tuple(sub[t] for t in ts)] for ts in idx))
    return Instance(tuple(names), tuple(clauses))


def or_dp_lower_witness(inst: Instance, p: int, q: int, n: int, k: int) -> tuple[int, ...]:
    """Clause variables to 0, other Boolean variables to 1, pads follow their components."""
    clause = inst.clauses[k]
    x = [0 if i in clause[:p] else 1 for i in range(n)]
    tuples = list(itertools.product(range(n), repeat=q))
    return tuple(x) + tuple(pad_value([x[i] for i in t]) for t in tuples)


def gen_shoelace_lower(t: int, cap: int = 5000) -> Instance:
    """Variables (c,a,b) for c in 1..3; clause e_abc = ((1,a,b),(2,b,c),(3,c,a))."""
    if t < 1:
        raise ValueError("need t >= 1")
    _check_cap(3 * t * t, cap)
    names = [f"({c},{a},{b})" for c in (1, 2, 3) for a in range(1, t + 1) for b in range(1, t + 1)]
    ix = {n: i for i, n in enumerate(names)}
    clauses = []
    for a, b, c in itertools.product(range(1, t + 1), repeat=3):
        clauses.append((ix[f"(1,{a},{b})"], ix[f"(2,{b},{c})"], ix[f"(3,{c},{a})"]))
    return Instance(tuple(names), tuple(clauses))


def gen_or_family_lower(F: SetFamily, t: int, cap: int = 5000) -> Instance:
    """X = F x [t]^q; e_z = ((S, z restricted to S) for S in F), one clause per z in [t]^p."""
    if t < 1:
        raise ValueError("need t >= 1")
    _check_cap(len(F.sets) * t ** F.q, cap)
    names = []
    ix = {}
    for si, _ in enumerate(F.sets):
        for w in itertools.product(range(1, t + 1), repeat=F.q):
            key = (si, w)
            ix[key] = len(names)
            names.append(f"({si + 1}," + ",".join(map(str, w)) + ")")
    clauses = []
    for z in itertools.product(range(1, t + 1), repeat=F.p):
        clauses.append(tuple(ix[(si, tuple(z[i - 1] for i in s))] for si, s in enumerate(F.sets)))
    return Instance(tuple(names), tuple(clauses))


def or_family_witness(F: SetFamily, t: int, z: Sequence[int]) -> tuple[int, ...]:
    """sigma_z((S,w))_i = [w_i != z_{S_i}], encoded as a {0,1}^q index."""
    out = []
    for s in F.sets:
        for w in itertools.product(range(1, t + 1), repeat=F.q):
            bits = "".join("1" if w[j] != z[s[j] - 1] else "0" for j in range(F.q))
            out.append(int(bits, 2))
    return tuple(out)


# ---- bipartite graphs ----

@dataclass(frozen=True)
class Graph:
    vertices: tuple[str, ...]
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_edges(cls, edges, vertices=None) -> "Graph":
        vs = list(vertices) if vertices is not None else []
        ix = {v: i for i, v in enumerate(vs)}
        es = []
        for u, v in edges:
            for w in (u, v):
                if w not in ix:
                    ix[w] = len(vs)
                    vs.append(w)
            es.append((ix[u], ix[v]))
        return cls(tuple(str(v) for v in vs), tuple(es))

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in self.vertices]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj


def bipartition(g: Graph) -> list[int]:
    """0/1 side per vertex (BFS from the lowest unvisited index); raises on odd cycles."""
    side = [-1] * len(g.vertices)
    adj = g.adjacency()
    for s in range(len(g.vertices)):
        if side[s] != -1:
            continue
        side[s] = 0
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for w in adj[u]:
                if side[w] == -1:
                    side[w] = 1 - side[u]
                    dq.append(w)
                elif side[w] == side[u]:
                    raise ValueError("graph is not bipartite")
    return side


def gen_girth_instance(g: Graph) -> Instance:
    """Clauses are the edges, oriented from side 0 to side 1."""
    side = bipartition(g)
    clauses = []
    seen = set()
    for u, v in g.edges:
        c = (u, v) if side[u] == 0 else (v, u)
        if c in seen:
            continue
        seen.add(c)
        clauses.append(c)
    left = tuple(i for i in range(len(g.vertices)) if side[i] == 0)
    right = tuple(i for i in range(len(g.vertices)) if side[i] == 1)
    return Instance(g.vertices, tuple(clauses), (left, right))


def cycle_pair(k: int) -> RelationPair:
    C, Cs, _, _ = build_cycles(k)
    return RelationPair(Cs, C)


def _cycle(n: int) -> list[tuple[int, int]]:
    return [(i, (i + 1) % n) for i in range(n)]


def builtin_graphs() -> dict[str, Graph]:
    heawood = _cycle(14) + [(i, (i + 5) % 14) for i in range(0, 14, 2)]
    cube = [(a, b) for a in range(8) for b in range(a + 1, 8) if bin(a ^ b).count("1") == 1]
    k33 = [(a, b) for a in range(3) for b in range(3, 6)]
    return {
        "c4": Graph.from_edges(_cycle(4)),
        "c6": Graph.from_edges(_cycle(6)),
        "c8": Graph.from_edges(_cycle(8)),
        "heawood": Graph.from_edges(heawood),
        "cube": Graph.from_edges(cube),
        "k33": Graph.from_edges(k33),
        "path5": Graph.from_edges([(i, i + 1) for i in range(4)]),
        "star4": Graph.from_edges([(0, i) for i in range(1, 5)]),
        "tree7": Graph.from_edges([(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]),
        "two-c6": Graph.from_edges(_cycle(6) + [(a + 6, b + 6) for a, b in _cycle(6)]),
    }


def girth(g: Graph) -> float:
    """Shortest cycle length by BFS from every vertex (inf for forests)."""
    adj = g.adjacency()
    best = float("inf")
    for s in range(len(g.vertices)):
        dist = {s: 0}
        parent = {s: -1}
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    dq.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def shortest_cycle(g: Graph) -> list[int]:
    adj = g.adjacency()
    best = None
    for s in range(len(g.vertices)):
        parent = {s: -1}
        dist = {s: 0}
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for w in adj[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    dq.append(w)
                elif parent[u] != w and (best is None or dist[u] + dist[w] + 1 < len(best)):
                    a, b = [], []
                    x = u
                    while x != -1:
                        a.append(x)
                        x = parent[x]
                    x = w
                    while x != -1:
                        b.append(x)
                        x = parent[x]
                    common = set(a) & set(b)
                    a = a[:next(i for i, x in enumerate(a) if x in common) + 1]
                    b = b[:next(i for i, x in enumerate(b) if x in common)]
                    cyc = a[::-1] + b
                    if best is None or len(cyc) < len(best):
                        best = cyc
    return best or []


def girth_witness_coloring(g: Graph, edge: int, k: int) -> tuple[int, ...]:
    """f_e(v) = min(d_e(v), k-1), d_e the distance to the nearer endpoint of edge e."""
    u0, v0 = g.edges[edge]
    adj = g.adjacency()
    dist = {u0: 0, v0: 0}
    dq = deque([u0, v0])
    while dq:
        u = dq.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                dq.append(w)
    f = tuple(min(dist.get(v, k - 1), k - 1) for v in range(len(g.vertices)))
    C = build_cycles(k)[0]
    for i, (a, b) in enumerate(g.edges):
        val = (f[a], f[b])
        if val not in C.tuples or (i != edge and val == (0, 0)):
            raise GirthViolation([g.vertices[x] for x in shortest_cycle(g)])
    return f


def gen_r2k_lower(k: int, core: Graph, n3: int) -> Instance:
    """H = (A1, A2, A3, E x A3) over a bipartite core with |A3| = n3."""
    base = gen_girth_instance(core)
    left, right = base.partition
    names = list(base.variables) + [f"z{i + 1}" for i in range(n3)]
    third = tuple(range(base.n, base.n + n3))
    clauses = tuple(c + (z,) for c in base.clauses for z in third)
    return Instance(tuple(names), clauses, (left, right, third))


def r2k_witness(inst: Instance, core: Graph, k: int, clause_index: int) -> tuple[int, ...]:
    """Girth colouring on the core, 0 on this clause's third variable, 1 elsewhere in A3."""
    base = gen_girth_instance(core)
    e = clause_index // (inst.n - base.n)
    z = inst.clauses[clause_index][2]
    u, v = base.clauses[e]
    edge = next(i for i, (a, b) in enumerate(core.edges) if {a, b} == {u, v})
    f = girth_witness_coloring(core, edge, k)
    return tuple(f) + tuple(0 if w == z else 1 for w in range(base.n, inst.n))


# ---- registry ----

ZOO = {
    "OR": ("p", "OR_p"),
    "EQ": ("d", "equality on d elements"),
    "CUT": ("", "Boolean disequality"),
    "1-in-3": ("", "exactly one of three"),
    "3LIN": ("m", "x+y+z = 0 mod m"),
    "3LIN*": ("m", "3LIN without (0,0,0)"),
    "OR-DP": ("p q", "pair (OR-DP_{p,q}, DP_{p,q})"),
    "OR-DP-F": ("p q sets", "pair (OR-DP_F, DP_F); sets like 12,23,31"),
    "C": ("k", "C_2k"),
    "C*": ("k", "pair (C*_2k, C_2k)"),
    "Ctilde": ("k", "C~_2k"),
    "Ctilde*": ("k", "pair (C~*_2k, C~_2k)"),
    "R2k": ("k", "pair (R_2k, S_2k)"),
    "S2k": ("k", "S_2k"),
    "CYC": ("m", "CYC_m"),
    "CYC*": ("m", "pair (CYC*_m, CYC_m)"),
    "BCK": ("", "{111,222,012,120,201}"),
    "PAULI": ("", "five columns over {x,y,z}"),
}


def zoo_build(name: str, p: int = 2, q: int = 1, k: int = 3, m: int = 3, d: int = 2,
              sets: str | None = None) -> Relation | RelationPair:
    if name == "OR":
        return build_or(p)
    if name == "EQ":
        return build_eq(d)
    if name == "CUT":
        return build_cut()
    if name == "1-in-3":
        return build_one_in_three()
    if name == "3LIN":
        return build_3lin(m)[0]
    if name == "3LIN*":
        full, star = build_3lin(m)
        return RelationPair(star, full)
    if name == "OR-DP":
        return build_or_dp(p, q)
    if name == "OR-DP-F":
        fam = [tuple(int(c) for c in s) for s in (sets or "12,23,31").split(",")]
        return build_or_dp_family(SetFamily(p, len(fam[0]), tuple(fam)))
    if name in ("C", "C*", "Ctilde", "Ctilde*"):
        C, Cs, Ct, Cts = build_cycles(k)
        return {"C": C, "C*": RelationPair(Cs, C), "Ctilde": Ct, "Ctilde*": RelationPair(Cts, Ct)}[name]
    if name in ("R2k", "S2k"):
        R, S = build_r_s(k)
        return RelationPair(R, S) if name == "R2k" else S
    if name in ("CYC", "CYC*"):
        full, star = build_cyc(m)
        return full if name == "CYC" else RelationPair(star, full)
    if name == "BCK":
        return build_bck()
    if name == "PAULI":
        return build_pauli()
    raise KeyError(f"unknown zoo entry {name!r}")


def kk_constant(p: int, q: int, m_max: int = 10_000) -> float:
    """max over p <= m <= m_max of C(m,p) / C(m,q)^(p/q), and the m -> inf limit."""
    from math import factorial
    best = 0.0
    for m in range(p, m_max + 1):
        best = max(best, comb(m, p) / comb(m, q) ** (p / q))
    limit = factorial(q) ** (p / q) / factorial(p)
    return max(best, limit)
