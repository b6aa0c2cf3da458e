"""Forbidden partite hypergraphs of unit multisorted patterns and H-freeness checks."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .nrd import check_nonredundant
from .patterns import MultisortedPattern, Pattern, cube_identities, multisorted_minor, preserves
from .relations import Instance, RelationPair, as_pair, tilde_pair


class TrivialPattern(ValueError):
    """A partial projection has no forbidden structure."""


@dataclass(frozen=True)
class PartiteHypergraph:
    """parts[i] lists vertex names of part i; an edge picks one vertex index per part."""

    parts: tuple
    edges: tuple

    def __post_init__(self):
        parts = tuple(tuple(p) for p in self.parts)
        edges = tuple(sorted(set(tuple(e) for e in self.edges)))
        for e in edges:
            if len(e) != len(parts) or any(not 0 <= v < len(parts[i]) for i, v in enumerate(e)):
                raise ValueError(f"edge {e} does not respect the parts")
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "edges", edges)

    @property
    def r(self) -> int:
        return len(self.parts)

    def size(self) -> tuple[int, int]:
        return sum(len(p) for p in self.parts), len(self.edges)

    def to_instance(self) -> Instance:
        names = tuple(f"{self.parts[i][v]}@{i + 1}" for i in range(self.r) for v in range(len(self.parts[i])))
        off = list(itertools.accumulate([0] + [len(p) for p in self.parts]))
        clauses = tuple(tuple(off[i] + v for i, v in enumerate(e)) for e in self.edges)
        partition = tuple(tuple(range(off[i], off[i + 1])) for i in range(self.r))
        return Instance(names, clauses, partition)

    @classmethod
    def from_instance(cls, inst: Instance) -> "PartiteHypergraph":
        """Uses the instance's partition, or the positions a variable occupies otherwise."""
        r = inst.arity
        parts = [[] for _ in range(r)]
        ix = [dict() for _ in range(r)]
        for c in inst.clauses:
            for i, v in enumerate(c):
                if v not in ix[i]:
                    ix[i][v] = len(parts[i])
                    parts[i].append(inst.variables[v])
        edges = [tuple(ix[i][v] for i, v in enumerate(c)) for c in inst.clauses]
        return cls(tuple(parts), tuple(edges))

    def to_json(self) -> dict:
        return {"parts": [list(p) for p in self.parts],
                "clauses": [[self.parts[i][v] for i, v in enumerate(e)] for e in self.edges]}

    @classmethod
    def from_json(cls, obj) -> "PartiteHypergraph":
        if "parts" not in obj:
            raise ValueError("hypergraph JSON needs 'parts'")
        parts = [list(p) for p in obj["parts"]]
        rows = obj["clauses"] if "clauses" in obj else obj["edges"]
        edges = [tuple(parts[i].index(v) for i, v in enumerate(e)) for e in rows]
        return cls(tuple(parts), tuple(edges))


# ---- unit patterns ----

def is_partial_projection(P: MultisortedPattern) -> bool:
    if not P.is_unit():
        raise ValueError("partial projection is defined for unit patterns")
    n = P.arity
    ids = [c.identities[0] for c in P.components]
    return any(all(a[j] == o for a, o in ids) for j in range(n))


def unit_decompose(P: MultisortedPattern) -> list[MultisortedPattern]:
    """One unit pattern per choice of an identity from each component."""
    choices = [c.identities for c in P.components]
    return [MultisortedPattern(tuple(Pattern([ident], P.arity) for ident in combo))
            for combo in itertools.product(*choices)]


def hypergraph_of(P: MultisortedPattern) -> PartiteHypergraph:
    """Columns of the unit pattern plus the output edge; repeated columns collapse."""
    if not P.is_unit():
        raise ValueError("hypergraph_of needs a unit pattern")
    if is_partial_projection(P):
        raise TrivialPattern("partial projection: no forbidden structure")
    ids = [c.identities[0] for c in P.components]
    letters = "xyzuvwabcdefghijklmnopqrst"
    parts = []
    for a, o in ids:
        nv = max(max(a), o) + 1
        parts.append(tuple(letters[v] if v < len(letters) else f"v{v}" for v in range(nv)))
    edges = [tuple(a[j] for a, _ in ids) for j in range(P.arity)]
    edges.append(tuple(o for _, o in ids))
    return PartiteHypergraph(tuple(parts), tuple(edges))


def output_edge(P: MultisortedPattern) -> tuple:
    return tuple(c.identities[0][1] for c in P.components)


def cube_per_sort(k: int) -> MultisortedPattern:
    """Sort i carries the i-th identity of U_k."""
    return MultisortedPattern(tuple(Pattern([ident]) for ident in cube_identities(k)))


def knu_per_sort(k: int) -> MultisortedPattern:
    """Sort i carries the k-NU identity with the odd variable at position i."""
    return MultisortedPattern(tuple(
        Pattern([(tuple("y" if j == i else "x" for j in range(k)), "x")]) for i in range(k)))


def cycle_unit_pattern(t: int) -> MultisortedPattern:
    """Binary unit pattern whose hypergraph is the cycle C_2t through the output edge (0, 0).

    Left vertex a is adjacent to right vertices a and a+1 (mod t).
    """
    if t < 2:
        raise ValueError("need t >= 2 (t = 1 is a partial projection)")
    left = [0] + [a for a in range(1, t) for _ in (0, 1)]
    right = [1] + [b for a in range(1, t) for b in (a, (a + 1) % t)]
    return MultisortedPattern((Pattern([(tuple(left), 0)]), Pattern([(tuple(right), 0)])))


# ---- isomorphism ----

def canonical_form(H: PartiteHypergraph, limit: int = 200_000) -> tuple:
    """Part-respecting canonical labelling: degree refinement, then the least
    relabelled edge list over permutations inside refined classes."""
    r = H.r
    sizes = [len(p) for p in H.parts]
    color = [[0] * s for s in sizes]
    for _ in range(sum(sizes) + 1):
        sig = [[None] * s for s in sizes]
        for i in range(r):
            for v in range(sizes[i]):
                nb = sorted(tuple(color[k][e[k]] for k in range(r) if k != i) for e in H.edges if e[i] == v)
                sig[i][v] = (color[i][v], tuple(nb))
        new = []
        for i in range(r):
            keys = sorted(set(sig[i]))
            new.append([keys.index(sig[i][v]) for v in range(sizes[i])])
        if new == color:
            break
        color = new
    # orderings: vertices sorted by class, free permutation inside each class
    per_part = []
    total = 1
    for i in range(r):
        classes = {}
        for v in range(sizes[i]):
            classes.setdefault(color[i][v], []).append(v)
        blocks = [classes[c] for c in sorted(classes)]
        opts = [list(itertools.permutations(b)) for b in blocks]
        perms = [sum(choice, ()) for choice in itertools.product(*opts)]
        total *= len(perms)
        per_part.append(perms)
    if total > limit:
        raise ValueError("too many automorphism candidates for canonical labelling")
    best = None
    for combo in itertools.product(*per_part):
        label = [{v: k for k, v in enumerate(order)} for order in combo]
        es = tuple(sorted(tuple(label[i][e[i]] for i in range(r)) for e in H.edges))
        if best is None or es < best:
            best = es
    return tuple(sizes), best


def isomorphic(H1: PartiteHypergraph, H2: PartiteHypergraph) -> bool:
    return H1.r == H2.r and canonical_form(H1) == canonical_form(H2)


def complete_partite(r: int, s: int = 2) -> PartiteHypergraph:
    parts = tuple(tuple(f"v{j}" for j in range(s)) for _ in range(r))
    return PartiteHypergraph(parts, tuple(itertools.product(range(s), repeat=r)))


def cycle_graph(t: int) -> PartiteHypergraph:
    """C_2t as a bipartite graph."""
    edges = [(a, a) for a in range(t)] + [(a, (a + 1) % t) for a in range(t)]
    return PartiteHypergraph((tuple(f"l{a}" for a in range(t)), tuple(f"r{a}" for a in range(t))), tuple(edges))


# ---- closure under surjective minors ----

def set_partitions(n: int) -> Iterable[tuple[int, ...]]:
    """Restricted growth strings: h with h[0] = 0 and h[j] <= max(h[:j]) + 1."""
    def rec(prefix, mx):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in range(mx + 2):
            prefix.append(v)
            yield from rec(prefix, max(mx, v))
            prefix.pop()
    if n == 0:
        yield ()
    else:
        yield from rec([0], 0)


def hq_closure(Q: Iterable[MultisortedPattern], arity_cap: int = 9) -> list[PartiteHypergraph]:
    """Hypergraphs of the non-trivial unit patterns of all surjective minors, up to isomorphism."""
    seen = {}
    for P in Q:
        if P.arity > arity_cap:
            raise ValueError(f"arity {P.arity} exceeds cap {arity_cap}")
        for h in set_partitions(P.arity):
            M = multisorted_minor(P, h, max(h) + 1)
            for U in unit_decompose(M):
                if is_partial_projection(U):
                    continue
                H = hypergraph_of(U)
                key = canonical_form(H)
                if key not in seen:
                    seen[key] = H
    return [seen[k] for k in sorted(seen)]


# ---- H-freeness ----

def hfree_check(inst: Instance, H: PartiteHypergraph, cap: int = 2_000_000):
    """Part-respecting injective embedding of H into the instance.

    Returns {(part, H vertex): instance variable}, None when H-free, or "unknown" past the cap.
    Part i of the instance is the set of variables occurring at position i.
    """
    if inst.arity != H.r:
        raise ValueError("arity mismatch")
    r = H.r
    clauses = inst.clauses
    # order edges so each next edge shares as many vertices as possible with the placed ones
    order = []
    placed = set()
    remaining = list(range(len(H.edges)))
    while remaining:
        best = max(remaining, key=lambda k: (sum((i, H.edges[k][i]) in placed for i in range(r)), -k))
        order.append(H.edges[best])
        placed |= {(i, H.edges[best][i]) for i in range(r)}
        remaining.remove(best)
    phi: dict = {}
    used = [set() for _ in range(r)]
    nodes = 0

    def rec(d):
        nonlocal nodes
        if d == len(order):
            return True
        e = order[d]
        for c in clauses:
            nodes += 1
            if nodes > cap:
                raise _Cap()
            added = []
            ok = True
            for i in range(r):
                key = (i, e[i])
                if key in phi:
                    if phi[key] != c[i]:
                        ok = False
                        break
                elif c[i] in used[i]:
                    ok = False
                    break
                else:
                    phi[key] = c[i]
                    used[i].add(c[i])
                    added.append(key)
            if ok and rec(d + 1):
                return True
            for key in added:
                used[key[0]].discard(phi.pop(key))
        return False

    try:
        found = rec(0)
    except _Cap:
        return "unknown"
    return dict(phi) if found else None


class _Cap(Exception):
    pass


def verify_embedding(inst: Instance, H: PartiteHypergraph, phi: dict) -> bool:
    cl = set(inst.clauses)
    for i in range(H.r):
        vals = [phi[(i, v)] for v in range(len(H.parts[i])) if (i, v) in phi]
        if len(vals) != len(set(vals)):
            return False
    return all(tuple(phi[(i, e[i])] for i in range(H.r)) in cl for e in H.edges)


# ---- minimal redundant instances ----

class NotMinimalRedundant(ValueError):
    pass


def minimal_redundant_to_pattern(inst: Instance, pair, check: bool = True) -> MultisortedPattern:
    """Read the unit pattern off a minimal redundant instance: the redundant clause is the output."""
    pair = as_pair(pair)
    rep = check_nonredundant(inst, pair)
    if rep.status == "unknown":
        raise NotMinimalRedundant("engine could not decide redundancy")
    red = rep.redundant_clauses()
    if not red:
        raise NotMinimalRedundant("instance is non-redundant")
    for k in range(len(inst.clauses)):
        sub = check_nonredundant(inst.drop(k), pair)
        if sub.status != "nonredundant":
            raise NotMinimalRedundant(f"dropping clause {k} leaves a redundant instance")
    y = inst.clauses[red[0]]
    args = [c for k, c in enumerate(inst.clauses) if k != red[0]]
    comps = []
    for i in range(inst.arity):
        comps.append(Pattern([(tuple(c[i] for c in args), y[i])], len(args)))
    P = MultisortedPattern(tuple(comps))
    if check:
        res = preserves(P, tilde_pair(pair), enforce_caps=False)
        if res.status is False:
            raise AssertionError("read-off pattern fails to preserve (S, T~)")
    return P


# ---- extremal numbers at desk scale ----

def compositions(n: int, r: int) -> Iterable[tuple[int, ...]]:
    if r == 1:
        if n >= 1:
            yield (n,)
        return
    for a in range(1, n - r + 2):
        for rest in compositions(n - a, r - 1):
            yield (a,) + rest


def ex_r(n: int, forbidden: Sequence[PartiteHypergraph], r: int, cap: int = 5_000_000) -> tuple[int, Instance | None]:
    """Most edges of an r-partite r-uniform hypergraph on n vertices containing no forbidden member."""
    if n > 7:
        raise ValueError("exhaustive search is capped at n <= 7")
    best, best_inst = 0, None
    nodes = 0
    for comp in compositions(n, r):
        off = list(itertools.accumulate((0,) + comp))
        names = tuple(f"v{j}" for j in range(n))
        partition = tuple(tuple(range(off[i], off[i + 1])) for i in range(r))
        universe = list(itertools.product(*partition))
        chosen: list = []

        def free(edges):
            inst = Instance(names, tuple(edges), partition)
            return all(hfree_check(inst, H) is None for H in forbidden)

        def rec(start):
            nonlocal best, best_inst, nodes
            nodes += 1
            if nodes > cap:
                raise _Cap()
            if len(chosen) > best:
                best = len(chosen)
                best_inst = Instance(names, tuple(chosen), partition)
            if len(chosen) + len(universe) - start <= best:
                return
            for k in range(start, len(universe)):
                if len(chosen) + len(universe) - k <= best:
                    return
                chosen.append(universe[k])
                if free(chosen):
                    rec(k + 1)
                chosen.pop()

        rec(0)
    return best, best_inst
