"""Witness search for (conditional) non-redundancy and exact NRD at small sizes."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .relations import Instance, Relation, RelationPair, as_pair


class SearchCapExceeded(Exception):
    pass


class _Unknown:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "UNKNOWN"

    def __bool__(self) -> bool:
        return False


UNKNOWN = _Unknown()

DEFAULT_CAP = 2_000_000


# ---- generic finite CSP search ----

class Constraint:
    __slots__ = ("scope", "allowed", "vars")

    def __init__(self, scope: Sequence[int], allowed: Iterable[Sequence[int]]):
        scope = tuple(scope)
        first = {}
        eq = []
        for i, v in enumerate(scope):
            if v in first:
                eq.append((first[v], i))
            else:
                first[v] = i
        rows = [tuple(t) for t in allowed]
        if eq:
            rows = [t for t in rows if all(t[a] == t[b] for a, b in eq)]
        self.scope = scope
        self.allowed = rows
        self.vars = tuple(first)


def solve(domains: Sequence[Iterable[int]], constraints: Sequence[Constraint],
          cap: int = DEFAULT_CAP) -> list[int] | None:
    """Complete backtracking with constraint propagation.

    Variables are picked most-constrained-first with ties broken by index and
    values tried in ascending order, so the first solution found is deterministic.
    Raises SearchCapExceeded once more than `cap` values have been tried.
    """
    n = len(domains)
    doms = [frozenset(d) for d in domains]
    by_var: list[list[int]] = [[] for _ in range(n)]
    for ci, c in enumerate(constraints):
        for v in c.vars:
            by_var[v].append(ci)
    constrained = [v for v in range(n) if by_var[v]]
    nodes = 0

    def propagate(doms: list, queue: list[int]) -> bool:
        pending = set(queue)
        while queue:
            ci = queue.pop()
            pending.discard(ci)
            c = constraints[ci]
            sup = {v: set() for v in c.vars}
            sc = c.scope
            for t in c.allowed:
                ok = True
                for i, v in enumerate(sc):
                    if t[i] not in doms[v]:
                        ok = False
                        break
                if ok:
                    for i, v in enumerate(sc):
                        sup[v].add(t[i])
            for v, s in sup.items():
                if len(s) < len(doms[v]):
                    if not s:
                        return False
                    doms[v] = frozenset(s)
                    for cj in by_var[v]:
                        if cj != ci and cj not in pending:
                            pending.add(cj)
                            queue.append(cj)
        return True

    if not propagate(doms, list(range(len(constraints)))):
        return None

    def rec(doms: list) -> list | None:
        nonlocal nodes
        best = None
        for v in constrained:
            if len(doms[v]) > 1 and (best is None or len(doms[v]) < len(doms[best])):
                best = v
        if best is None:
            return doms
        for a in sorted(doms[best]):
            nodes += 1
            if nodes > cap:
                raise SearchCapExceeded(f"node cap {cap} exceeded")
            nd = list(doms)
            nd[best] = frozenset((a,))
            if propagate(nd, list(by_var[best])):
                res = rec(nd)
                if res is not None:
                    return res
        return None

    if any(not doms[v] for v in constrained):
        return None
    res = rec(doms)
    if res is None:
        return None
    if any(not d for d in res):
        return None
    return [min(d) for d in res]


# ---- witnesses ----

@dataclass(frozen=True)
class WitnessCertificate:
    clause_index: int
    assignment: tuple[int, ...]
    violated_value: tuple[int, ...]

    def to_json(self, inst: Instance, pair: RelationPair) -> dict:
        d = pair.domain
        return {
            "clause_index": self.clause_index,
            "clause": list(inst.clause_names(self.clause_index)),
            "assignment": {inst.variables[v]: d.name(a) for v, a in enumerate(self.assignment)},
            "violated_value": [d.name(a) for a in self.violated_value],
        }


def verify_witness(inst: Instance, pair: RelationPair, cert: WitnessCertificate) -> bool:
    """Re-evaluate a certificate without any search."""
    pair = as_pair(pair)
    sigma = cert.assignment
    if len(sigma) != inst.n:
        return False
    for k, c in enumerate(inst.clauses):
        val = tuple(sigma[v] for v in c)
        if k == cert.clause_index:
            if val != tuple(cert.violated_value) or val in pair.s.tuples or val not in pair.t.tuples:
                return False
        elif val not in pair.s.tuples:
            return False
    return True


def _witness_constraints(inst: Instance, pair: RelationPair, k: int) -> list[Constraint]:
    s_rows = pair.s.sorted()
    gap = sorted(pair.gap())
    return [Constraint(c, gap if i == k else s_rows) for i, c in enumerate(inst.clauses)]


def find_witness(inst: Instance, pair, clause_index: int, cap: int = DEFAULT_CAP):
    """Assignment putting every other clause in S and this clause in T minus S.

    Returns a WitnessCertificate, None if no witness exists, or UNKNOWN when the
    node cap is hit.
    """
    pair = as_pair(pair)
    if not 0 <= clause_index < len(inst.clauses):
        raise IndexError(f"clause index {clause_index} out of range")
    doms = [range(pair.domain.size)] * inst.n
    try:
        sol = solve(doms, _witness_constraints(inst, pair, clause_index), cap)
    except SearchCapExceeded:
        return UNKNOWN
    if sol is None:
        return None
    val = tuple(sol[v] for v in inst.clauses[clause_index])
    return WitnessCertificate(clause_index, tuple(sol), val)


@dataclass
class NrdReport:
    mode: str
    per_clause: list
    value: int = field(init=False)

    def __post_init__(self):
        self.value = len(self.per_clause)

    @property
    def status(self) -> str:
        if any(c is None for c in self.per_clause):
            return "redundant"
        if any(c is UNKNOWN for c in self.per_clause):
            return "unknown"
        return "nonredundant"

    @property
    def nonredundant(self) -> bool | None:
        s = self.status
        return None if s == "unknown" else s == "nonredundant"

    @property
    def certificates(self) -> list[WitnessCertificate]:
        return [c for c in self.per_clause if isinstance(c, WitnessCertificate)]

    def redundant_clauses(self) -> list[int]:
        return [k for k, c in enumerate(self.per_clause) if c is None]

    def to_json(self, inst: Instance, pair: RelationPair) -> dict:
        rows = []
        for k, c in enumerate(self.per_clause):
            entry = {"clause_index": k, "clause": list(inst.clause_names(k))}
            if isinstance(c, WitnessCertificate):
                entry["certificate"] = c.to_json(inst, pair)
            else:
                entry["certificate"] = "REDUNDANT" if c is None else "UNKNOWN"
            rows.append(entry)
        return {"mode": self.mode, "status": self.status, "value": self.value,
                "nonredundant": self.nonredundant, "per_clause": rows}


def _mode(pair: RelationPair) -> str:
    return "plain" if len(pair.t) == pair.domain.size ** pair.arity else "conditional"


def _witness_job(args):
    inst, pair, k, cap = args
    return find_witness(inst, pair, k, cap)


def check_nonredundant(inst: Instance, pair, cap: int = DEFAULT_CAP, jobs: int = 1) -> NrdReport:
    pair = as_pair(pair)
    idx = range(len(inst.clauses))
    if jobs > 1 and len(inst.clauses) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            per = list(ex.map(_witness_job, [(inst, pair, k, cap) for k in idx]))
        per = [UNKNOWN if isinstance(c, _Unknown) else c for c in per]
    else:
        per = [find_witness(inst, pair, k, cap) for k in idx]
    return NrdReport(_mode(pair), per)


def is_nonredundant(inst: Instance, pair, cap: int = DEFAULT_CAP) -> bool | None:
    """Stops at the first redundant clause."""
    pair = as_pair(pair)
    unknown = False
    for k in range(len(inst.clauses)):
        w = find_witness(inst, pair, k, cap)
        if w is None:
            return False
        if w is UNKNOWN:
            unknown = True
    return None if unknown else True


def partition_by_violation(inst: Instance, pair, report: NrdReport | None = None) -> list[tuple[tuple[int, ...], Instance]]:
    """Group clauses by the S-gap tuple their witness lands on, sorted by that tuple."""
    pair = as_pair(pair)
    report = report or check_nonredundant(inst, pair)
    if report.status != "nonredundant":
        raise ValueError("instance is not (known to be) non-redundant")
    groups: dict[tuple, list[int]] = {}
    for c in report.per_clause:
        groups.setdefault(c.violated_value, []).append(c.clause_index)
    return [(v, inst.with_clauses(inst.clauses[k] for k in ks)) for v, ks in sorted(groups.items())]


# ---- exact NRD ----

@dataclass
class ExactResult:
    value: int
    exact: bool
    clauses: tuple = ()
    nodes: int = 0

    def __int__(self) -> int:
        return self.value


def _clause_universe(n: int, r: int, blocks: Sequence[Sequence[int]] | None) -> list[tuple[int, ...]]:
    if blocks is None:
        return list(itertools.product(range(n), repeat=r))
    return list(itertools.product(*blocks))


def _compositions(n: int, r: int):
    if r == 1:
        yield (n,)
        return
    for a in range(n + 1):
        for rest in _compositions(n - a, r - 1):
            yield (a,) + rest


def exact_nrd(pair, n: int, multipartite: bool = False, cap: int = 200_000) -> ExactResult:
    """Largest clause set on n variables that is (conditionally) non-redundant.

    Non-redundant clause sets are closed under taking subsets, so a depth-first
    enumeration that only ever extends non-redundant sets is complete; the
    remaining-clause count gives the bound. Unused variables are allowed.
    """
    pair = as_pair(pair)
    r = pair.arity
    names = tuple(f"v{i}" for i in range(n))
    if multipartite:
        best = ExactResult(0, True)
        for sizes in _compositions(n, r):
            starts = list(itertools.accumulate((0,) + sizes))
            blocks = [tuple(range(starts[i], starts[i + 1])) for i in range(r)]
            res = _exact_search(pair, names, _clause_universe(n, r, blocks), cap, best.value)
            if res.value > best.value or not res.exact:
                best = ExactResult(max(res.value, best.value), best.exact and res.exact,
                                   res.clauses if res.value > best.value else best.clauses,
                                   best.nodes + res.nodes)
            else:
                best.nodes += res.nodes
        return best
    return _exact_search(pair, names, _clause_universe(n, r, None), cap, 0)


def _exact_search(pair: RelationPair, names, universe, cap: int, floor: int) -> ExactResult:
    s_rows = pair.s.sorted()
    gap = sorted(pair.gap())
    s_set = pair.s.tuples
    nd = pair.domain.size
    nvar = len(names)
    useful = []
    for c in universe:
        # a clause whose own witness cannot exist is redundant in every instance
        if find_witness(Instance(names, (c,)), pair, 0) is not None:
            useful.append(c)
    best_val = floor
    best_set: tuple = ()
    nodes = 0
    exact = True

    def witness_for(clauses: list, k: int, hint):
        if hint is not None:
            ok = True
            for i, c in enumerate(clauses):
                if i != k and tuple(hint[v] for v in c) not in s_set:
                    ok = False
                    break
            if ok:
                return hint
        cons = [Constraint(c, gap if i == k else s_rows) for i, c in enumerate(clauses)]
        return solve([range(nd)] * nvar, cons)

    def rec(chosen: list, wits: list, start: int):
        nonlocal best_val, best_set, nodes, exact
        if len(chosen) > best_val:
            best_val = len(chosen)
            best_set = tuple(chosen)
        for i in range(start, len(useful)):
            if len(chosen) + (len(useful) - i) <= best_val:
                return
            nodes += 1
            if nodes > cap:
                exact = False
                return
            cand = chosen + [useful[i]]
            new_w = []
            ok = True
            for k in range(len(cand)):
                w = witness_for(cand, k, wits[k] if k < len(wits) else None)
                if w is None:
                    ok = False
                    break
                new_w.append(w)
            if ok:
                rec(cand, new_w, i + 1)
            if not exact:
                return

    rec([], [], 0)
    return ExactResult(best_val, exact, best_set, nodes)


def triangle_values(r_rel: Relation, s_rel: Relation, t_rel: Relation, n: int, cap: int = 200_000) -> tuple[int, int, int]:
    rt = exact_nrd(RelationPair(r_rel, t_rel), n, cap=cap)
    rs = exact_nrd(RelationPair(r_rel, s_rel), n, cap=cap)
    st = exact_nrd(RelationPair(s_rel, t_rel), n, cap=cap)
    if not (rt.exact and rs.exact and st.exact):
        raise SearchCapExceeded("exact NRD search hit its cap")
    return rt.value, rs.value, st.value


def triangle_check(r_rel: Relation, s_rel: Relation, t_rel: Relation, n: int, cap: int = 200_000) -> bool:
    """NRD(R|T) <= NRD(R|S) + NRD(S|T)."""
    rt, rs, st = triangle_values(r_rel, s_rel, t_rel, n, cap)
    return rt <= rs + st
