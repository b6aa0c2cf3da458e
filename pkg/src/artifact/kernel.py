"""SAT-DP_{p,q}: the CNF reduction and the two-phase kernelization."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .nrd import Constraint, solve
from .patterns import parse_dimacs
from .zoo import build_or_dp, idx_pq, kk_constant, pad_value

BOOL, PAD = "boolean", "padding"


class TypeConflict(ValueError):
    pass


@dataclass
class SatDpInstance:
    p: int
    q: int
    variables: tuple
    cut_clauses: list
    ordp_clauses: list

    def __post_init__(self):
        self.variables = tuple(self.variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        self.cut_clauses = [tuple(c) for c in self.cut_clauses]
        self.ordp_clauses = [tuple(c) for c in self.ordp_clauses]
        n = len(self.variables)
        w = self.p + self.p ** self.q
        for k, c in enumerate(self.cut_clauses):
            if len(c) != 2 or any(not 0 <= v < n for v in c):
                raise ValueError(f"CUT clause {k} is malformed")
        for k, c in enumerate(self.ordp_clauses):
            if len(c) != w or any(not 0 <= v < n for v in c):
                raise ValueError(f"OR-DP clause {k} must have {w} in-range variables")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def width(self) -> int:
        return self.p + self.p ** self.q

    def size(self) -> int:
        return len(self.cut_clauses) + len(self.ordp_clauses)

    def types(self) -> list[str | None]:
        """Boolean: in a CUT clause or the first p OR-DP positions; padding: later positions."""
        t: list = [None] * self.n
        for c in self.cut_clauses:
            for v in c:
                self._tag(t, v, BOOL)
        for c in self.ordp_clauses:
            for pos, v in enumerate(c):
                self._tag(t, v, BOOL if pos < self.p else PAD)
        return t

    def _tag(self, t, v, kind):
        if t[v] is None:
            t[v] = kind
        elif t[v] != kind:
            raise TypeConflict(f"variable {self.variables[v]} is used as {t[v]} and {kind}")

    def to_json(self) -> dict:
        nm = self.variables
        return {"p": self.p, "q": self.q, "variables": list(nm),
                "cut": [[nm[a], nm[b]] for a, b in self.cut_clauses],
                "ordp": [[nm[v] for v in c] for c in self.ordp_clauses]}

    @classmethod
    def from_json(cls, obj) -> "SatDpInstance":
        for key in ("p", "q", "variables"):
            if key not in obj:
                raise ValueError(f"missing field {key!r}")
        names = list(obj["variables"])
        ix = {v: i for i, v in enumerate(names)}

        def look(v, where):
            if v not in ix:
                raise ValueError(f"{where}: unknown variable {v!r}")
            return ix[v]

        cut = [tuple(look(v, f"cut clause {k}") for v in c) for k, c in enumerate(obj.get("cut", []))]
        ordp = [tuple(look(v, f"ordp clause {k}") for v in c) for k, c in enumerate(obj.get("ordp", []))]
        return cls(int(obj["p"]), int(obj["q"]), names, cut, ordp)


def from_or_dp_instance(inst, p: int, q: int) -> SatDpInstance:
    """An OR-DP_{p,q} instance (no CUT clauses) as a SAT-DP instance."""
    return SatDpInstance(p, q, inst.variables, [], inst.clauses)


def canonical_unsat(p: int, q: int) -> SatDpInstance:
    """The CUT triangle on fresh variables u0, u1, u2."""
    return SatDpInstance(p, q, ("u0", "u1", "u2"), [(0, 1), (1, 2), (2, 0)], [])


def is_canonical_unsat(inst: SatDpInstance) -> bool:
    return (inst.variables == ("u0", "u1", "u2") and inst.cut_clauses == [(0, 1), (1, 2), (2, 0)]
            and not inst.ordp_clauses)


# ---- CNF reduction ----

def cnf_to_satdp(clauses: Sequence[Sequence[int]], n: int, p: int, q: int) -> SatDpInstance:
    """Literal variables x_i, ~x_i, one padding variable per q-tuple of literal variables,
    CUT(x_i, ~x_i), and one OR-DP clause per CNF clause."""
    if not p >= q >= 1:
        raise ValueError("need p >= q >= 1")
    lits = [f"x{i}" for i in range(1, n + 1)] + [f"~x{i}" for i in range(1, n + 1)]
    combos = list(itertools.product(range(2 * n), repeat=q))
    pads = ["[" + ",".join(lits[c] for c in combo) + "]" for combo in combos]
    cix = {c: k for k, c in enumerate(combos)}
    names = lits + pads
    cut = [(i, n + i) for i in range(n)]

    def var(lit: int) -> int:
        if lit == 0 or abs(lit) > n:
            raise ValueError(f"literal {lit} out of range 1..{n}")
        return lit - 1 if lit > 0 else n + (-lit) - 1

    idx = idx_pq(p, q)
    ordp = []
    for k, cl in enumerate(clauses):
        if len(cl) != p:
            raise ValueError(f"clause {k} has {len(cl)} literals, expected {p}")
        b = [var(l) for l in cl]
        ordp.append(tuple(b) + tuple(2 * n + cix[tuple(b[t] for t in ts)] for ts in idx))
    return SatDpInstance(p, q, names, cut, ordp)


def read_dimacs(text: str) -> tuple[int, list[list[int]]]:
    return parse_dimacs(text)


def cnf_satisfiable(clauses: Sequence[Sequence[int]], n: int) -> bool:
    for bits in itertools.product((False, True), repeat=n):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in cl) for cl in clauses):
            return True
    return False


# ---- satisfiability ----

def satisfying_assignment(inst: SatDpInstance, cap: int = 2_000_000) -> list[int] | None:
    """Complete search over typed domains (Booleans 0/1, padding 2..2+2^q-1)."""
    try:
        types = inst.types()
    except TypeConflict:
        return None
    npad = 2 ** inst.q
    domains = []
    for t in types:
        if t == BOOL:
            domains.append({0, 1})
        elif t == PAD:
            domains.append(set(range(2, 2 + npad)))
        else:
            domains.append({0})
    cut = {(0, 1), (1, 0)}
    ordp_rows = build_or_dp(inst.p, inst.q, arity_cap=10 ** 6).s.tuples
    cons = [Constraint(c, cut) for c in inst.cut_clauses]
    cons += [Constraint(c, ordp_rows) for c in inst.ordp_clauses]
    return solve(domains, cons, cap)


def satisfiable(inst: SatDpInstance, cap: int = 2_000_000) -> bool:
    return satisfying_assignment(inst, cap) is not None


def equisat_oracle(a: SatDpInstance, b: SatDpInstance, cap: int = 2_000_000) -> bool:
    return satisfiable(a, cap) == satisfiable(b, cap)


# ---- kernelization ----

@dataclass
class KernelTrace:
    steps: list = field(default_factory=list)
    before: dict = field(default_factory=dict)
    after: dict = field(default_factory=dict)
    verdict: str = "reduced"

    def to_json(self) -> dict:
        return {"steps": [list(s) for s in self.steps], "before": self.before,
                "after": self.after, "verdict": self.verdict}

    @classmethod
    def from_json(cls, obj) -> "KernelTrace":
        return cls([tuple(s) for s in obj["steps"]], obj.get("before", {}), obj.get("after", {}),
                   obj.get("verdict", "reduced"))


class _State:
    """Mutable working copy addressed by variable names."""

    def __init__(self, inst: SatDpInstance):
        self.p, self.q = inst.p, inst.q
        self.names = list(inst.variables)
        self.alive = list(inst.variables)
        nm = inst.variables
        self.cut = [(nm[a], nm[b]) for a, b in inst.cut_clauses]
        self.ordp = [tuple(nm[v] for v in c) for c in inst.ordp_clauses]
        self.order = {v: i for i, v in enumerate(inst.variables)}

    def substitute(self, keep: str, drop: str) -> None:
        self.cut = [tuple(keep if v == drop else v for v in c) for c in self.cut]
        self.ordp = [tuple(keep if v == drop else v for v in c) for c in self.ordp]
        self.alive.remove(drop)

    def dedupe(self) -> int:
        seen, out = set(), []
        for c in self.ordp:
            if c not in seen:
                seen.add(c)
                out.append(c)
        removed = len(self.ordp) - len(out)
        self.ordp = out
        return removed

    def drop_cut(self, c) -> None:
        self.cut.remove(tuple(c))

    def to_instance(self) -> SatDpInstance:
        ix = {v: i for i, v in enumerate(self.alive)}
        return SatDpInstance(self.p, self.q, self.alive,
                             [tuple(ix[v] for v in c) for c in self.cut],
                             [tuple(ix[v] for v in c) for c in self.ordp])


def _phase1(st: _State) -> tuple[list, bool]:
    """Union-find with parity over CUT clauses in order: tree edges stay, consistent
    non-tree edges go, an odd cycle or a self-loop means unsatisfiable."""
    parent: dict = {}
    parity: dict = {}

    def find(v):
        if v not in parent:
            parent[v], parity[v] = v, 0
        path = []
        while parent[v] != v:
            path.append(v)
            v = parent[v]
        root = v
        acc = 0
        for u in reversed(path):
            acc ^= parity[u]
            parity[u] = acc
            parent[u] = root
        return root

    dropped = []
    for c in st.cut:
        a, b = c
        if a == b:
            return dropped, True
        ra, rb = find(a), find(b)
        if ra != rb:
            if st.order[ra] < st.order[rb]:
                ra, rb = rb, ra
            parent[ra] = rb
            parity[ra] = parity[a] ^ parity[b] ^ 1
        elif parity[a] ^ parity[b] == 1:
            dropped.append(c)
        else:
            return dropped, True
    return dropped, False


def _rule_candidates(st: _State) -> list[tuple[str, str, str]]:
    """All applicable identifications as (rule, keep, drop), keep the lower-index variable."""
    p = st.p
    idx = idx_pq(p, st.q)
    out = []
    by_pad: dict = {}
    by_slot: dict = {}
    for c in st.ordp:
        for i, ts in enumerate(idx):
            pad = c[p + i]
            ctrl = tuple(c[t] for t in ts)
            by_pad.setdefault(pad, []).append(ctrl)
            by_slot.setdefault((i, ctrl), []).append(pad)
    for pad, ctrls in by_pad.items():
        first = ctrls[0]
        for other in ctrls[1:]:
            for a, b in zip(first, other):
                if a != b:
                    keep, drop = sorted((a, b), key=st.order.__getitem__)
                    out.append(("identify-boolean", keep, drop))
    for (_, _), pads in by_slot.items():
        base = min(pads, key=st.order.__getitem__)
        for pd in pads:
            if pd != base:
                out.append(("identify-padding", base, pd))
    seen = set()
    uniq = []
    for c in out:
        if c not in seen:
            seen.add(c)
            uniq.append(c)
    return sorted(uniq, key=lambda c: (c[0] != "identify-boolean", st.order[c[2]], st.order[c[1]]))


def kernelize(inst: SatDpInstance, rng: random.Random | None = None) -> tuple[SatDpInstance, KernelTrace]:
    """Phase 1 (CUT spanning forest) and rules 1 and 2 to a fixpoint.

    With rng, rule applications are picked at random instead of in the fixed
    order (Booleans before padding, lowest dropped variable first).
    """
    trace = KernelTrace(before={"variables": inst.n, "cut": len(inst.cut_clauses), "ordp": len(inst.ordp_clauses)})

    def finish(out: SatDpInstance, verdict: str):
        trace.verdict = verdict
        trace.after = {"variables": out.n, "cut": len(out.cut_clauses), "ordp": len(out.ordp_clauses)}
        return out, trace

    try:
        inst.types()
    except TypeConflict as e:
        trace.steps.append(("unsat-detected", "type-conflict", str(e)))
        return finish(canonical_unsat(inst.p, inst.q), "unsat")
    st = _State(inst)
    removed = st.dedupe()
    if removed:
        trace.steps.append(("dedupe", removed))
    while True:
        dropped, unsat = _phase1(st)
        for c in dropped:
            st.drop_cut(c)
            trace.steps.append(("forest-drop", c[0], c[1]))
        if unsat:
            trace.steps.append(("unsat-detected", "odd-cut-cycle", ""))
            return finish(canonical_unsat(inst.p, inst.q), "unsat")
        cands = _rule_candidates(st)
        if not cands:
            break
        rule, keep, drop = rng.choice(cands) if rng is not None else cands[0]
        st.substitute(keep, drop)
        trace.steps.append((rule, keep, drop))
        removed = st.dedupe()
        if removed:
            trace.steps.append(("dedupe", removed))
    return finish(st.to_instance(), "reduced")


def replay(inst: SatDpInstance, trace: KernelTrace) -> SatDpInstance:
    """Re-apply recorded steps without any search."""
    st = _State(inst)
    for step in trace.steps:
        kind = step[0]
        if kind == "unsat-detected":
            return canonical_unsat(inst.p, inst.q)
        if kind == "dedupe":
            st.dedupe()
        elif kind == "forest-drop":
            st.drop_cut((step[1], step[2]))
        elif kind in ("identify-boolean", "identify-padding"):
            st.substitute(step[1], step[2])
        else:
            raise ValueError(f"unknown trace step {kind!r}")
    return st.to_instance()


def rules_exhausted(inst: SatDpInstance) -> bool:
    return not _rule_candidates(_State(inst))


def signature(inst: SatDpInstance) -> tuple:
    """Renaming-stable summary: variables, OR-DP clauses by name, CUT parity classes."""
    nm = inst.variables
    adj: dict = {}
    for a, b in inst.cut_clauses:
        adj.setdefault(nm[a], []).append(nm[b])
        adj.setdefault(nm[b], []).append(nm[a])
    seen: dict = {}
    comps = []
    for v in sorted(adj):
        if v in seen:
            continue
        seen[v] = 0
        stack = [v]
        sides = ([v], [])
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen[w] = seen[u] ^ 1
                    sides[seen[w]].append(w)
                    stack.append(w)
        comps.append(tuple(sorted((tuple(sorted(sides[0])), tuple(sorted(sides[1]))))))
    ordp = tuple(sorted(tuple(nm[v] for v in c) for c in inst.ordp_clauses))
    return tuple(sorted(nm)), ordp, tuple(sorted(comps))


# ---- size accounting ----

def q_shadow(family: Iterable[Iterable], q: int) -> set[frozenset]:
    fam = [frozenset(s) for s in family]
    sizes = {len(s) for s in fam}
    if len(sizes) > 1:
        raise ValueError("family must be uniform")
    return {frozenset(c) for s in fam for c in itertools.combinations(sorted(s, key=repr), q)}


def size_bound(p: int, q: int, n: int) -> float:
    """2p * c_{p,q} * n^(p/q) with the numerically computed c_{p,q}."""
    return 2 * p * kk_constant(p, q) * n ** (p / q)


def size_report(before: SatDpInstance, after: SatDpInstance) -> dict:
    p, q = before.p, before.q
    n = before.n
    A = [frozenset((c[t], t) for t in range(p)) for c in after.ordp_clauses]
    B = q_shadow(A, q) if A else set()
    idx = idx_pq(p, q)
    slots = {(c[p + i], i) for c in after.ordp_clauses for i in range(len(idx))}
    bound = size_bound(p, q, n) if n else 0.0
    return {
        "variables_before": n,
        "variables_after": after.n,
        "clauses_before": before.size(),
        "clauses_after": after.size(),
        "cut_after": len(after.cut_clauses),
        "ordp_after": len(after.ordp_clauses),
        "c_pq": kk_constant(p, q),
        "bound": bound,
        "within_bound": after.size() <= bound,
        "family_size": len(set(A)),
        "shadow_size": len(B),
        "padding_slots": len(slots),
    }


# ---- random instances ----

def random_satdp(p: int, q: int, n_vars: int, rng: random.Random, ordp: int | None = None,
                 cut: int | None = None, mode: str = "mixed") -> SatDpInstance:
    """Booleans b0.., paddings d0..; mode 'consistent' assigns one padding per controlled
    tuple where possible, 'random' draws paddings freely, 'mixed' flips a coin per clause."""
    nb = rng.randint(max(1, min(p, n_vars - 1)), max(1, n_vars - 1))
    npd = n_vars - nb
    if npd < 1:
        nb, npd = n_vars - 1, 1
    names = [f"b{i}" for i in range(nb)] + [f"d{i}" for i in range(npd)]
    idx = idx_pq(p, q)
    cut = rng.randint(0, nb) if cut is None else cut
    side = [rng.randrange(2) for _ in range(nb)]
    cuts = []
    for _ in range(cut if nb >= 2 else 0):
        a, b = rng.sample(range(nb), 2)
        if side[a] == side[b] and rng.random() < 0.8:
            continue
        cuts.append((a, b))
    ordp = rng.randint(1, 8) if ordp is None else ordp
    table: dict = {}
    clauses = []
    for _ in range(ordp):
        bs = [rng.randrange(nb) for _ in range(p)]
        consistent = mode == "consistent" or (mode == "mixed" and rng.random() < 0.5)
        pads = []
        for ts in idx:
            ctrl = tuple(bs[t] for t in ts)
            if consistent:
                if ctrl not in table:
                    table[ctrl] = nb + rng.randrange(npd)
                pads.append(table[ctrl])
            else:
                pads.append(nb + rng.randrange(npd))
        clauses.append(tuple(bs) + tuple(pads))
    return SatDpInstance(p, q, names, cuts, clauses)


def semantic_satisfiable(inst: SatDpInstance) -> bool:
    """Brute force over the Boolean variables; each padding value is forced by the bits it controls."""
    try:
        types = inst.types()
    except TypeConflict:
        return False
    bools = [v for v, t in enumerate(types) if t == BOOL]
    idx = idx_pq(inst.p, inst.q)
    for bits in itertools.product((0, 1), repeat=len(bools)):
        val = dict(zip(bools, bits))
        if any(val[a] == val[b] for a, b in inst.cut_clauses):
            continue
        pad: dict = {}
        ok = True
        for c in inst.ordp_clauses:
            if not any(val[c[t]] for t in range(inst.p)):
                ok = False
                break
            for i, ts in enumerate(idx):
                want = pad_value([val[c[t]] for t in ts])
                if pad.setdefault(c[inst.p + i], want) != want:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False
