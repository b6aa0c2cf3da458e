"""Polymorphism patterns, their interpretations, powers, and preservation tests."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .relations import Domain, Instance, Relation, RelationPair, as_pair, complement_tilde

Identity = tuple  # (args: tuple[int, ...], out: int)

PRESERVE_ARITY_CAP = 15
PRESERVE_SIZE_CAP = 32


def canonical_identity(args: Sequence[Hashable], out: Hashable) -> Identity:
    """Rename variables to 0,1,2,... by first occurrence; an absent output gets the next number."""
    ren: dict = {}
    a = []
    for v in args:
        if v not in ren:
            ren[v] = len(ren)
        a.append(ren[v])
    o = ren.get(out, len(ren))
    return tuple(a), o


class Pattern:
    """A finite set of identities f(args) = out, each universally quantified on its own.

    Identities are stored canonically (variables renamed per identity, sorted,
    duplicate-free), so equality of patterns is syntactic.
    """

    __slots__ = ("arity", "identities")

    def __init__(self, identities: Iterable[tuple[Sequence[Hashable], Hashable]], arity: int | None = None):
        ids = {canonical_identity(a, o) for a, o in identities}
        if arity is None:
            if not ids:
                raise ValueError("arity required for an empty pattern")
            arity = len(next(iter(ids))[0])
        for a, _ in ids:
            if len(a) != arity:
                raise ValueError(f"identity of length {len(a)} in a pattern of arity {arity}")
        self.arity = arity
        self.identities = tuple(sorted(ids))

    @classmethod
    def parse(cls, text: str) -> "Pattern":
        """'xxy->y, yxx->y' style; one letter per variable."""
        ids = []
        for part in text.split(","):
            lhs, rhs = part.strip().split("->")
            ids.append((tuple(lhs.strip()), rhs.strip()))
        return cls(ids)

    def __len__(self) -> int:
        return len(self.identities)

    def __eq__(self, other) -> bool:
        return isinstance(other, Pattern) and self.arity == other.arity and self.identities == other.identities

    def __hash__(self) -> int:
        return hash((self.arity, self.identities))

    def __repr__(self) -> str:
        return f"Pattern({self.pretty()})"

    def pretty(self) -> str:
        if not self.identities:
            return f"<empty, arity {self.arity}>"
        return ", ".join("".join(_letter(v) for v in a) + "->" + _letter(o) for a, o in self.identities)

    def is_unrestricted(self, i: int) -> bool:
        a, o = self.identities[i]
        return o not in a

    def to_json(self) -> dict:
        return {"arity": self.arity,
                "identities": [{"args": [_letter(v) for v in a], "out": _letter(o)} for a, o in self.identities]}

    @classmethod
    def from_json(cls, obj) -> "Pattern":
        ids = []
        for k, ident in enumerate(obj["identities"]):
            if isinstance(ident, dict):
                if "args" not in ident or "out" not in ident:
                    raise ValueError(f"identity {k} needs 'args' and 'out'")
                ids.append((tuple(ident["args"]), ident["out"]))
            else:
                a, o = ident
                ids.append((tuple(a), o))
        return cls(ids, obj.get("arity"))


_LETTERS = "xyzuvwabcdefghijklmnopqrst"


def _letter(i: int) -> str:
    return _LETTERS[i] if i < len(_LETTERS) else f"v{i}"


@dataclass(frozen=True)
class MultisortedPattern:
    components: tuple[Pattern, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        ar = {c.arity for c in self.components}
        if len(ar) > 1:
            raise ValueError("components must share one arity")

    @property
    def sorts(self) -> int:
        return len(self.components)

    @property
    def arity(self) -> int:
        return self.components[0].arity

    def is_unit(self) -> bool:
        return all(len(c) == 1 for c in self.components)

    def to_json(self) -> dict:
        return {"sorts": self.sorts, "arity": self.arity, "components": [c.to_json() for c in self.components]}

    @classmethod
    def from_json(cls, obj) -> "MultisortedPattern":
        comps = tuple(Pattern.from_json(c) for c in obj["components"])
        if "sorts" in obj and obj["sorts"] != len(comps):
            raise ValueError("'sorts' disagrees with the number of components")
        return cls(comps)


def pattern_from_json(obj) -> "Pattern | MultisortedPattern":
    return MultisortedPattern.from_json(obj) if "components" in obj else Pattern.from_json(obj)


def per_sort(p: Pattern, r: int) -> MultisortedPattern:
    return MultisortedPattern((p,) * r)


# ---- partial functions ----

class PartialFn:
    __slots__ = ("domain", "arity", "table")

    def __init__(self, domain: Domain, arity: int, table: dict):
        self.domain = domain
        self.arity = arity
        self.table = dict(sorted(table.items()))

    def __call__(self, *args):
        return self.table.get(tuple(args))

    def defined(self, args) -> bool:
        return tuple(args) in self.table

    def __eq__(self, other) -> bool:
        return (isinstance(other, PartialFn) and self.domain == other.domain
                and self.arity == other.arity and self.table == other.table)

    def __hash__(self) -> int:
        return hash((self.arity, tuple(self.table.items())))

    def __repr__(self) -> str:
        return f"<PartialFn arity={self.arity} defined={len(self.table)}>"

    def apply(self, tuples: Sequence[Sequence[int]]) -> tuple[int, ...] | None:
        """Coordinatewise application to n tuples of equal length."""
        out = []
        for row in zip(*tuples):
            v = self.table.get(tuple(row))
            if v is None:
                return None
            out.append(v)
        return tuple(out)


@dataclass
class Interpretation:
    """Forced rows plus rows on which any single constant value may be chosen."""

    domain: Domain
    arity: int
    forced: dict
    free: frozenset
    consistent: bool = True
    _prefixes: set | None = field(default=None, repr=False)

    def rows(self) -> set:
        return set(self.forced) | set(self.free)

    def functions(self) -> list[PartialFn]:
        if not self.consistent:
            return []
        if not self.free:
            return [PartialFn(self.domain, self.arity, self.forced)]
        out = []
        for d in range(self.domain.size):
            t = dict(self.forced)
            for row in self.free:
                t[row] = d
            out.append(PartialFn(self.domain, self.arity, t))
        return out

    def prefixes(self) -> set:
        if self._prefixes is None:
            pre = set()
            for row in self.rows():
                for i in range(1, len(row) + 1):
                    pre.add(row[:i])
            self._prefixes = pre
        return self._prefixes


def interpretation(P: Pattern, D: Domain) -> Interpretation:
    forced: dict = {}
    free: set = set()
    ok = True
    n = D.size
    for args, out in P.identities:
        nv = max(max(args, default=-1), out) + 1
        restricted = out in args
        for alpha in itertools.product(range(n), repeat=nv):
            row = tuple(alpha[v] for v in args)
            if restricted:
                val = alpha[out]
                prev = forced.get(row)
                if prev is None:
                    forced[row] = val
                elif prev != val:
                    ok = False
            else:
                free.add(row)
    free -= set(forced)
    return Interpretation(D, P.arity, forced, frozenset(free), ok)


def interpret(P: Pattern, D: Domain) -> list[PartialFn]:
    """The functions I_D(P): one function, |D| functions when some identity leaves
    its output unconstrained (they differ only on those rows), or none if two
    identities force different values on one row."""
    return interpretation(P, D).functions()


def from_function(f: PartialFn) -> Interpretation:
    return Interpretation(f.domain, f.arity, dict(f.table), frozenset())


# ---- minors, powers, cubes ----

def minor(P: Pattern, h: Sequence[int], m: int | None = None) -> Pattern:
    """Variable identification minor P_{/h} for h: [n] -> [m] (0-based).

    An identity (t, x) contributes iff t is constant on the fibres of h; positions of
    [m] outside the image of h receive fresh variables.
    """
    if len(h) != P.arity:
        raise ValueError("h must be defined on every argument position")
    m = m if m is not None else (max(h) + 1 if h else 0)
    out = []
    for args, o in P.identities:
        s: list = [None] * m
        ok = True
        for j, v in enumerate(args):
            if s[h[j]] is None:
                s[h[j]] = v
            elif s[h[j]] != v:
                ok = False
                break
        if not ok:
            continue
        s = [("fresh", k) if v is None else v for k, v in enumerate(s)]
        out.append((tuple(s), o))
    return Pattern(out, m)


def multisorted_minor(P: MultisortedPattern, h: Sequence[int], m: int | None = None) -> MultisortedPattern:
    return MultisortedPattern(tuple(minor(c, h, m) for c in P.components))


def subpattern(P: Pattern, keep: Iterable[int]) -> Pattern:
    return Pattern([P.identities[i] for i in sorted(set(keep))], P.arity)


def substitute(P: Pattern, var_map: dict[int, int]) -> Pattern:
    """Apply a variable substitution inside every identity (canonical variable numbers)."""
    return Pattern([(tuple(var_map.get(v, v) for v in a), var_map.get(o, o)) for a, o in P.identities], P.arity)


def permute_arguments(P: Pattern, perm: Sequence[int]) -> Pattern:
    """New position j reads old position perm[j]."""
    return Pattern([(tuple(a[perm[j]] for j in range(P.arity)), o) for a, o in P.identities], P.arity)


def maltsev_pattern() -> Pattern:
    return Pattern([(("x", "x", "y"), "y"), (("y", "x", "x"), "y")])


def majority_pattern() -> Pattern:
    return Pattern([(("x", "x", "y"), "x"), (("x", "y", "x"), "x"), (("y", "x", "x"), "x")])


def nu_pattern(k: int) -> Pattern:
    """k-ary near-unanimity: the odd one out sits at position i."""
    return Pattern([(tuple("y" if j == i else "x" for j in range(k)), "x") for i in range(k)])


def projection_pattern(n: int, i: int) -> Pattern:
    return Pattern([(tuple(range(n)), i)])


def cube_identities(k: int) -> list[tuple[tuple[str, ...], str]]:
    """Identity i: position j (1-based) holds x when bit i of j is 1, else y; output y."""
    if k < 2:
        raise ValueError("need k >= 2")
    n = 2 ** k - 1
    return [(tuple("x" if (j >> i) & 1 else "y" for j in range(1, n + 1)), "y") for i in range(k)]


def cube_pattern(k: int) -> Pattern:
    return Pattern(cube_identities(k))


def power(P: Pattern, c: int) -> Pattern:
    """One identity per c-subset of P's identities (ascending order), over c-tuples of variables."""
    if not 1 <= c <= len(P.identities):
        raise ValueError(f"c must lie in 1..{len(P.identities)}")
    out = []
    for sub in itertools.combinations(P.identities, c):
        args = tuple(tuple(ident[0][j] for ident in sub) for j in range(P.arity))
        o = tuple(ident[1] for ident in sub)
        out.append((args, o))
    return Pattern(out, P.arity)


def power_function(f: PartialFn, c: int) -> PartialFn:
    """f applied coordinatewise to c-tuples, over the product domain with "a|b" names."""
    D = f.domain
    dom = D
    for _ in range(c - 1):
        dom = dom.product(D)
    n = D.size
    table = {}
    rows = list(f.table.items())
    for combo in itertools.product(rows, repeat=c):
        args = tuple(_encode(tuple(r[0][j] for r in combo), n) for j in range(f.arity))
        table[args] = _encode(tuple(r[1] for r in combo), n)
    return PartialFn(dom, f.arity, table)


def _encode(vals: Sequence[int], n: int) -> int:
    v = 0
    for x in vals:
        v = v * n + x
    return v


def _decode(v: int, n: int, c: int) -> tuple[int, ...]:
    out = []
    for _ in range(c):
        out.append(v % n)
        v //= n
    return tuple(reversed(out))


def power_domain(D: Domain, c: int) -> Domain:
    dom = D
    for _ in range(c - 1):
        dom = dom.product(D)
    return dom


# ---- preservation ----

@dataclass
class ViolationCertificate:
    """Argument rows from S, the resulting tuple, and the constants chosen on free rows."""

    args: list
    output: tuple
    free_choice: dict

    def to_json(self, domain: Domain) -> dict:
        return {
            "args": [[domain.name(v) for v in t] for t in self.args],
            "output": [domain.name(v) for v in self.output],
            "free_choice": {str(k): domain.name(v) for k, v in self.free_choice.items()},
        }

    @classmethod
    def from_json(cls, obj, domain: Domain) -> "ViolationCertificate":
        return cls([tuple(domain.index(v) for v in t) for t in obj["args"]],
                   tuple(domain.index(v) for v in obj["output"]),
                   {int(k): domain.index(v) for k, v in obj.get("free_choice", {}).items()})


@dataclass
class PreservationResult:
    status: bool | None
    certificate: ViolationCertificate | None = None
    nodes: int = 0

    def __bool__(self) -> bool:
        return bool(self.status)


def _as_interps(P, D: Domain, r: int) -> tuple[list[Interpretation], list[int]]:
    """Per-coordinate interpretation and sort label."""
    if isinstance(P, MultisortedPattern):
        if P.sorts != r:
            raise ValueError(f"pattern has {P.sorts} sorts, relation arity is {r}")
        ints = [interpretation(c, D) for c in P.components]
        return ints, list(range(r))
    if isinstance(P, Pattern):
        it = interpretation(P, D)
        return [it] * r, [0] * r
    if isinstance(P, PartialFn):
        it = from_function(P)
        return [it] * r, [0] * r
    if isinstance(P, Interpretation):
        return [P] * r, [0] * r
    raise TypeError(f"cannot test preservation for {type(P).__name__}")


def preserves(P, pair, cap: int = 5_000_000, enforce_caps: bool = True) -> PreservationResult:
    """Does every application of P (as partial function(s)) to rows of S land in T?

    Column-first search: argument tuples are chosen position by position and a
    partial choice is dropped once some coordinate row leaves the interpreted
    domain. Rows an unrestricted identity covers may take any value; each sort
    picks a single constant for all such rows. A bare relation R means (R, R).
    """
    pair = _target_pair(pair)
    D = pair.domain
    r = pair.arity
    interps, sorts = _as_interps(P, D, r)
    n = interps[0].arity
    if enforce_caps and (n > PRESERVE_ARITY_CAP or len(pair.s) > PRESERVE_SIZE_CAP):
        return PreservationResult(None)
    if any(not it.consistent for it in interps):
        return PreservationResult(True)
    s_rows = pair.s.sorted()
    target = pair.t.tuples
    prefixes = [it.prefixes() for it in interps]
    nsorts = max(sorts) + 1
    nodes = 0

    def check(chosen):
        vals = []
        free_sorts = set()
        for i in range(r):
            row = tuple(t[i] for t in chosen)
            v = interps[i].forced.get(row)
            if v is None:
                free_sorts.add(sorts[i])
            vals.append(v)
        fs = sorted(free_sorts)
        for combo in itertools.product(range(D.size), repeat=len(fs)):
            pick = dict(zip(fs, combo))
            out = tuple(v if v is not None else pick[sorts[i]] for i, v in enumerate(vals))
            if out not in target:
                return out, pick
        return None

    chosen: list = []
    rows = [()] * r

    def rec(depth):
        nonlocal nodes
        if depth == n:
            res = check(chosen)
            return None if res is None else (res[0], res[1], list(chosen))
        for t in s_rows:
            nodes += 1
            if nodes > cap:
                raise _Cap()
            new_rows = []
            ok = True
            for i in range(r):
                nr = rows[i] + (t[i],)
                if nr not in prefixes[i]:
                    ok = False
                    break
                new_rows.append(nr)
            if not ok:
                continue
            saved = rows[:]
            rows[:] = new_rows
            chosen.append(t)
            res = rec(depth + 1)
            chosen.pop()
            rows[:] = saved
            if res is not None:
                return res
        return None

    try:
        res = rec(0)
    except _Cap:
        return PreservationResult(None, None, nodes)
    if res is None:
        return PreservationResult(True, None, nodes)
    out, pick, args = res
    return PreservationResult(False, ViolationCertificate(args, out, pick), nodes)


class _Cap(Exception):
    pass


def _target_pair(obj) -> RelationPair:
    if isinstance(obj, Relation):
        return RelationPair(obj, obj)
    return as_pair(obj)


def verify_violation(P, pair, cert: ViolationCertificate) -> bool:
    """Recompute the application without search."""
    pair = _target_pair(pair)
    D = pair.domain
    r = pair.arity
    interps, sorts = _as_interps(P, D, r)
    if any(t not in pair.s.tuples for t in cert.args):
        return False
    out = []
    for i in range(r):
        row = tuple(t[i] for t in cert.args)
        it = interps[i]
        if row in it.forced:
            out.append(it.forced[row])
        elif row in it.free:
            if sorts[i] not in cert.free_choice:
                return False
            out.append(cert.free_choice[sorts[i]])
        else:
            return False
    return tuple(out) == tuple(cert.output) and tuple(out) not in pair.t.tuples


def export_cnf_violation(P: Pattern, pair) -> tuple[str, dict]:
    """DIMACS CNF satisfiable iff some application of the unique interpretation of P
    to rows of S is defined and lands outside T.

    Variables: c[j][s] picks tuple s of S at argument position j; for every
    coordinate i and domain row, a row variable is forced true by the choices;
    rows outside the interpretation's domain are forbidden and the output tuple
    must avoid T. Returns the CNF text and a variable map for decoding.
    """
    pair = _target_pair(pair)
    D = pair.domain
    r = pair.arity
    interps, _ = _as_interps(P, D, r)
    it = interps[0]
    if it.free:
        raise ValueError("pattern must have a unique interpretation")
    n = it.arity
    s_rows = pair.s.sorted()
    clauses: list[list[int]] = []
    nv = 0

    def new():
        nonlocal nv
        nv += 1
        return nv

    if not s_rows:
        a = new()
        clauses.append([a])
        clauses.append([-a])
        return _dimacs(nv, clauses), {"choice": [], "rows": s_rows}
    choice = [[new() for _ in s_rows] for _ in range(n)]
    for j in range(n):
        clauses.append(list(choice[j]))
        for a, b in itertools.combinations(choice[j], 2):
            clauses.append([-a, -b])
    # y[i][j][d]: coordinate i of the tuple chosen at position j equals d
    y = [[[new() for _ in range(D.size)] for _ in range(n)] for _ in range(r)]
    for i in range(r):
        for j in range(n):
            for si, s in enumerate(s_rows):
                clauses.append([-choice[j][si], y[i][j][s[i]]])
            for d in range(D.size):
                # y true only if some chosen tuple supports it
                sup = [choice[j][si] for si, s in enumerate(s_rows) if s[i] == d]
                clauses.append([-y[i][j][d]] + sup)
    # output value variables per coordinate
    o = [[new() for _ in range(D.size)] for _ in range(r)]
    allrows = list(itertools.product(range(D.size), repeat=n))
    for i in range(r):
        for row in allrows:
            lits = [-y[i][j][row[j]] for j in range(n)]
            if row in it.forced:
                clauses.append(lits + [o[i][it.forced[row]]])
            else:
                clauses.append(lits)
    for t in pair.t.tuples:
        clauses.append([-o[i][t[i]] for i in range(r)])
    for i in range(r):
        for a, b in itertools.combinations(o[i], 2):
            clauses.append([-a, -b])
    return _dimacs(nv, clauses), {"choice": choice, "rows": s_rows, "out": o}


def _dimacs(nv: int, clauses: list[list[int]]) -> str:
    lines = [f"p cnf {nv} {len(clauses)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in clauses]
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> tuple[int, list[list[int]]]:
    nv = 0
    clauses = []
    cur: list[int] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) < 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line: {line!r}")
            nv = int(parts[2])
            continue
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(cur)
    return nv, clauses


def cnf_model_from_certificate(varmap: dict, cert_args: Sequence[Sequence[int]], pair, P: Pattern) -> set[int]:
    """Decode a known violating application into a satisfying set of true variables."""
    pair = _target_pair(pair)
    it = interpretation(P, pair.domain)
    rows = varmap["rows"]
    true = set()
    for j, t in enumerate(cert_args):
        true.add(varmap["choice"][j][rows.index(tuple(t))])
    n = len(cert_args)
    nvars_y_start = varmap["choice"][-1][-1] + 1
    r = pair.arity
    D = pair.domain.size
    for i in range(r):
        for j in range(n):
            true.add(nvars_y_start + (i * n + j) * D + cert_args[j][i])
    for i in range(r):
        row = tuple(t[i] for t in cert_args)
        true.add(varmap["out"][i][it.forced[row]])
    return true


def cnf_satisfied(clauses: list[list[int]], true: set[int]) -> bool:
    return all(any((l > 0) == (abs(l) in true) for l in c) for c in clauses)


def cube_power_lower_bound(R, k: int, c: int, cap: int = 5_000_000) -> dict:
    """If u_k^c fails to preserve R (target R, or T~ for a pair), NRD grows like n^(k/c)."""
    if not k > c >= 1:
        raise ValueError("need k > c >= 1")
    pair = as_pair(R)
    tp = RelationPair(pair.s, complement_tilde(pair))
    res = preserves(power(cube_pattern(k), c), tp, cap=cap, enforce_caps=False)
    if res.status is None:
        return {"status": "unknown", "k": k, "c": c}
    if res.status:
        return {"status": "preserved", "k": k, "c": c}
    return {"status": "violated", "k": k, "c": c, "exponent": k / c, "certificate": res.certificate}


# ---- fgppp instance transformations ----

class DefinitionMismatch(ValueError):
    """Supplied definition data does not define the pair it claims to."""


@dataclass
class TransformResult:
    instance: Instance
    witnesses: list
    dropped: int = 0
    notes: dict = field(default_factory=dict)


def _tilde(pair: RelationPair) -> frozenset:
    return complement_tilde(pair).tuples


def strict_relax(inst: Instance, pair1: RelationPair, pair2: RelationPair, witnesses) -> TransformResult:
    """S1 within S2 and T~2 within T~1: the same instance and witnesses work for pair2."""
    if pair1.domain != pair2.domain or pair1.arity != pair2.arity:
        raise DefinitionMismatch("strict relaxation needs equal domain and arity")
    if not pair1.s.tuples <= pair2.s.tuples:
        raise DefinitionMismatch("S1 is not contained in S2")
    if not _tilde(pair2) <= _tilde(pair1):
        raise DefinitionMismatch("T~2 is not contained in T~1")
    return TransformResult(inst, list(witnesses))


def equality_elim(inst: Instance, pair1: RelationPair, pair2: RelationPair, i: int, j: int, witnesses) -> TransformResult:
    """S1 = S2 and x_i = x_j (same for T~): drop the clauses whose witness separates y_i, y_j."""
    if pair1.domain != pair2.domain or pair1.arity != pair2.arity or i == j:
        raise DefinitionMismatch("equality elimination needs equal domain/arity and i != j")
    full = itertools.product(range(pair1.domain.size), repeat=pair1.arity)
    t1, t2 = _tilde(pair1), _tilde(pair2)
    for t in full:
        eq = t[i] == t[j]
        if (t in pair1.s.tuples) != (t in pair2.s.tuples and eq):
            raise DefinitionMismatch(f"S equivalence fails at {t}")
        if (t in t1) != (t in t2 and eq):
            raise DefinitionMismatch(f"T~ equivalence fails at {t}")
    keep, wits = [], []
    for c, w in zip(inst.clauses, witnesses):
        if w[c[i]] == w[c[j]]:
            keep.append(c)
            wits.append(w)
    dropped = len(inst.clauses) - len(keep)
    if dropped > max(inst.n - 1, 0):
        raise AssertionError("more than n-1 clauses separated by their witnesses")
    return TransformResult(inst.with_clauses(keep), wits, dropped)


def conjunction_split(inst: Instance, pair1: RelationPair, pair2: RelationPair,
                      f: Sequence[int], g: Sequence[int], witnesses) -> TransformResult:
    """S1(x) = S2(x o g) and S2(x o f) (same for T~): keep, per clause, the half its witness breaks."""
    r1, r2 = pair1.arity, pair2.arity
    if pair1.domain != pair2.domain or len(f) != r2 or len(g) != r2:
        raise DefinitionMismatch("conjunction needs a shared domain and maps [r2] -> [r1]")
    t1, t2 = _tilde(pair1), _tilde(pair2)
    for t in itertools.product(range(pair1.domain.size), repeat=r1):
        a = tuple(t[k] for k in g)
        b = tuple(t[k] for k in f)
        if (t in pair1.s.tuples) != (a in pair2.s.tuples and b in pair2.s.tuples):
            raise DefinitionMismatch(f"S equivalence fails at {t}")
        if (t in t1) != (a in t2 and b in t2):
            raise DefinitionMismatch(f"T~ equivalence fails at {t}")
    gap2 = pair2.gap()
    out, wits = [], []
    for c, w in zip(inst.clauses, witnesses):
        cands = [tuple(c[k] for k in g), tuple(c[k] for k in f)]
        rep = next((y for y in cands if tuple(w[v] for v in y) in gap2), None)
        if rep is None:
            raise AssertionError("witness breaks neither half of the conjunction")
        out.append(rep)
        wits.append(w)
    if len(set(out)) != len(out):
        raise AssertionError("representatives collide")
    part = None
    return TransformResult(Instance(inst.variables, tuple(out), part), wits)


def functional_guard_lift(inst: Instance, pair1: RelationPair, pair2: RelationPair,
                          h: Sequence[Sequence[int]], guards: Sequence[dict], c: int, witnesses) -> TransformResult:
    """S1(x) = S2(g_1(x_h(1,.)), ..., g_r2(x_h(r2,.))) (same for T~).

    X+ = X^c x [r2] with r2 * n^c variables; psi+((x, i)) = g_i(psi(x)).
    """
    r1, r2 = pair1.arity, pair2.arity
    if len(h) != r2 or any(len(row) != c for row in h) or len(guards) != r2:
        raise DefinitionMismatch("h must map [r2] x [c] into [r1] and there must be r2 guards")
    t1, t2 = _tilde(pair1), _tilde(pair2)
    for t in itertools.product(range(pair1.domain.size), repeat=r1):
        img = tuple(guards[j][tuple(t[k] for k in h[j])] for j in range(r2))
        if (t in pair1.s.tuples) != (img in pair2.s.tuples):
            raise DefinitionMismatch(f"S equivalence fails at {t}")
        if (t in t1) != (img in t2):
            raise DefinitionMismatch(f"T~ equivalence fails at {t}")
    n = inst.n
    combos = list(itertools.product(range(n), repeat=c))
    cix = {x: i for i, x in enumerate(combos)}
    names = tuple("(" + ",".join(inst.variables[v] for v in x) + f"|{j + 1})" for j in range(r2) for x in combos)
    clauses = []
    for y in inst.clauses:
        clauses.append(tuple(j * len(combos) + cix[tuple(y[k] for k in h[j])] for j in range(r2)))
    wits = []
    for w in witnesses:
        wits.append(tuple(guards[j][tuple(w[v] for v in x)] for j in range(r2) for x in combos))
    new = Instance(names, tuple(clauses))
    return TransformResult(new, wits, notes={"variables": len(names), "expected": r2 * n ** c})


def existential_projection(inst: Instance, pair1: RelationPair, pair2: RelationPair,
                           positions: Sequence[int], witnesses) -> TransformResult:
    """Project clauses onto `positions` when proj(S1) lies in S2 and proj(T1 minus S1) in T2 minus S2.

    Requires the projection to be injective on the clause set (a linear hypergraph
    projects to as many edges as it has).
    """
    if pair1.domain != pair2.domain or len(positions) != pair2.arity:
        raise DefinitionMismatch("projection needs a shared domain and arity matching the positions")
    proj = lambda t: tuple(t[k] for k in positions)
    if not {proj(t) for t in pair1.s.tuples} <= pair2.s.tuples:
        raise DefinitionMismatch("projection of S1 leaves S2")
    if not {proj(t) for t in pair1.gap()} <= pair2.gap():
        raise DefinitionMismatch("projection of T1 minus S1 leaves T2 minus S2")
    out = [proj(c) for c in inst.clauses]
    if len(set(out)) != len(out):
        raise AssertionError("projection identifies two clauses")
    part = None
    if inst.partition is not None:
        part = tuple(inst.partition[k] for k in positions)
    return TransformResult(Instance(inst.variables, tuple(out), part), list(witnesses))


# ---- redundancy through pattern application ----

def _match_identity(args, out, row):
    """Assignment of pattern variables to instance variables realising row, or None."""
    alpha = {}
    for v, x in zip(args, row):
        if alpha.setdefault(v, x) != x:
            return None
    return alpha


def pattern_witness_redundancy(inst: Instance, P: MultisortedPattern, cap: int = 1_000_000):
    """Clauses y1..yn, y with (p_1..p_r)(y1..yn) = y and y not among the inputs.

    Returns (input clause indices, output clause index) or None; the caller is
    responsible for P preserving (R, T~).
    """
    r = P.sorts
    n = P.arity
    clauses = inst.clauses
    nodes = 0
    for seq in itertools.product(range(len(clauses)), repeat=n):
        nodes += 1
        if nodes > cap:
            return "unknown"
        options = []
        for i in range(r):
            row = tuple(clauses[k][i] for k in seq)
            vals = set()
            anyval = False
            for args, out in P.components[i].identities:
                alpha = _match_identity(args, out, row)
                if alpha is None:
                    continue
                if out in alpha:
                    vals.add(alpha[out])
                else:
                    anyval = True
            if not vals:
                if not anyval:
                    break
                vals = None
            options.append(vals)
        else:
            if any(o is not None and len(o) > 1 for o in options):
                raise ValueError("pattern forces two values on one row")
            fixed = [None if o is None else next(iter(o)) for o in options]
            used = set(seq)
            for k, c in enumerate(clauses):
                if k in used:
                    continue
                if all(f is None or f == c[i] for i, f in enumerate(fixed)):
                    return list(seq), k
    return None
