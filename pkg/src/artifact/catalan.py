"""Catalan terms built from a Mal'tsev term, Coxeter words, and exclusion certificates."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from .groups import FiniteGroup, group_by_name
from .relations import Domain, Relation
from .patterns import Pattern


class NotMaltsev(ValueError):
    pass


class MaltsevTerm:
    """Total ternary operation with phi(x,x,y) = phi(y,x,x) = y."""

    __slots__ = ("domain", "table", "name")

    def __init__(self, domain: Domain, table: Sequence[int], name: str = "phi"):
        n = domain.size
        if len(table) != n ** 3:
            raise ValueError(f"table must have {n ** 3} entries")
        self.domain = domain
        self.table = tuple(table)
        self.name = name
        for x, y in itertools.product(range(n), repeat=2):
            if self(x, x, y) != y:
                raise NotMaltsev(f"phi({x},{x},{y}) = {self(x, x, y)}, expected {y}")
            if self(y, x, x) != y:
                raise NotMaltsev(f"phi({y},{x},{x}) = {self(y, x, x)}, expected {y}")

    def __call__(self, a: int, b: int, c: int) -> int:
        n = self.domain.size
        return self.table[(a * n + b) * n + c]

    @classmethod
    def from_function(cls, domain: Domain, fn, name: str = "phi") -> "MaltsevTerm":
        n = domain.size
        return cls(domain, [fn(a, b, c) for a, b, c in itertools.product(range(n), repeat=3)], name)

    @classmethod
    def group_term(cls, group: FiniteGroup) -> "MaltsevTerm":
        """x * y^-1 * z."""
        dom = Domain(group.names)
        return cls.from_function(dom, lambda a, b, c: group.mul(group.mul(a, group.inv(b)), c), f"group:{group.name}")

    @classmethod
    def random(cls, n: int, rng: random.Random) -> "MaltsevTerm":
        """Uniform over tables constrained only by the Mal'tsev identities."""
        table = []
        for a, b, c in itertools.product(range(n), repeat=3):
            if a == b:
                table.append(c)
            elif b == c:
                table.append(a)
            else:
                table.append(rng.randrange(n))
        return cls(Domain.range(n), table, "random")

    def to_json(self) -> dict:
        return {"domain": list(self.domain.elements), "table": list(self.table), "name": self.name}

    @classmethod
    def from_json(cls, obj) -> "MaltsevTerm":
        return cls(Domain(obj["domain"]), obj["table"], obj.get("name", "phi"))


def maltsev_by_name(spec: str, seed: int = 0) -> MaltsevTerm:
    """'group:Z3', 'group:S3', or 'random:3' (seeded)."""
    kind, _, arg = spec.partition(":")
    if kind == "group":
        return MaltsevTerm.group_term(group_by_name(arg))
    if kind == "random":
        return MaltsevTerm.random(int(arg), random.Random(seed))
    raise ValueError(f"unknown Mal'tsev term {spec!r}")


class CatalanFamily:
    """Tables of f_1, f_3, ..., f_m_max over D^m, built level by level.

    f_m = f_{m-2}(g_2, ..., g_{m-1}) with
    g_j = phi(f_{j-1}(x_1..x_{j-1}), x_j, f_{m-j}(x_{j+1}..x_m)) for even j and
    g_j = phi(f_j(x_1..x_j), x_j, f_{m+1-j}(x_j..x_m)) for odd j.
    """

    def __init__(self, source: MaltsevTerm, m_max: int = 7):
        if m_max < 1 or m_max % 2 == 0:
            raise ValueError("m_max must be odd and positive")
        self.source = source
        self.n = source.domain.size
        self.tables: dict[int, list[int]] = {1: list(range(self.n))}
        self.m_max = 1
        self.extend(m_max)

    def extend(self, m_max: int) -> None:
        while self.m_max < m_max:
            self._build(self.m_max + 2)
            self.m_max += 2

    def _build(self, m: int) -> None:
        n = self.n
        phi = self.source
        tabs = self.tables
        lower = tabs[m - 2]
        out = [0] * (n ** m)
        pw = [n ** e for e in range(m + 1)]
        for idx, x in enumerate(itertools.product(range(n), repeat=m)):
            # idx of the slice x[a:b] (0-based, b exclusive)
            def sl(a, b):
                return (idx // pw[m - b]) % pw[b - a]

            acc = 0
            for j in range(2, m):  # 1-based j
                if j % 2 == 0:
                    left = tabs[j - 1][sl(0, j - 1)]
                    right = tabs[m - j][sl(j, m)]
                else:
                    left = tabs[j][sl(0, j)]
                    right = tabs[m + 1 - j][sl(j - 1, m)]
                acc = acc * n + phi(left, x[j - 1], right)
            out[idx] = lower[acc]
        tabs[m] = out

    def index(self, args: Sequence[int]) -> int:
        v = 0
        for a in args:
            v = v * self.n + a
        return v

    def __call__(self, *args: int) -> int:
        return catalan_eval(self, len(args), args)


def catalan_eval(fam: CatalanFamily, m: int, args: Sequence[int]) -> int:
    if m % 2 == 0 or m < 1:
        raise ValueError("m must be odd and positive")
    if m > fam.m_max:
        raise ValueError(f"m={m} exceeds the materialized bound {fam.m_max}")
    if len(args) != m:
        raise ValueError(f"expected {m} arguments, got {len(args)}")
    return fam.tables[m][fam.index(args)]


@dataclass
class CatalanReport:
    m_max: int
    checked: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"m_max": self.m_max, "checked": self.checked, "ok": self.ok,
                "violations": [{"m": m, "i": i + 1, "args": list(a), "lhs": l, "rhs": r}
                               for m, i, a, l, r in self.violations]}


def verify_catalan(fam: CatalanFamily, m_max: int | None = None, limit: int = 20) -> CatalanReport:
    """x_i = x_{i+1} implies f_m(x) = f_{m-2}(x without positions i, i+1), exhaustively."""
    m_max = fam.m_max if m_max is None else m_max
    fam.extend(m_max)
    n = fam.n
    checked = 0
    bad = []
    for m in range(3, m_max + 1, 2):
        for i in range(m - 1):
            for rest in itertools.product(range(n), repeat=m - 1):
                x = rest[:i] + (rest[i],) + rest[i:]
                lhs = fam.tables[m][fam.index(x)]
                rhs = fam.tables[m - 2][fam.index(x[:i] + x[i + 2:])]
                checked += 1
                if lhs != rhs and len(bad) < limit:
                    bad.append((m, i, x, lhs, rhs))
    return CatalanReport(m_max, checked, bad)


# ---- Coxeter words ----

def coxeter_reduce(word: Sequence[Hashable]):
    """Cancel adjacent equal letters until none remain (free product of involutions)."""
    out, _ = coxeter_reduce_trace(word)
    if isinstance(word, str):
        return "".join(out)
    return tuple(out)


def coxeter_reduce_trace(word: Sequence[Hashable]) -> tuple[list, list[tuple[int, int]]]:
    """Reduced word and the cancelled position pairs (0-based, in cancellation order)."""
    stack: list[tuple[Hashable, int]] = []
    trace = []
    for i, a in enumerate(word):
        if stack and stack[-1][0] == a:
            trace.append((stack.pop()[1], i))
        else:
            stack.append((a, i))
    return [a for a, _ in stack], trace


def replay_trace(word: Sequence[Hashable], trace: Sequence[Sequence[int]]) -> list | None:
    """Apply a cancellation schedule; None if a step cancels non-adjacent or unequal letters."""
    alive = list(range(len(word)))
    for a, b in trace:
        if a not in alive or b not in alive:
            return None
        k = alive.index(a)
        if k + 1 >= len(alive) or alive[k + 1] != b or word[a] != word[b]:
            return None
        del alive[k:k + 2]
    return [word[i] for i in alive]


def cat_pattern_check(m: int, rows: Sequence[Sequence[Hashable]], outputs: Sequence[Hashable]) -> bool:
    """Every row of length m reduces in Cox to exactly its recorded output letter."""
    if len(rows) != len(outputs):
        raise ValueError("one output per row")
    for row, y in zip(rows, outputs):
        if len(row) != m:
            return False
        red = coxeter_reduce(tuple(row))
        if red != (y,):
            return False
    return True


def cat_pattern(m: int, letters: int) -> Pattern:
    """Identities of arity m over `letters` variables whose Cox product is one letter."""
    ids = []
    for row in itertools.product(range(letters), repeat=m):
        red = coxeter_reduce(row)
        if len(red) == 1:
            ids.append((row, red[0]))
    return Pattern(ids, m)


def bal_pattern(m: int) -> Pattern:
    """Identities over {x=0, y=1} whose alternating sum is 0 or 1, output that letter."""
    ids = []
    for row in itertools.product((0, 1), repeat=m):
        s = sum(v if i % 2 == 0 else -v for i, v in enumerate(row))
        if s in (0, 1):
            ids.append((row, s))
    return Pattern(ids, m)


# ---- exclusion certificates ----

@dataclass
class ExclusionCertificate:
    relation: str
    m: int
    columns: list  # m tuples of R, in application order
    traces: list  # per coordinate row, cancelled position pairs
    output: tuple

    def rows(self) -> list[tuple[int, ...]]:
        r = len(self.output)
        return [tuple(c[i] for c in self.columns) for i in range(r)]

    def to_json(self, domain: Domain) -> dict:
        return {
            "relation": self.relation,
            "m": self.m,
            "matrix": [[domain.name(v) for v in row] for row in self.rows()],
            "schedules": [[[a + 1, b + 1] for a, b in t] for t in self.traces],
            "output": [domain.name(v) for v in self.output],
        }

    @classmethod
    def from_json(cls, obj, domain: Domain) -> "ExclusionCertificate":
        rows = [[domain.index(v) for v in row] for row in obj["matrix"]]
        m = obj["m"]
        if any(len(r) != m for r in rows):
            raise ValueError("matrix rows must have length m")
        cols = [tuple(r[j] for r in rows) for j in range(m)]
        traces = [[(a - 1, b - 1) for a, b in t] for t in obj.get("schedules", [])]
        return cls(obj.get("relation", "R"), m, cols, traces, tuple(domain.index(v) for v in obj["output"]))


def verify_exclusion(R: Relation, cert: ExclusionCertificate) -> bool:
    """Columns lie in R, each row cancels (per its schedule, if given) to the output letter, output not in R."""
    if len(cert.columns) != cert.m or cert.m % 2 == 0:
        return False
    if any(tuple(c) not in R.tuples for c in cert.columns):
        return False
    if len(cert.output) != R.arity or tuple(cert.output) in R.tuples:
        return False
    for i, row in enumerate(cert.rows()):
        if coxeter_reduce(row) != (cert.output[i],):
            return False
        if cert.traces:
            left = replay_trace(row, cert.traces[i])
            if left != [cert.output[i]]:
                return False
    return True


def _certificate(R: Relation, cols: Sequence[tuple[int, ...]]) -> ExclusionCertificate:
    rows = [tuple(c[i] for c in cols) for i in range(R.arity)]
    out, traces = [], []
    for row in rows:
        red, tr = coxeter_reduce_trace(row)
        out.append(red[0])
        traces.append(tr)
    return ExclusionCertificate(R.name, len(cols), list(cols), traces, tuple(out))


@dataclass
class ExclusionResult:
    certificate: ExclusionCertificate | None
    m_max: int
    complete: bool  # False when the node cap cut the search
    nodes: int = 0

    @property
    def status(self) -> str:
        if self.certificate is not None:
            return "excluded"
        return "none-found" if self.complete else "unknown"


def exclusion_search(R: Relation, m_max: int = 7, cap: int = 5_000_000, m_min: int = 1) -> ExclusionResult:
    """Smallest odd m, then lexicographically first column sequence over sorted R,
    whose coordinate rows all reduce to one letter giving a tuple outside R.

    Partial sequences are dropped once a row's reduced word is longer than the
    remaining columns allow, and (depth, reduced rows) states already known to
    fail are skipped.
    """
    if m_max % 2 == 0:
        raise ValueError("m_max must be odd")
    cols = R.sorted()
    r = R.arity
    nodes = 0
    for m in range(max(1, m_min | 1), m_max + 1, 2):
        dead: set = set()
        seq: list = []

        def rec(stacks):
            nonlocal nodes
            depth = len(seq)
            if depth == m:
                out = tuple(s[0] for s in stacks)
                return out not in R.tuples
            key = (depth, stacks)
            if key in dead:
                return False
            remaining = m - depth - 1
            for c in cols:
                nodes += 1
                if nodes > cap:
                    raise _Cap()
                new = []
                ok = True
                for i in range(r):
                    s = stacks[i]
                    s = s[:-1] if s and s[-1] == c[i] else s + (c[i],)
                    if len(s) > remaining + 1:
                        ok = False
                        break
                    new.append(s)
                if not ok:
                    continue
                seq.append(c)
                if rec(tuple(new)):
                    return True
                seq.pop()
            dead.add(key)
            return False

        try:
            found = rec(tuple(() for _ in range(r)))
        except _Cap:
            return ExclusionResult(None, m, False, nodes)
        if found:
            return ExclusionResult(_certificate(R, seq), m, True, nodes)
    return ExclusionResult(None, m_max, True, nodes)


class _Cap(Exception):
    pass


def build_cyc_exclusion(m: int) -> ExclusionCertificate:
    """Column i (1-based) is (-j, -j+1, 2j-1) for i = 2j+1 and (j, j, -2j) for i = 2j, mod m."""
    if m < 3 or m % 2 == 0:
        raise ValueError("need odd m >= 3")
    from .zoo import build_cyc
    _, star = build_cyc(m)
    cols = []
    for i in range(1, 2 * m):
        if i % 2 == 1:
            j = (i - 1) // 2
            cols.append(((-j) % m, (-j + 1) % m, (2 * j - 1) % m))
        else:
            j = i // 2
            cols.append((j % m, j % m, (-2 * j) % m))
    return _certificate(star, cols)
