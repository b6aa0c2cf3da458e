"""Finite domains, relations, relation pairs and CSP instances."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence


class ParseError(ValueError):
    """Malformed relation or instance data; the message names the offending field."""


class Domain:
    """Ordered set of named elements, indexed densely from 0."""

    __slots__ = ("elements", "_index")

    def __init__(self, elements: Iterable[str]):
        elems = tuple(str(e) for e in elements)
        index = {}
        for i, e in enumerate(elems):
            if e in index:
                raise ValueError(f"duplicate domain element {e!r}")
            index[e] = i
        self.elements = elems
        self._index = index

    @classmethod
    def range(cls, n: int) -> "Domain":
        return cls(str(i) for i in range(n))

    @property
    def size(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def index(self, name: str) -> int:
        try:
            return self._index[str(name)]
        except KeyError:
            raise KeyError(f"unknown domain element {name!r}") from None

    def name(self, i: int) -> str:
        return self.elements[i]

    def __contains__(self, name) -> bool:
        return str(name) in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Domain) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        return f"Domain({list(self.elements)!r})"

    def product(self, other: "Domain") -> "Domain":
        return Domain(f"{a}|{b}" for a in self.elements for b in other.elements)


Tuple = tuple


class Relation:
    """A set of r-tuples of domain indices."""

    __slots__ = ("domain", "arity", "tuples", "name")

    def __init__(self, domain: Domain, arity: int, tuples: Iterable[Sequence[int]], name: str = ""):
        if arity < 1:
            raise ValueError("arity must be positive")
        ts = set()
        n = domain.size
        for t in tuples:
            t = tuple(int(v) for v in t)
            if len(t) != arity:
                raise ValueError(f"tuple {t} has length {len(t)}, expected {arity}")
            for v in t:
                if not 0 <= v < n:
                    raise ValueError(f"tuple {t} has entry outside domain of size {n}")
            ts.add(t)
        self.domain = domain
        self.arity = arity
        self.tuples = frozenset(ts)
        self.name = name

    @classmethod
    def from_names(cls, domain: Domain, tuples: Iterable[Sequence[str]], arity: int | None = None, name: str = "") -> "Relation":
        rows = [tuple(domain.index(v) for v in t) for t in tuples]
        if arity is None:
            if not rows:
                raise ValueError("arity required for an empty relation")
            arity = len(rows[0])
        return cls(domain, arity, rows, name)

    @classmethod
    def full(cls, domain: Domain, arity: int, name: str = "") -> "Relation":
        return cls(domain, arity, itertools.product(range(domain.size), repeat=arity), name)

    def __len__(self) -> int:
        return len(self.tuples)

    def __contains__(self, t) -> bool:
        return tuple(t) in self.tuples

    def __iter__(self):
        return iter(self.sorted())

    def sorted(self) -> list[tuple[int, ...]]:
        return sorted(self.tuples)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Relation) and self.domain == other.domain
                and self.arity == other.arity and self.tuples == other.tuples)

    def __hash__(self) -> int:
        return hash((self.domain, self.arity, self.tuples))

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<Relation{label} arity={self.arity} |D|={self.domain.size} tuples={len(self.tuples)}>"

    def names(self, t: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.domain.name(v) for v in t)

    def named_tuples(self) -> list[tuple[str, ...]]:
        return [self.names(t) for t in self.sorted()]

    def with_tuples(self, tuples: Iterable[Sequence[int]], name: str = "") -> "Relation":
        return Relation(self.domain, self.arity, tuples, name)

    def issubset(self, other: "Relation") -> bool:
        return self.tuples <= other.tuples

    def project(self, positions: Sequence[int]) -> "Relation":
        return Relation(self.domain, len(positions), {tuple(t[i] for i in positions) for t in self.tuples})

    def rename(self, domain: Domain, mapping: dict[int, int]) -> "Relation":
        return Relation(domain, self.arity, (tuple(mapping[v] for v in t) for t in self.tuples), self.name)


@dataclass(frozen=True)
class RelationPair:
    """Promise pair (S, T) with S a subset of T, over a common domain."""

    s: Relation
    t: Relation

    def __post_init__(self):
        if self.s.domain != self.t.domain or self.s.arity != self.t.arity:
            raise ValueError("pair components must share domain and arity")
        if not self.s.tuples <= self.t.tuples:
            raise ValueError("S must be contained in T")

    @classmethod
    def plain(cls, r: Relation) -> "RelationPair":
        """(R, D^r): the pair used for ordinary non-redundancy."""
        return cls(r, Relation.full(r.domain, r.arity))

    @property
    def domain(self) -> Domain:
        return self.s.domain

    @property
    def arity(self) -> int:
        return self.s.arity

    def gap(self) -> frozenset:
        """T minus S."""
        return self.t.tuples - self.s.tuples


def complement_tilde(pair: RelationPair) -> Relation:
    """D^r minus (T minus S)."""
    full = Relation.full(pair.domain, pair.arity)
    return full.with_tuples(full.tuples - pair.gap())


def tilde_pair(pair: RelationPair) -> RelationPair:
    """(S, D^r minus (T minus S)), the pair that patterns are tested against."""
    return RelationPair(pair.s, complement_tilde(pair))


def as_pair(obj) -> RelationPair:
    if isinstance(obj, RelationPair):
        return obj
    if isinstance(obj, Relation):
        return RelationPair.plain(obj)
    if isinstance(obj, tuple) and len(obj) == 2:
        return RelationPair(*obj)
    raise TypeError(f"cannot interpret {type(obj).__name__} as a relation pair")


def tensor(pair1: RelationPair, pair2: RelationPair) -> RelationPair:
    if pair1.arity != pair2.arity:
        raise ValueError(f"arity mismatch: {pair1.arity} vs {pair2.arity}")
    d1, d2 = pair1.domain, pair2.domain
    dom = d1.product(d2)
    m = d2.size

    def prod(a: Relation, b: Relation) -> Relation:
        return Relation(dom, a.arity,
                        (tuple(x * m + y for x, y in zip(s, t)) for s in a.tuples for t in b.tuples))

    return RelationPair(prod(pair1.s, pair2.s), prod(pair1.t, pair2.t))


@dataclass(frozen=True)
class Instance:
    """Variables, an optional r-partition, and an ordered duplicate-free clause list."""

    variables: tuple[str, ...]
    clauses: tuple[tuple[int, ...], ...]
    partition: tuple[tuple[int, ...], ...] | None = None
    _index: dict = field(default=None, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        if self.partition is not None:
            object.__setattr__(self, "partition", tuple(tuple(b) for b in self.partition))
        idx = {}
        for i, v in enumerate(self.variables):
            if v in idx:
                raise ValueError(f"duplicate variable {v!r}")
            idx[v] = i
        object.__setattr__(self, "_index", idx)
        n = len(self.variables)
        seen = set()
        arity = None
        for k, c in enumerate(self.clauses):
            if arity is None:
                arity = len(c)
            elif len(c) != arity:
                raise ValueError(f"clause {k} has arity {len(c)}, expected {arity}")
            if any(not 0 <= v < n for v in c):
                raise ValueError(f"clause {k} references an unknown variable")
            if c in seen:
                raise ValueError(f"clause {k} duplicates an earlier clause")
            seen.add(c)
        if self.partition is not None:
            blocks = [set(b) for b in self.partition]
            union = set()
            for b in blocks:
                if union & b:
                    raise ValueError("partition blocks are not disjoint")
                union |= b
            for k, c in enumerate(self.clauses):
                if len(c) != len(blocks):
                    raise ValueError(f"clause {k} arity does not match the {len(blocks)}-block partition")
                for i, v in enumerate(c):
                    if v not in blocks[i]:
                        raise ValueError(f"clause {k} position {i} draws from outside block {i}")

    @classmethod
    def from_names(cls, variables: Sequence[str], clauses: Iterable[Sequence[str]],
                   partition: Sequence[Sequence[str]] | None = None) -> "Instance":
        idx = {v: i for i, v in enumerate(variables)}
        cl = [tuple(idx[v] for v in c) for c in clauses]
        part = None if partition is None else [tuple(idx[v] for v in b) for b in partition]
        return cls(tuple(variables), tuple(cl), None if part is None else tuple(part))

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def arity(self) -> int | None:
        return len(self.clauses[0]) if self.clauses else (len(self.partition) if self.partition else None)

    def var(self, name: str) -> int:
        return self._index[name]

    def clause_names(self, k: int) -> tuple[str, ...]:
        return tuple(self.variables[v] for v in self.clauses[k])

    def with_clauses(self, clauses: Iterable[Sequence[int]]) -> "Instance":
        return Instance(self.variables, tuple(tuple(c) for c in clauses), self.partition)

    def drop(self, k: int) -> "Instance":
        return self.with_clauses(c for i, c in enumerate(self.clauses) if i != k)


def multipartite_lift(inst: Instance, r: int | None = None) -> Instance:
    """Variables X x [r]; clause (y_1..y_r) becomes ((y_1,1)..(y_r,r))."""
    r = r if r is not None else inst.arity
    if r is None:
        raise ValueError("arity unknown for an empty instance; pass r")
    for k, c in enumerate(inst.clauses):
        if len(c) != r:
            raise ValueError(f"clause {k} has arity {len(c)}, expected {r}")
    n = inst.n
    names = tuple(f"({v},{i + 1})" for i in range(r) for v in inst.variables)
    clauses = tuple(tuple(i * n + v for i, v in enumerate(c)) for c in inst.clauses)
    partition = tuple(tuple(range(i * n, (i + 1) * n)) for i in range(r))
    return Instance(names, clauses, partition)


def evaluate(inst: Instance, assignment: Sequence[int], k: int) -> tuple[int, ...]:
    return tuple(assignment[v] for v in inst.clauses[k])


# ---- JSON I/O ----

def relation_to_json(r: Relation) -> dict:
    return {"domain": list(r.domain.elements), "arity": r.arity, "tuples": [list(t) for t in r.named_tuples()]}


def pair_to_json(pair: RelationPair) -> dict:
    """S is stored under "tuples", T under "scaffold_tuples"."""
    d = relation_to_json(pair.s)
    d["scaffold_tuples"] = [list(t) for t in pair.t.named_tuples()]
    return d


def _parse_rows(obj: dict, key: str, domain: Domain, arity: int) -> list[tuple[int, ...]]:
    rows = obj.get(key)
    if not isinstance(rows, list):
        raise ParseError(f"field '{key}' must be a list")
    out = []
    for k, row in enumerate(rows):
        if not isinstance(row, list):
            raise ParseError(f"{key}[{k}] must be a list")
        if len(row) != arity:
            raise ParseError(f"{key}[{k}] has length {len(row)}, expected arity {arity}")
        try:
            out.append(tuple(domain.index(str(v)) for v in row))
        except KeyError as e:
            raise ParseError(f"{key}[{k}]: {e.args[0]}") from None
    return out


def _parse_header(obj) -> tuple[Domain, int]:
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    dom = obj.get("domain")
    if not isinstance(dom, list) or not dom:
        raise ParseError("field 'domain' must be a non-empty list")
    try:
        domain = Domain(str(x) for x in dom)
    except ValueError as e:
        raise ParseError(f"field 'domain': {e}") from None
    arity = obj.get("arity")
    if not isinstance(arity, int) or isinstance(arity, bool) or arity < 1:
        raise ParseError("field 'arity' must be a positive integer")
    return domain, arity


def relation_from_json(obj) -> Relation:
    domain, arity = _parse_header(obj)
    rows = _parse_rows(obj, "tuples", domain, arity)
    if len(set(rows)) != len(rows):
        raise ParseError("field 'tuples' contains a duplicate tuple")
    return Relation(domain, arity, rows, str(obj.get("name", "")))


def pair_from_json(obj) -> RelationPair:
    """A relation file without "scaffold_tuples" is read as the plain pair (R, D^r)."""
    s = relation_from_json(obj)
    if "scaffold_tuples" not in obj:
        return RelationPair.plain(s)
    rows = _parse_rows(obj, "scaffold_tuples", s.domain, s.arity)
    t = Relation(s.domain, s.arity, rows)
    if not s.tuples <= t.tuples:
        raise ParseError("field 'tuples' is not contained in 'scaffold_tuples'")
    return RelationPair(s, t)


def instance_to_json(inst: Instance) -> dict:
    return {
        "variables": list(inst.variables),
        "partition": None if inst.partition is None else [[inst.variables[v] for v in b] for b in inst.partition],
        "clauses": [list(inst.clause_names(k)) for k in range(len(inst.clauses))],
    }


def instance_from_json(obj) -> Instance:
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    vs = obj.get("variables")
    if not isinstance(vs, list):
        raise ParseError("field 'variables' must be a list")
    names = [str(v) for v in vs]
    idx = {}
    for i, v in enumerate(names):
        if v in idx:
            raise ParseError(f"variables[{i}] duplicates {v!r}")
        idx[v] = i
    cl = obj.get("clauses")
    if not isinstance(cl, list):
        raise ParseError("field 'clauses' must be a list")
    clauses = []
    seen = {}
    arity = None
    for k, c in enumerate(cl):
        if not isinstance(c, list) or not c:
            raise ParseError(f"clauses[{k}] must be a non-empty list")
        if arity is None:
            arity = len(c)
        elif len(c) != arity:
            raise ParseError(f"clauses[{k}] has arity {len(c)}, expected {arity}")
        try:
            t = tuple(idx[str(v)] for v in c)
        except KeyError as e:
            raise ParseError(f"clauses[{k}] uses unknown variable {e.args[0]!r}") from None
        if t in seen:
            raise ParseError(f"clauses[{k}] duplicates clauses[{seen[t]}]")
        seen[t] = k
        clauses.append(t)
    part = obj.get("partition")
    partition = None
    if part is not None:
        if not isinstance(part, list):
            raise ParseError("field 'partition' must be a list or null")
        partition = []
        for b, block in enumerate(part):
            if not isinstance(block, list):
                raise ParseError(f"partition[{b}] must be a list")
            try:
                partition.append(tuple(idx[str(v)] for v in block))
            except KeyError as e:
                raise ParseError(f"partition[{b}] uses unknown variable {e.args[0]!r}") from None
    try:
        return Instance(tuple(names), tuple(clauses), None if partition is None else tuple(partition))
    except ValueError as e:
        raise ParseError(str(e)) from None


def _load(path) -> object:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: line {e.lineno}: {e.msg}") from None


def _dump(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def io_read_relation(path) -> Relation:
    return relation_from_json(_load(path))


def io_write_relation(r: Relation, path) -> None:
    _dump(relation_to_json(r), path)


def io_read_pair(path) -> RelationPair:
    return pair_from_json(_load(path))


def io_write_pair(pair: RelationPair, path) -> None:
    _dump(pair_to_json(pair), path)


def io_read_instance(path) -> Instance:
    return instance_from_json(_load(path))


def io_write_instance(inst: Instance, path) -> None:
    _dump(instance_to_json(inst), path)
