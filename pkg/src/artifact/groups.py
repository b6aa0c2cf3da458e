"""Finite groups given by a multiplication table."""

from __future__ import annotations

import itertools
from typing import Sequence


class FiniteGroup:
    """Elements 0..n-1 with named elements, table[a][b] = a*b."""

    def __init__(self, names: Sequence[str], table: Sequence[Sequence[int]], name: str = "G"):
        n = len(names)
        if len(table) != n or any(len(row) != n for row in table):
            raise ValueError("multiplication table must be n x n")
        self.names = tuple(names)
        self.table = tuple(tuple(row) for row in table)
        self.name = name
        ids = [e for e in range(n) if all(self.table[e][a] == a == self.table[a][e] for a in range(n))]
        if len(ids) != 1:
            raise ValueError("table has no identity element")
        self.identity = ids[0]
        inv = []
        for a in range(n):
            bs = [b for b in range(n) if self.table[a][b] == self.identity]
            if len(bs) != 1:
                raise ValueError(f"element {names[a]} has no unique inverse")
            inv.append(bs[0])
        self._inv = tuple(inv)
        for a, b, c in itertools.product(range(n), repeat=3):
            if self.table[self.table[a][b]][c] != self.table[a][self.table[b][c]]:
                raise ValueError("table is not associative")

    @property
    def order(self) -> int:
        return len(self.names)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self._inv[a]

    def index(self, name: str) -> int:
        return self.names.index(name)

    def is_abelian(self) -> bool:
        n = self.order
        return all(self.table[a][b] == self.table[b][a] for a in range(n) for b in range(n))

    def alternating_product(self, xs: Sequence[int]) -> int:
        """x1 * x2^-1 * x3 * ... for odd length."""
        acc = self.identity
        for i, x in enumerate(xs):
            acc = self.table[acc][x if i % 2 == 0 else self._inv[x]]
        return acc

    def to_json(self) -> dict:
        return {"name": self.name, "elements": list(self.names), "table": [list(r) for r in self.table]}

    @classmethod
    def from_json(cls, obj) -> "FiniteGroup":
        names = obj["elements"]
        table = obj["table"]
        if table and isinstance(table[0][0], str):
            table = [[names.index(v) for v in row] for row in table]
        return cls(names, table, obj.get("name", "G"))


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("n must be positive")
    return FiniteGroup([str(i) for i in range(n)], [[(a + b) % n for b in range(n)] for a in range(n)], f"Z{n}")


def symmetric(k: int) -> FiniteGroup:
    """S_k; element p maps i to p[i], product (p*q)(i) = p(q(i))."""
    perms = list(itertools.permutations(range(k)))
    ix = {p: i for i, p in enumerate(perms)}
    table = [[ix[tuple(p[q[i]] for i in range(k))] for q in perms] for p in perms]
    return FiniteGroup(["".join(map(str, p)) for p in perms], table, f"S{k}")


def group_by_name(spec: str) -> FiniteGroup:
    s = spec.strip().upper()
    if s.startswith("Z") and s[1:].isdigit():
        return cyclic(int(s[1:]))
    if s.startswith("S") and s[1:].isdigit():
        return symmetric(int(s[1:]))
    raise ValueError(f"unknown group {spec!r} (expected Zn or Sk)")
