"""Abelian embeddings via integer lattices, finite group embeddings, balancedness."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .groups import FiniteGroup
from .relations import Domain, Relation


@dataclass
class EmbeddingReport:
    kind: str
    verdict: bool | None
    certificate: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"kind": self.kind, "verdict": self.verdict, "certificate": self.certificate}


# ---- Pauli group ----

@dataclass(frozen=True, order=True)
class PauliElem:
    """(-1)^a X^b Y^c Z^d."""

    a: int = 0
    b: int = 0
    c: int = 0
    d: int = 0

    @property
    def code(self) -> int:
        return (self.a << 3) | (self.b << 2) | (self.c << 1) | self.d

    @classmethod
    def from_code(cls, v: int) -> "PauliElem":
        return cls((v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1)

    @classmethod
    def parse(cls, s: str) -> "PauliElem":
        s = s.strip()
        a = 0
        if s.startswith("-"):
            a, s = 1, s[1:]
        if s == "I":
            return cls(a)
        out = cls(a)
        for ch in s:
            out = pauli_mul(out, _LETTER[ch])
        return out

    def __mul__(self, other: "PauliElem") -> "PauliElem":
        return pauli_mul(self, other)

    def __str__(self) -> str:
        body = "X" * self.b + "Y" * self.c + "Z" * self.d or "I"
        return ("-" if self.a else "") + body


def pauli_mul(g: PauliElem, h: PauliElem) -> PauliElem:
    sign = g.a ^ h.a ^ ((g.c & h.b) ^ (g.d & h.b) ^ (g.d & h.c))
    return PauliElem(sign, g.b ^ h.b, g.c ^ h.c, g.d ^ h.d)


def pauli_inv(g: PauliElem) -> PauliElem:
    for v in range(16):
        h = PauliElem.from_code(v)
        if pauli_mul(g, h) == PAULI_I:
            return h
    raise AssertionError("unreachable")


PAULI_I = PauliElem()
PAULI_X = PauliElem(0, 1, 0, 0)
PAULI_Y = PauliElem(0, 0, 1, 0)
PAULI_Z = PauliElem(0, 0, 0, 1)
_LETTER = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def pauli_group() -> FiniteGroup:
    """The 16-element group as a table; element k has code k."""
    elems = [PauliElem.from_code(v) for v in range(16)]
    table = [[pauli_mul(g, h).code for h in elems] for g in elems]
    return FiniteGroup([str(e) for e in elems], table, "Pauli")


# ---- cosets in G^r ----

def _tmul(G: FiniteGroup, s, t):
    return tuple(G.mul(a, b) for a, b in zip(s, t))


def _tinv(G: FiniteGroup, s):
    return tuple(G.inv(a) for a in s)


@dataclass
class Coset:
    """base * K with K generated by base^-1 * g_j; words index the generators (0-based)."""

    group: FiniteGroup
    generators: list
    elements: dict  # element -> alternating word over generator indices

    def __contains__(self, t) -> bool:
        return tuple(t) in self.elements

    def __len__(self) -> int:
        return len(self.elements)


def coset_closure(generators: Sequence[Sequence[int]], group: FiniteGroup, cap: int = 2_000_000) -> Coset:
    """Closure of the generators under (x, y, z) -> x y^-1 z."""
    gens = [tuple(g) for g in generators]
    if not gens:
        raise ValueError("need at least one generator")
    G = group
    base = gens[0]
    binv = _tinv(G, base)
    steps = [_tmul(G, binv, g) for g in gens]
    ident = tuple(G.identity for _ in base)
    parent = {ident: None}
    queue = deque([ident])
    while queue:
        k = queue.popleft()
        for j, s in enumerate(steps):
            nk = _tmul(G, k, s)
            if nk not in parent:
                parent[nk] = (k, j)
                if len(parent) > cap:
                    raise MemoryError(f"subgroup exceeds {cap} elements")
                queue.append(nk)
    elements = {}
    for k in parent:
        js = []
        cur = k
        while parent[cur] is not None:
            cur, j = parent[cur]
            js.append(j)
        js.reverse()
        # base * prod(base^-1 g_j) as an alternating word: g_j1, g_0, g_j2, g_0, ...
        word = [0] if not js else [w for j in js for w in (j, 0)][:-1]
        elements[_tmul(G, base, k)] = word
    return Coset(G, gens, elements)


def alternating_word_product(group: FiniteGroup, gens: Sequence[Sequence[int]], word: Sequence[int]):
    acc = tuple(group.identity for _ in gens[0])
    for i, j in enumerate(word):
        g = tuple(gens[j])
        acc = _tmul(group, acc, g if i % 2 == 0 else _tinv(group, g))
    return acc


def verify_group_embedding(R: Relation, group: FiniteGroup, eta: dict) -> EmbeddingReport:
    """Coset generated by eta(R) meets eta(D)^r exactly in eta(R)?"""
    D = R.domain
    img = [eta[d] for d in range(D.size)]
    if len(set(img)) != len(img):
        raise ValueError("eta must be injective")
    gens = [tuple(img[v] for v in t) for t in R.sorted()]
    if not gens:
        return EmbeddingReport("group", True, {"intersection": []})
    C = coset_closure(gens, group)
    back = {g: d for d, g in enumerate(img)}
    inter = []
    extra = []
    for elem, word in sorted(C.elements.items()):
        if all(a in back for a in elem):
            t = tuple(back[a] for a in elem)
            inter.append(t)
            if t not in R.tuples:
                extra.append((t, word))
    cert = {
        "group": group.name,
        "coset_size": len(C),
        "intersection": [[D.name(v) for v in t] for t in sorted(inter)],
    }
    if extra:
        t, word = extra[0]
        cert["violation"] = {"tuple": [D.name(v) for v in t],
                             "word": [[D.name(v) for v in gens[j]] for j in word]}
    return EmbeddingReport("group", not extra, cert)


def pauli_embedding_check(R: Relation) -> EmbeddingReport:
    """Map the domain letters x, y, z (or the first three elements) to X, Y, Z."""
    G = pauli_group()
    names = list(R.domain.elements)
    if len(names) > 3:
        raise ValueError("Pauli check expects at most three domain elements")
    letters = [PAULI_X, PAULI_Y, PAULI_Z]
    if set(names) <= {"x", "y", "z"}:
        eta = {i: letters["xyz".index(nm)].code for i, nm in enumerate(names)}
    else:
        eta = {i: letters[i].code for i in range(len(names))}
    rep = verify_group_embedding(R, G, eta)
    rep.kind = "pauli"
    return rep


# ---- integer lattices ----

def indicator(t: Sequence[int], size: int) -> list[int]:
    v = [0] * (size * len(t))
    for i, x in enumerate(t):
        v[i * size + x] = 1
    return v


class Lattice:
    """Integer row span of the generators, in echelon (Hermite) form with the
    unimodular transform kept so members come with explicit combinations."""

    def __init__(self, generators: Sequence[Sequence[int]]):
        gens = [list(map(int, g)) for g in generators]
        self.k = len(gens)
        self.dim = len(gens[0]) if gens else 0
        rows = [g[:] for g in gens]
        trans = [[int(i == j) for j in range(self.k)] for i in range(self.k)]
        pivots = []
        r = 0
        for c in range(self.dim):
            while True:
                nz = [i for i in range(r, self.k) if rows[i][c] != 0]
                if not nz:
                    break
                i0 = min(nz, key=lambda i: abs(rows[i][c]))
                rows[r], rows[i0] = rows[i0], rows[r]
                trans[r], trans[i0] = trans[i0], trans[r]
                done = True
                for i in range(r + 1, self.k):
                    if rows[i][c]:
                        f = rows[i][c] // rows[r][c]
                        rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
                        trans[i] = [a - f * b for a, b in zip(trans[i], trans[r])]
                        if rows[i][c]:
                            done = False
                if done:
                    break
            if r < self.k and rows[r][c] != 0:
                if rows[r][c] < 0:
                    rows[r] = [-a for a in rows[r]]
                    trans[r] = [-a for a in trans[r]]
                for i in range(r):
                    f = rows[i][c] // rows[r][c]
                    if f:
                        rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
                        trans[i] = [a - f * b for a, b in zip(trans[i], trans[r])]
                pivots.append(c)
                r += 1
                if r == self.k:
                    break
        self.rows = rows[:r]
        self.trans = trans[:r]
        self.pivots = pivots

    def combination(self, v: Sequence[int]) -> list[int] | None:
        """Integer coefficients on the original generators summing to v, or None."""
        v = list(map(int, v))
        coef = [0] * len(self.rows)
        for idx, c in enumerate(self.pivots):
            if v[c] % self.rows[idx][c]:
                return None
            f = v[c] // self.rows[idx][c]
            if f:
                coef[idx] = f
                v = [a - f * b for a, b in zip(v, self.rows[idx])]
        if any(v):
            return None
        out = [0] * self.k
        for f, tr in zip(coef, self.trans):
            if f:
                out = [a + f * b for a, b in zip(out, tr)]
        return out


def abelian_embedding_check(R: Relation) -> EmbeddingReport:
    """Q, the subgroup of (Z^D)^r generated by R, meets D^r exactly in R?"""
    D = R.domain
    tuples = R.sorted()
    if not tuples:
        return EmbeddingReport("abelian", True, {"extra": []})
    lat = Lattice([indicator(t, D.size) for t in tuples])
    extra = []
    for t in itertools.product(range(D.size), repeat=R.arity):
        if t in R.tuples:
            continue
        comb = lat.combination(indicator(t, D.size))
        if comb is not None:
            extra.append((t, comb))
    cert = {"extra": [{"tuple": [D.name(v) for v in t],
                       "combination": [{"coefficient": c, "tuple": [D.name(v) for v in tuples[i]]}
                                       for i, c in enumerate(comb) if c]}
                      for t, comb in extra]}
    return EmbeddingReport("abelian", not extra, cert)


def verify_combination(R: Relation, target: Sequence[int], combo: Sequence[tuple[int, Sequence[int]]]) -> bool:
    """sum c_i * indicator(t_i) == indicator(target), with every t_i in R."""
    size = R.domain.size
    acc = [0] * (size * R.arity)
    for c, t in combo:
        if tuple(t) not in R.tuples:
            return False
        for k, v in enumerate(indicator(t, size)):
            acc[k] += c * v
    return acc == indicator(target, size)


# ---- balancedness ----

def balanced_check(R: Relation, m_max: int = 9) -> EmbeddingReport:
    """Search t1 - t2 + t3 - ... (odd m <= m_max) with every coordinate in {0,1} and result outside R."""
    if R.domain.size != 2:
        raise ValueError("balanced_check needs a Boolean relation")
    if m_max % 2 == 0:
        raise ValueError("m_max must be odd")
    tuples = R.sorted()
    r = R.arity
    for m in range(3, m_max + 1, 2):
        layer = {tuple([0] * r): None}
        parents = [layer]
        for d in range(m):
            sign = 1 if d % 2 == 0 else -1
            after = m - d - 1
            pos_left = (after + 1) // 2 if d % 2 == 1 else after // 2
            neg_left = after - pos_left
            nxt = {}
            for s in layer:
                for t in tuples:
                    ns = tuple(a + sign * b for a, b in zip(s, t))
                    if any(v > 1 + neg_left or v < -pos_left for v in ns):
                        continue
                    if ns not in nxt:
                        nxt[ns] = (s, t)
            layer = nxt
            parents.append(layer)
        for s in sorted(layer):
            if all(v in (0, 1) for v in s) and s not in R.tuples:
                seq = []
                cur = s
                for d in range(m, 0, -1):
                    prev, t = parents[d][cur]
                    seq.append(t)
                    cur = prev
                seq.reverse()
                return EmbeddingReport("balanced", False, {
                    "m": m, "tuples": [list(t) for t in seq], "result": list(s)})
    return EmbeddingReport("balanced", True, {"m_max": m_max})


def verify_balanced_violation(R: Relation, seq: Sequence[Sequence[int]]) -> bool:
    if len(seq) % 2 == 0 or any(tuple(t) not in R.tuples for t in seq):
        return False
    s = [sum(t[i] if k % 2 == 0 else -t[i] for k, t in enumerate(seq)) for i in range(R.arity)]
    return all(v in (0, 1) for v in s) and tuple(s) not in R.tuples


# ---- the DP coset ----

def _gf2_solve(rows: list[tuple[int, int]], nbits: int, cap: int = 1 << 16) -> list[int]:
    """All solutions of the affine system {mask . x = rhs}; x as a bitmask."""
    piv: dict[int, tuple[int, int]] = {}
    for mask, rhs in rows:
        for b, (pm, pr) in piv.items():
            if mask >> b & 1:
                mask ^= pm
                rhs ^= pr
        if mask == 0:
            if rhs:
                return []
            continue
        b = mask.bit_length() - 1
        for ob, (pm, pr) in list(piv.items()):
            if pm >> b & 1:
                piv[ob] = (pm ^ mask, pr ^ rhs)
        piv[b] = (mask, rhs)
    free = [b for b in range(nbits) if b not in piv]
    if 1 << len(free) > cap:
        raise MemoryError(f"{1 << len(free)} solutions exceed cap")
    sols = []
    for combo in range(1 << len(free)):
        x = 0
        for k, b in enumerate(free):
            if combo >> k & 1:
                x |= 1 << b
        for b, (pm, pr) in piv.items():
            val = pr ^ (bin(pm & x & ~(1 << b)).count("1") & 1)
            if val:
                x |= 1 << b
        sols.append(x)
    return sols


def verify_dp_coset(p: int, q: int) -> EmbeddingReport:
    """sigma(DP_{p,q}) = H meet sigma(D_{p,q})^(p+p^q) for the affine subspace H of ((Z/2)^(q+2))^(p+p^q)."""
    from .zoo import build_or_dp, idx_pq

    if not p >= q >= 1:
        raise ValueError("need p >= q >= 1")
    w = q + 2
    idx = idx_pq(p, q)
    N = p + len(idx)
    nbits = N * w

    def bit(pos, coord):  # coord 1-based within the block
        return pos * w + (coord - 1)

    rows = []
    for i in range(p):
        for c in range(2, w + 1):
            rows.append((1 << bit(i, c), 0))
    for k, ts in enumerate(idx):
        rows.append((1 << bit(p + k, 1), 0))
        rows.append((1 << bit(p + k, 2), 1))
        for j, t in enumerate(ts):
            rows.append(((1 << bit(p + k, j + 3)) | (1 << bit(t, 1)), 0))
    H = _gf2_solve(rows, nbits)
    Hset = set(H)
    closed = all((a ^ b ^ c) in Hset for a in H for b in H for c in H) if len(H) <= 64 else None

    pair = build_or_dp(p, q, arity_cap=10 ** 6)
    D = pair.domain

    def sigma(v: int) -> int:
        if v < 2:
            return v  # (b, 0, ..., 0) with coordinate 1 in bit 0
        bits = D.name(v)[1:-1]
        out = 1 << 1
        for j, ch in enumerate(bits):
            if ch == "1":
                out |= 1 << (j + 2)
        return out

    def embed(t) -> int:
        x = 0
        for pos, v in enumerate(t):
            x |= sigma(v) << (pos * w)
        return x

    sig_vals = {sigma(v) for v in range(D.size)}
    mask = (1 << w) - 1
    inter = {h for h in H if all(((h >> (pos * w)) & mask) in sig_vals for pos in range(N))}
    image = {embed(t) for t in pair.t.tuples}
    ok = inter == image and closed is not False
    return EmbeddingReport("dp-coset", ok, {
        "p": p, "q": q, "coset_size": len(H), "closed": closed,
        "intersection": len(inter), "image": len(image)})
