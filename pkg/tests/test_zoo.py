import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact import nrd, zoo
from artifact.relations import RelationPair


def names(rel):
    return set(rel.named_tuples())


def test_or_dp_32_projection():
    pair = zoo.build_or_dp(3, 2)
    assert pair.s.arity == 12
    idx = zoo.idx_pq(3, 2)
    keep = [0, 1, 2] + [3 + idx.index(t) for t in ((0, 1), (0, 2), (1, 2))]
    got = {tuple(t[i] for i in keep) for t in pair.s.named_tuples()}
    printed = {
        ("1", "0", "0", "(10)", "(10)", "(00)"),
        ("0", "1", "0", "(01)", "(00)", "(10)"),
        ("0", "0", "1", "(00)", "(01)", "(01)"),
        ("1", "1", "0", "(11)", "(10)", "(10)"),
        ("1", "0", "1", "(10)", "(11)", "(01)"),
        ("0", "1", "1", "(01)", "(01)", "(11)"),
        ("1", "1", "1", "(11)", "(11)", "(11)"),
    }
    assert got == printed
    extra = pair.t.tuples - pair.s.tuples
    assert [pair.domain.name(v) for v in next(iter(extra))] == ["0"] * 3 + ["(00)"] * 9


def test_dp_contains_zero_row():
    for p, q in ((1, 1), (2, 1), (3, 2)):
        pair = zoo.build_or_dp(p, q)
        zero = tuple([0] * p + [zoo.pad_value([0] * q)] * p ** q)
        assert zero in pair.t.tuples and zero not in pair.s.tuples


def test_or_dp_21():
    pair = zoo.build_or_dp(2, 1)
    assert len(pair.s.tuples) == 3 and pair.s.arity == 4
    assert pair.domain.elements == ("0", "1", "(0)", "(1)")


def test_shoelace_dp():
    pair = zoo.build_or_dp_family(zoo.SHOELACE)
    printed = {("00", "00", "00"), ("00", "01", "10"), ("01", "10", "00"), ("01", "11", "10"),
               ("10", "00", "01"), ("10", "01", "11"), ("11", "10", "01"), ("11", "11", "11")}
    assert names(pair.t) == printed
    assert names(pair.s) == printed - {("00", "00", "00")}


def test_single_projection_family():
    pair = zoo.build_or_dp_family(zoo.SetFamily(2, 2, ((1, 2),)))
    assert pair.s.arity == 1 and pair.domain.size == 4


def test_regularity():
    ok, w = zoo.is_regular(zoo.SHOELACE)
    assert ok and set(w.values()) == {Fraction(1, 3)}
    ok, w = zoo.is_regular(zoo.SetFamily.complete(4, 2))
    assert ok and set(w.values()) == {Fraction(1, 6)}
    assert zoo.is_regular(zoo.SetFamily(3, 2, ((1, 2),)))[0] is False


def test_regularity_non_uniform_witness():
    # uniform weights fail: element 1 lies in three of the five sets
    F = zoo.SetFamily(4, 2, ((1, 2), (3, 4), (1, 3), (2, 4), (1, 4)))
    ok, w = zoo.is_regular(F)
    assert ok
    for i in range(1, 5):
        assert sum(v for s, v in w.items() if i in s) == Fraction(1, 2)


def test_cycle_relations():
    C, Cs, Ct, Cts = zoo.build_cycles(3)
    assert len(C.tuples) == 6
    assert Cs.tuples == C.tuples - {(0, 0)}


def test_cyc_relations():
    full, star = zoo.build_cyc(3)
    assert names(star) == {("1", "1", "1"), ("2", "2", "2"), ("0", "1", "2"), ("1", "2", "0"), ("2", "0", "1")}
    for m in (5, 7):
        full, _ = zoo.build_cyc(m)
        # (x, y) with y - x in {0, 1} mod m, and the third coordinate determined
        oracle = {(x, (x + d) % m) for x in range(m) for d in (0, 1)}
        assert {t[:2] for t in full.tuples} == oracle
        assert len(full.tuples) == 2 * m


def test_pauli():
    P = zoo.build_pauli()
    assert len(P.tuples) == 5
    assert ("x", "x", "z", "x", "z", "x") in names(P)
    assert ("z",) * 6 not in names(P)


def test_or_dp_lower_sizes():
    i = zoo.gen_or_dp_lower(2, 1, 3)
    assert (i.n, len(i.clauses)) == (6, 3)
    i = zoo.gen_or_dp_lower(1, 1, 3)
    assert (i.n, len(i.clauses)) == (6, 3)
    i = zoo.gen_or_dp_lower(3, 2, 4)
    assert (i.n, len(i.clauses)) == (20, 4)
    assert nrd.check_nonredundant(i, zoo.build_or_dp(3, 2)).status == "nonredundant"


def test_shoelace_lower():
    i = zoo.gen_shoelace_lower(1)
    assert (i.n, len(i.clauses)) == (3, 1)
    i = zoo.gen_shoelace_lower(2)
    assert (i.n, len(i.clauses)) == (12, 8)
    pair = zoo.build_or_dp_family(zoo.SHOELACE)
    assert nrd.check_nonredundant(i, pair).status == "nonredundant"
    for a, b, c in itertools.product((1, 2), repeat=3):
        w = zoo.or_family_witness(zoo.SHOELACE, 2, (a, b, c))
        assert w[i.var(f"(1,{a},{b})")] == 0


def test_or_family_lower():
    F = zoo.SetFamily(3, 2, ((1, 2), (1, 3), (2, 3)))
    assert len(zoo.gen_or_family_lower(F, 1).clauses) == 1
    i = zoo.gen_or_family_lower(F, 2)
    assert nrd.check_nonredundant(i, zoo.build_or_dp_family(F)).status == "nonredundant"
    assert set(zoo.gen_or_family_lower(zoo.SHOELACE, 2).clauses) == set(zoo.gen_shoelace_lower(2).clauses)


def test_girth_instances():
    g = zoo.builtin_graphs()
    pair = zoo.cycle_pair(3)
    assert nrd.check_nonredundant(zoo.gen_girth_instance(g["heawood"]), pair).status == "nonredundant"
    chord = zoo.Graph.from_edges(list(g["heawood"].edges) + [(0, 3)])
    assert nrd.check_nonredundant(zoo.gen_girth_instance(chord), pair).status == "redundant"
    for k in (2, 3, 4):
        assert nrd.check_nonredundant(zoo.gen_girth_instance(g["tree7"]), zoo.cycle_pair(k)).status == "nonredundant"


def test_girth_rejects_non_bipartite():
    with pytest.raises(ValueError):
        zoo.gen_girth_instance(zoo.Graph.from_edges([(0, 1), (1, 2), (2, 0)]))


def test_r2k_lower():
    core = zoo.builtin_graphs()["c6"]
    R, S = zoo.build_r_s(3)
    pair = RelationPair(R, S)
    i = zoo.gen_r2k_lower(3, core, 2)
    assert len(i.clauses) == 12
    assert nrd.check_nonredundant(i, pair).status == "nonredundant"
    assert len(zoo.gen_r2k_lower(3, core, 1).clauses) == len(core.edges)
    w = zoo.r2k_witness(i, core, 3, 0)
    assert nrd.verify_witness(i, pair, nrd.WitnessCertificate(0, w, tuple(w[v] for v in i.clauses[0])))


def test_witness_coloring():
    g = zoo.Graph.from_edges([(0, 1), (1, 2), (3, 4)])
    w = zoo.girth_witness_coloring(g, 0, 3)
    assert w[0] == w[1] == 0
    assert w[3] == w[4] == 2


def test_zoo_table():
    expected = {  # name: (arity, |S|, |D|); counted by hand from the definitions
        "OR": (2, 3, 2), "EQ": (2, 2, 2), "CUT": (2, 2, 2), "1-in-3": (3, 3, 2),
        "3LIN": (3, 9, 3), "3LIN*": (3, 8, 3), "C": (2, 6, 3), "C*": (2, 5, 3),
        "CYC": (3, 6, 3), "CYC*": (3, 5, 3), "BCK": (3, 5, 3), "PAULI": (6, 5, 3),
        "OR-DP": (4, 3, 4),
    }
    for name, (r, size, d) in expected.items():
        obj = zoo.zoo_build(name)
        rel = obj.s if isinstance(obj, RelationPair) else obj
        assert (rel.arity, len(rel.tuples), rel.domain.size) == (r, size, d), name


def test_kk_constant():
    c = zoo.kk_constant(3, 2)
    assert c == pytest.approx(2 ** 1.5 / 6)
    for m in range(3, 200):
        assert c * (m * (m - 1) / 2) ** 1.5 >= m * (m - 1) * (m - 2) / 6 - 1e-9


def random_bipartite(rng, n_max=14):
    n = rng.randint(2, n_max)
    side = [rng.randrange(2) for _ in range(n)]
    edges = [(a, b) for a in range(n) for b in range(a + 1, n) if side[a] != side[b] and rng.random() < 0.35]
    return zoo.Graph.from_edges(edges, vertices=range(n))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([2, 3]))
def test_girth_iff_nonredundant(seed, k):
    g = random_bipartite(random.Random(seed), 10)
    if not g.edges:
        return
    rep = nrd.check_nonredundant(zoo.gen_girth_instance(g), zoo.cycle_pair(k))
    assert (rep.status == "nonredundant") == (zoo.girth(g) >= 2 * k)
