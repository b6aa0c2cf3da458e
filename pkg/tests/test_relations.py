import itertools
import json
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from artifact import zoo
from artifact.relations import (Domain, Instance, ParseError, Relation, RelationPair, complement_tilde,
                                instance_from_json, instance_to_json, io_read_relation, multipartite_lift,
                                pair_from_json, pair_to_json, relation_from_json, relation_to_json, tensor)

DATA = Path(__file__).parent / "data"
BOOL = Domain.range(2)


def full(d, r):
    return set(itertools.product(range(d.size), repeat=r))


def test_domain_index_is_bijection():
    d = Domain(["a", "b", "c"])
    assert [d.index(d.name(i)) for i in range(3)] == [0, 1, 2]
    with pytest.raises(ValueError):
        Domain(["a", "a"])


def test_tilde_of_equal_pair_is_full():
    r = zoo.build_or(2)
    assert complement_tilde(RelationPair(r, r)).tuples == full(BOOL, 2)


def test_tilde_c6_star():
    C, Cs, _, _ = zoo.build_cycles(3)
    got = complement_tilde(RelationPair(Cs, C)).tuples
    # all 9 tuples over {0,1,2} minus T\S = {(0,0)}
    assert got == full(C.domain, 2) - {(0, 0)}
    assert len(got) == 8


def test_tilde_empty_s():
    t0 = (1, 0)
    pair = RelationPair(Relation(BOOL, 2, []), Relation(BOOL, 2, [t0]))
    assert complement_tilde(pair).tuples == full(BOOL, 2) - {t0}


def test_s_must_lie_in_t():
    with pytest.raises(ValueError):
        RelationPair(Relation(BOOL, 1, [(0,)]), Relation(BOOL, 1, [(1,)]))


def test_multipartite_lift_single_clause():
    inst = Instance.from_names(["a", "b"], [["a", "b"]])
    lift = multipartite_lift(inst)
    assert lift.n == 4
    assert lift.clause_names(0) == ("(a,1)", "(b,2)")


def test_multipartite_lift_sizes():
    g = zoo.builtin_graphs()["heawood"]
    inst = zoo.gen_girth_instance(g)
    lift = multipartite_lift(inst)
    assert lift.n == 2 * inst.n and len(lift.clauses) == len(inst.clauses)


def test_tensor_cardinality():
    s1 = zoo.build_bck()
    s2 = zoo.build_one_in_three()
    p = tensor(RelationPair.plain(s1), RelationPair.plain(s2))
    assert len(p.s.tuples) == 15
    assert p.domain.size == 6
    assert "0|1" in p.domain.elements


def test_tensor_with_singleton_is_isomorphic():
    pair = zoo.cycle_pair(3)
    one = Domain(["*"])
    unit = Relation.full(one, 2)
    p = tensor(pair, RelationPair(unit, unit))
    assert len(p.s.tuples) == len(pair.s.tuples) and len(p.t.tuples) == len(pair.t.tuples)


def test_round_trip_relation_and_pair():
    for obj in (zoo.build_bck(), zoo.cycle_pair(3)):
        data = pair_to_json(obj) if isinstance(obj, RelationPair) else relation_to_json(obj)
        back = pair_from_json(json.loads(json.dumps(data)))
        again = pair_to_json(back) if isinstance(obj, RelationPair) else relation_to_json(back.s)
        assert again == data


def test_round_trip_instance():
    inst = multipartite_lift(zoo.gen_girth_instance(zoo.builtin_graphs()["c6"]))
    assert instance_from_json(instance_to_json(inst)) == inst


def test_malformed_arity_names_clause():
    bad = {"domain": ["0", "1"], "arity": 2, "tuples": [["0", "1"], ["1"]]}
    with pytest.raises(ParseError, match=r"tuples\[1\]"):
        relation_from_json(bad)
    with pytest.raises(ValueError, match=r"clauses\[1\]"):
        instance_from_json({"variables": ["a", "b"], "clauses": [["a", "b"], ["a"]]})


def test_duplicate_clause_rejected():
    with pytest.raises(ValueError, match="duplicates"):
        Instance.from_names(["a", "b"], [["a", "b"], ["a", "b"]])


def test_shipped_c6_star():
    r = io_read_relation(DATA / "c6_star.json")
    C, _, _, _ = zoo.build_cycles(3)
    assert len(r.tuples) == len(C.tuples) - 1 == 5


def _pairs_small():
    out = []
    for r in (1, 2):
        universe = sorted(full(BOOL, r))
        for tmask in range(1 << len(universe)):
            t = [u for i, u in enumerate(universe) if tmask >> i & 1]
            for smask in range(1 << len(t)):
                s = [u for i, u in enumerate(t) if smask >> i & 1]
                out.append(RelationPair(Relation(BOOL, r, s), Relation(BOOL, r, t)))
    return out


def test_tilde_involution_all_small_pairs():
    for pair in _pairs_small():
        tt = complement_tilde(pair)
        assert pair.s.tuples <= tt.tuples
        back = complement_tilde(RelationPair(pair.s, tt))
        assert back == pair.t or back.tuples == pair.t.tuples


@st.composite
def instances(draw):
    n = draw(st.integers(1, 6))
    r = draw(st.integers(1, 3))
    clauses = draw(st.sets(st.tuples(*[st.integers(0, n - 1)] * r), max_size=8))
    return Instance(tuple(f"v{i}" for i in range(n)), tuple(sorted(clauses)))


@given(instances())
def test_lift_respects_partition(inst):
    if not inst.clauses:
        return
    lift = multipartite_lift(inst)
    assert lift.partition is not None
    for c in lift.clauses:
        for i, v in enumerate(c):
            assert v in lift.partition[i]


@given(st.integers(0, 6), st.integers(0, 6))
def test_tensor_cardinalities_multiply(a, b):
    u = sorted(full(BOOL, 2))
    r1 = Relation(BOOL, 2, u[: a % 5])
    r2 = Relation(Domain.range(3), 2, sorted(full(Domain.range(3), 2))[:b])
    p = tensor(RelationPair.plain(r1), RelationPair.plain(r2))
    assert len(p.s.tuples) == len(r1.tuples) * len(r2.tuples)
    assert len(p.t.tuples) == 4 * 9
