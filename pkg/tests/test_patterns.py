import itertools
import json

import pytest
from hypothesis import assume, given, settings, strategies as st

from artifact import zoo
from artifact.patterns import (DefinitionMismatch, MultisortedPattern, Pattern, ViolationCertificate,
                               conjunction_split, cube_identities, cube_pattern, cube_power_lower_bound,
                               cnf_model_from_certificate, cnf_satisfied, equality_elim, existential_projection,
                               export_cnf_violation, functional_guard_lift, interpret, interpretation,
                               maltsev_pattern, majority_pattern, minor, parse_dimacs, pattern_from_json,
                               pattern_witness_redundancy, per_sort, power, power_domain, power_function,
                               preserves, projection_pattern, strict_relax, subpattern, substitute,
                               verify_violation)
from artifact.relations import Domain, Instance, Relation, RelationPair, as_pair, complement_tilde

BOOL = Domain.range(2)


def tilde_of(pair):
    return RelationPair(pair.s, complement_tilde(pair))


def dpll(clauses):
    """Tiny DPLL used as an independent satisfiability oracle."""
    def rec(cls, assign):
        cls = [c for c in cls if not any(assign.get(abs(l)) == (l > 0) for l in c)]
        cls = [[l for l in c if abs(l) not in assign] for c in cls]
        if not cls:
            return True
        if any(not c for c in cls):
            return False
        unit = next((c[0] for c in cls if len(c) == 1), None)
        lit = unit if unit is not None else cls[0][0]
        for val in ((lit > 0,) if unit is not None else (lit > 0, lit <= 0)):
            if rec(cls, {**assign, abs(lit): val}):
                return True
        return False
    return rec(clauses, {})


def apply_fn(f, args):
    """Coordinatewise application by direct table lookup."""
    out = []
    for row in zip(*args):
        if row not in f.table:
            return None
        out.append(f.table[row])
    return tuple(out)


def test_maltsev_interpretation():
    fs = interpret(maltsev_pattern(), BOOL)
    assert len(fs) == 1
    m = fs[0]
    assert m(1, 1, 0) == 0 and m(0, 0, 1) == 1
    assert not m.defined((0, 1, 0)) and not m.defined((1, 0, 1))
    assert len(m.table) == 6


def test_majority_is_total():
    (f,) = interpret(majority_pattern(), BOOL)
    for row in itertools.product((0, 1), repeat=3):
        assert f(*row) == int(sum(row) >= 2)


def test_empty_pattern_nowhere_defined():
    fs = interpret(Pattern([], arity=3), BOOL)
    assert len(fs) == 1 and fs[0].table == {}


def test_unrestricted_identity_gives_d_functions():
    P = Pattern.parse("xy->z")
    fs = interpret(P, Domain.range(3))
    assert len(fs) == 3
    assert {f(0, 1) for f in fs} == {0, 1, 2}


def test_inconsistent_pattern_has_no_function():
    assert interpret(Pattern.parse("xy->x, xy->y"), BOOL) == []


def test_identity_minor():
    P = cube_pattern(3)
    assert minor(P, tuple(range(7))) == P


def test_merging_maltsev_variables():
    assert substitute(maltsev_pattern(), {1: 0}) == Pattern.parse("xxx->x")


def test_argument_identification_minor():
    # positions 1 and 2 merged: only xxy -> y is constant on that fibre
    assert minor(maltsev_pattern(), (0, 0, 1)) == Pattern.parse("xy->y")


def test_subpattern_of_u3():
    sub = subpattern(cube_pattern(3), [0])
    assert sub.arity == 7 and len(sub) == 1


def test_u3_rows():
    rows = [(("x", "x", "x", "y", "y", "y", "y"), "x"),
            (("x", "y", "y", "x", "x", "y", "y"), "x"),
            (("y", "x", "y", "x", "y", "x", "y"), "x")]
    assert cube_pattern(3) == Pattern(rows)


def test_u2_is_maltsev_up_to_argument_order():
    u2 = cube_pattern(2)
    assert u2.arity == 3 and len(u2) == 2
    perms = [p for p in itertools.permutations(range(3))
             if Pattern([(tuple(a[k] for k in p), o) for a, o in u2.identities]) == maltsev_pattern()]
    assert perms


@pytest.mark.parametrize("k", [2, 3, 4])
def test_cube_pattern_shape(k):
    P = cube_pattern(k)
    assert P.arity == 2 ** k - 1 and len(P) == k
    for D in (BOOL, Domain.range(3)):
        assert len(interpret(P, D)) == 1


def test_u3_squared_identities():
    xx, xy, yx, yy = "xx", "xy", "yx", "yy"
    rows = [((xx, xy, xy, yx, yx, yy, yy), xx),
            ((xy, xx, xy, yx, yy, yx, yy), xx),
            ((xy, yx, yy, xx, xy, yx, yy), xx)]
    assert power(cube_pattern(3), 2) == Pattern(rows)
    assert power(cube_pattern(3), 2).pretty() == "xyxzuzu->y, xyyzzuu->x, xyzuxyz->u"


def test_power_one_is_identity():
    for P in (cube_pattern(3), majority_pattern(), maltsev_pattern()):
        assert power(P, 1) == P


def test_power_range():
    with pytest.raises(ValueError):
        power(maltsev_pattern(), 3)
    with pytest.raises(ValueError):
        power(maltsev_pattern(), 0)


def test_power_of_function_is_not_in_power_interpretation():
    (u3,) = interpret(cube_pattern(3), BOOL)
    pf = power_function(u3, 2)
    D2 = power_domain(BOOL, 2)
    a = {"xx": "0|1", "xy": "0|0", "yx": "1|0", "yy": "1|1"}
    row = tuple(D2.index(a[v]) for v in ("xy", "xx", "xy", "yx", "yy", "yx", "yy"))
    assert not pf.defined(row)
    (p2,) = interpret(power(cube_pattern(3), 2), D2)
    assert p2.defined(row) and p2(*row) == D2.index(a["xx"])


def test_u3_squared_violates_3lin():
    lin = zoo.zoo_build("3LIN*")
    rows = [(0, 1, 2), (1, 0, 2), (1, 1, 1), (1, 2, 0), (1, 0, 2), (2, 2, 2), (2, 0, 1)]
    (f,) = interpret(power(cube_pattern(3), 2), lin.domain)
    assert apply_fn(f, rows) == (0, 0, 0)
    assert all(t in lin.s.tuples for t in rows)
    target = tilde_of(lin)
    assert (0, 0, 0) not in target.t.tuples
    res = preserves(power(cube_pattern(3), 2), target)
    assert res.status is False
    assert verify_violation(power(cube_pattern(3), 2), target, res.certificate)
    cert = ViolationCertificate(rows, (0, 0, 0), {})
    assert verify_violation(power(cube_pattern(3), 2), target, cert)


def test_cube_power_lower_bound():
    rep = cube_power_lower_bound(zoo.zoo_build("3LIN*"), 3, 2)
    assert rep["status"] == "violated" and rep["exponent"] == 1.5
    assert rep["certificate"].args == [(0, 1, 2), (1, 0, 2), (1, 1, 1), (1, 2, 0), (1, 0, 2), (2, 2, 2), (2, 0, 1)]
    assert cube_power_lower_bound(zoo.build_or(2), 2, 1)["exponent"] == 2
    assert cube_power_lower_bound(zoo.build_eq(2), 2, 1)["status"] == "preserved"
    with pytest.raises(ValueError):
        cube_power_lower_bound(zoo.build_eq(2), 2, 2)


@pytest.mark.parametrize("name", ["OR", "EQ", "1-in-3", "3LIN*", "BCK", "C*", "CYC*"])
def test_projections_preserve(name):
    obj = zoo.zoo_build(name)
    rel = obj.s if isinstance(obj, RelationPair) else obj
    for i in range(3):
        assert preserves(projection_pattern(3, i), rel).status is True


@pytest.mark.parametrize("k", [2, 3])
def test_cube_powers_preserve_bck(k):
    assert preserves(power(cube_pattern(k), k - 1), zoo.build_bck()).status is True


def test_u4_squared_not_implied_by_u2():
    pairs = list(itertools.combinations(cube_identities(4), 2))
    cols = [[tuple(i[0][j] for i in s) for j in range(15)] for s in pairs]
    outs = tuple(tuple(i[1] for i in s) for s in pairs)
    V = sorted({v for c in cols for v in c})
    D = Domain(["".join(v) for v in V])
    R = Relation(D, 6, [tuple(V.index(cols[k][j]) for k in range(6)) for j in range(15)])
    args = [tuple(V.index(cols[k][j]) for k in range(6)) for j in range(15)]
    out = tuple(V.index(v) for v in outs)
    assert out not in R.tuples
    assert verify_violation(power(cube_pattern(4), 2), R, ViolationCertificate(args, out, {}))
    assert preserves(cube_pattern(2), R).status is True


def test_export_cnf_satisfiable_for_3lin():
    target = tilde_of(zoo.zoo_build("3LIN*"))
    P = power(cube_pattern(3), 2)
    text, vm = export_cnf_violation(P, target)
    _, clauses = parse_dimacs(text)
    rows = [(0, 1, 2), (1, 0, 2), (1, 1, 1), (1, 2, 0), (1, 0, 2), (2, 2, 2), (2, 0, 1)]
    assert cnf_satisfied(clauses, cnf_model_from_certificate(vm, rows, target, P))


def test_export_cnf_empty_relation():
    text, _ = export_cnf_violation(maltsev_pattern(), Relation(BOOL, 2, []))
    nv, clauses = parse_dimacs(text)
    assert sorted(clauses) == [[-1], [1]] and not dpll(clauses)


def test_export_cnf_agrees_with_search():
    # Mal'tsev preserves EQ; OR is violated by it
    _, eq = parse_dimacs(export_cnf_violation(cube_pattern(2), zoo.build_eq(2))[0])
    assert not dpll(eq)
    _, orr = parse_dimacs(export_cnf_violation(cube_pattern(2), zoo.build_or(2))[0])
    assert dpll(orr)


def test_export_cnf_needs_unique_interpretation():
    with pytest.raises(ValueError):
        export_cnf_violation(Pattern.parse("xy->z"), zoo.build_or(2))


def test_pattern_json_round_trip():
    for P in (cube_pattern(3), power(cube_pattern(3), 2), Pattern([], arity=2)):
        assert pattern_from_json(json.loads(json.dumps(P.to_json()))) == P
    M = MultisortedPattern((maltsev_pattern(), majority_pattern()))
    assert pattern_from_json(json.loads(json.dumps(M.to_json()))) == M


# ---- instance transformations ----

def independent_verify(inst, pair, k, sigma):
    for j, c in enumerate(inst.clauses):
        val = tuple(sigma[v] for v in c)
        if j == k:
            if val in pair.s.tuples or val not in pair.t.tuples:
                return False
        elif val not in pair.s.tuples:
            return False
    return True


def all_witnesses(inst, pair):
    from artifact import nrd
    rep = nrd.check_nonredundant(inst, pair)
    assert rep.status == "nonredundant"
    return [c.assignment for c in rep.certificates]


def test_strict_relax_keeps_witnesses():
    C, Cs, _, _ = zoo.build_cycles(3)
    p1 = RelationPair(Cs, C)
    p2 = RelationPair(Cs, Relation.full(C.domain, 2))
    inst = zoo.gen_girth_instance(zoo.builtin_graphs()["heawood"])
    wits = all_witnesses(inst, p1)
    res = strict_relax(inst, p1, p2, wits)
    assert all(independent_verify(res.instance, p2, k, w) for k, w in enumerate(res.witnesses))
    with pytest.raises(DefinitionMismatch):
        strict_relax(inst, p2, p1, wits)


def test_equality_elim():
    one = zoo.build_one_in_three()
    s1 = Relation(BOOL, 3, [t for t in one.tuples if t[0] == t[1]])
    p1, p2 = as_pair(s1), as_pair(one)
    inst = Instance.from_names(list("abcdef"), [list("abc"), list("def")])
    wits = [(1, 1, 1, 0, 0, 1), (0, 0, 1, 1, 0, 0)]
    assert all(independent_verify(inst, p1, k, w) for k, w in enumerate(wits))
    res = equality_elim(inst, p1, p2, 0, 1, wits)
    assert res.dropped == 1 and len(res.instance.clauses) == 1
    assert independent_verify(res.instance, p2, 0, res.witnesses[0])
    same = equality_elim(inst, p1, p2, 0, 1, [wits[0], (0, 0, 1, 1, 1, 1)])
    assert same.dropped == 0
    with pytest.raises(DefinitionMismatch):
        equality_elim(inst, p2, p2, 0, 1, wits)


def test_conjunction_split():
    orr = zoo.build_or(2)
    s1 = Relation(BOOL, 4, [a + b for a in orr.tuples for b in orr.tuples])
    p1, p2 = as_pair(s1), as_pair(orr)
    inst = Instance.from_names(list("abcdef"), [list("abcd"), list("cdef")])
    wits = all_witnesses(inst, p1)
    res = conjunction_split(inst, p1, p2, (2, 3), (0, 1), wits)
    assert len(res.instance.clauses) == 2
    assert all(independent_verify(res.instance, p2, k, w) for k, w in enumerate(res.witnesses))


def test_functional_guard_lift():
    eq = zoo.build_eq(2)
    s1 = Relation(BOOL, 1, [(1,)])
    ident = {(0,): 0, (1,): 1}
    one = {(0,): 1, (1,): 1}
    inst = Instance.from_names(["a", "b"], [["a"], ["b"]])
    wits = [(0, 1), (1, 0)]
    res = functional_guard_lift(inst, as_pair(s1), as_pair(eq), [[0], [0]], [ident, one], 1, wits)
    assert res.instance.n == 4 == res.notes["expected"]
    assert len(res.instance.clauses) == len(inst.clauses)
    assert all(independent_verify(res.instance, as_pair(eq), k, w) for k, w in enumerate(res.witnesses))


def test_functional_guard_lift_c2_squares_variables():
    eq = zoo.build_eq(2)
    s1 = Relation(BOOL, 2, [(0, 0), (1, 1)])
    guards = [{(a, b): a for a in (0, 1) for b in (0, 1)}, {(a, b): b for a in (0, 1) for b in (0, 1)}]
    inst = Instance.from_names(list("abc"), [["a", "b"], ["b", "c"]])
    wits = all_witnesses(inst, as_pair(s1))
    res = functional_guard_lift(inst, as_pair(s1), as_pair(eq), [[0, 1], [0, 1]], guards, 2, wits)
    assert res.instance.n == 2 * 3 ** 2
    assert all(independent_verify(res.instance, as_pair(eq), k, w) for k, w in enumerate(res.witnesses))
    with pytest.raises(DefinitionMismatch):
        functional_guard_lift(inst, as_pair(s1), as_pair(eq), [[0, 1], [0, 1]], [guards[0], guards[0]], 2, wits)


def test_existential_projection():
    s1 = Relation(BOOL, 3, [(0, 1, 0), (1, 0, 1)])
    t1 = Relation(BOOL, 3, [(0, 1, 0), (1, 0, 1), (0, 0, 0)])
    s2 = Relation(BOOL, 2, [(0, 1), (1, 0)])
    t2 = Relation(BOOL, 2, [(0, 1), (1, 0), (0, 0)])
    p1, p2 = RelationPair(s1, t1), RelationPair(s2, t2)
    inst = Instance.from_names(list("abcde"), [list("abc"), list("bde")])
    wits = all_witnesses(inst, p1)
    res = existential_projection(inst, p1, p2, (0, 1), wits)
    assert len(res.instance.clauses) == 2
    assert all(independent_verify(res.instance, p2, k, w) for k, w in enumerate(res.witnesses))


def test_cyc_star_projects_to_cycles():
    full, star = zoo.build_cyc(3)
    _, _, Ct, Cts = zoo.build_cycles(3)
    p1 = RelationPair(star, full)
    p2 = RelationPair(Cts, Ct)
    # a linear tripartite instance: no two clauses share two variables
    inst = Instance.from_names(["a0", "a1", "b0", "b1", "c0", "c1", "c2"],
                               [["a0", "b0", "c0"], ["a0", "b1", "c1"], ["a1", "b0", "c2"]])
    inst = Instance(inst.variables, inst.clauses, ((0, 1), (2, 3), (4, 5, 6)))
    wits = all_witnesses(inst, p1)
    res = existential_projection(inst, p1, p2, (0, 1), wits)
    assert len(res.instance.clauses) == len(inst.clauses)
    assert all(independent_verify(res.instance, p2, k, w) for k, w in enumerate(res.witnesses))


# ---- redundancy through pattern application ----

def test_maltsev_derives_closing_edge():
    inst = Instance.from_names(list("abcd"), [["a", "b"], ["c", "b"], ["c", "d"], ["a", "d"]])
    got = pattern_witness_redundancy(inst, per_sort(maltsev_pattern(), 2))
    assert got is not None
    inputs, out = got
    assert out not in inputs
    # a derived clause is genuinely redundant for EQ: every model of the rest satisfies it
    eq = zoo.build_eq(2)
    rest = [c for k, c in enumerate(inst.clauses) if k != out]
    for sigma in itertools.product((0, 1), repeat=4):
        if all(tuple(sigma[v] for v in c) in eq.tuples for c in rest):
            assert tuple(sigma[v] for v in inst.clauses[out]) in eq.tuples


def test_maltsev_finds_nothing_on_a_path():
    inst = Instance.from_names(list("abcd"), [["a", "b"], ["c", "b"], ["c", "d"]])
    assert pattern_witness_redundancy(inst, per_sort(maltsev_pattern(), 2)) is None


# ---- properties ----

LETTERS = "xyz"


@st.composite
def patterns(draw, n=3):
    k = draw(st.integers(1, 3))
    ids = []
    for _ in range(k):
        args = tuple(draw(st.sampled_from(LETTERS[:2])) for _ in range(n))
        out = draw(st.sampled_from(sorted(set(args))))
        ids.append((args, out))
    return Pattern(ids)


@st.composite
def bool_relations(draw, r=2):
    universe = list(itertools.product((0, 1), repeat=r))
    keep = draw(st.lists(st.sampled_from(universe), unique=True, min_size=1))
    return Relation(BOOL, r, keep)


@settings(max_examples=60, deadline=None)
@given(patterns(), bool_relations(), st.lists(st.integers(0, 2), min_size=3, max_size=3))
def test_minors_keep_invariance(P, R, h):
    if preserves(P, R).status:
        assert preserves(minor(P, h, 3), R).status


@settings(max_examples=60, deadline=None)
@given(patterns(), st.permutations(list(LETTERS[:2])), st.randoms(use_true_random=False))
def test_interpretation_is_canonical(P, perm, rnd):
    ren = dict(zip(LETTERS[:2], perm))
    ids = [(tuple(ren["xy"[v]] for v in a), ren["xy"[o]]) for a, o in P.identities]
    rnd.shuffle(ids)
    Q = Pattern(ids)
    assert Q == P
    assert interpretation(Q, BOOL).forced == interpretation(P, BOOL).forced


@settings(max_examples=60, deadline=None)
@given(patterns(), bool_relations(), st.booleans())
def test_violations_reverify(P, R, use_function):
    fs = interpret(P, BOOL)
    assume(len(fs) == 1)
    obj = fs[0] if use_function else P
    res = preserves(obj, R)
    if res.status is False:
        cert = res.certificate
        assert verify_violation(obj, R, cert)
        assert apply_fn(fs[0], cert.args) == cert.output
        assert cert.output not in R.tuples
    else:
        # no violation: exhaustive check by direct application
        for args in itertools.product(sorted(R.tuples), repeat=P.arity):
            out = apply_fn(fs[0], args)
            assert out is None or out in R.tuples


CUBE_POWERS = [(k, c) for k in (2, 3) for c in range(1, k)]


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3).flatmap(lambda r: bool_relations(r)))
def test_cube_power_family_reduces_to_arity(R):
    r = R.arity
    if r < 2:
        return
    want = preserves(power(cube_pattern(r), r - 1), R).status
    got = all(preserves(power(cube_pattern(k), c), R).status for k, c in CUBE_POWERS)
    assert want == got
    # u_k^b implies u_k^a for a <= b
    for k in (2, 3):
        for a, b in itertools.combinations(range(1, k), 2):
            if preserves(power(cube_pattern(k), b), R).status:
                assert preserves(power(cube_pattern(k), a), R).status
    # u_3^2 implies u_2^1
    if preserves(power(cube_pattern(3), 2), R).status:
        assert preserves(cube_pattern(2), R).status
