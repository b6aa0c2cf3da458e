"""The `nrd` command line: JSON payloads on stdout, exit codes 0 ok, 1 fail, 2 unknown or usage."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import catalan, embedding, hypergraph, kernel, nrd, patterns, zoo
from .groups import FiniteGroup
from .relations import (Instance, ParseError, Relation, RelationPair, complement_tilde, instance_from_json,
                        instance_to_json, pair_from_json, pair_to_json, relation_to_json, tilde_pair)

EXIT = {"ok": 0, "fail": 1, "unknown": 2}


@dataclass
class CommandResult:
    status: str
    payload: dict = field(default_factory=dict)
    summary: str = ""
    timing: float = 0.0

    @property
    def exit_code(self) -> int:
        return EXIT[self.status]


class UsageError(Exception):
    pass


def _load(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: invalid JSON ({e})") from None


def _dump(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def _pair(path) -> RelationPair:
    return pair_from_json(_load(path))


def _relation(path) -> Relation:
    """A pair file contributes its S."""
    return pair_from_json(_load(path)).s


def _instance(path) -> Instance:
    return instance_from_json(_load(path))


def _zoo_json(obj) -> dict:
    return pair_to_json(obj) if isinstance(obj, RelationPair) else relation_to_json(obj)


# ---- zoo / gen ----

def cmd_zoo(a) -> CommandResult:
    if a.action == "list":
        entries = [{"name": k, "params": v[0], "description": v[1]} for k, v in zoo.ZOO.items()]
        return CommandResult("ok", {"entries": entries}, ", ".join(zoo.ZOO))
    if not a.name:
        raise UsageError("zoo export needs --name")
    obj = zoo.zoo_build(a.name, p=a.p, q=a.q, k=a.k, m=a.m, d=a.d, sets=a.sets)
    data = _zoo_json(obj)
    if a.out:
        _dump(data, a.out)
    rel = obj.s if isinstance(obj, RelationPair) else obj
    return CommandResult("ok", data, f"{a.name}: arity {rel.arity}, {len(rel.tuples)} tuples")


def cmd_gen(a) -> CommandResult:
    warnings = []
    if a.family == "or-dp":
        inst = zoo.gen_or_dp_lower(a.p, a.q, a.n)
        pair = zoo.build_or_dp(a.p, a.q)
    elif a.family == "or-dp-f":
        fam = [tuple(int(c) for c in s) for s in (a.sets or "12,23,31").split(",")]
        F = zoo.SetFamily(a.p, len(fam[0]), tuple(fam))
        regular, _ = zoo.is_regular(F)
        if not regular:
            warnings.append("family is not q/p-regular: the matching upper bound does not apply")
        if not F.covers():
            warnings.append("family does not cover [p]: the lower-bound construction needs coverage")
        inst = zoo.gen_or_family_lower(F, a.t)
        pair = zoo.build_or_dp_family(F)
    elif a.family == "shoelace":
        inst = zoo.gen_shoelace_lower(a.t)
        pair = zoo.build_or_dp_family(zoo.SHOELACE)
    elif a.family == "girth":
        graphs = zoo.builtin_graphs()
        if a.graph not in graphs:
            raise UsageError(f"unknown graph {a.graph!r}; choose from {', '.join(graphs)}")
        inst = zoo.gen_girth_instance(graphs[a.graph])
        pair = zoo.cycle_pair(a.k)
    else:
        raise UsageError(f"unknown family {a.family!r}")
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    data = instance_to_json(inst)
    if a.out:
        _dump(data, a.out)
    if a.pair_out:
        _dump(pair_to_json(pair), a.pair_out)
    payload = {"instance": data, "clauses": len(inst.clauses), "variables": inst.n, "warnings": warnings}
    return CommandResult("ok", payload, f"{a.family}: {inst.n} variables, {len(inst.clauses)} clauses")


# ---- check / exact ----

def nrd_certificate(inst: Instance, pair: RelationPair, rep: nrd.NrdReport) -> dict:
    return {"kind": "nrd-report", "instance": instance_to_json(inst), "pair": pair_to_json(pair),
            "report": rep.to_json(inst, pair)}


def cmd_check(a) -> CommandResult:
    inst = _instance(a.instance)
    pair = _pair(a.pair)
    full = len(pair.t) == pair.domain.size ** pair.arity
    if a.conditional and full:
        raise UsageError("--conditional needs a pair file with 'scaffold_tuples'")
    if a.plain:
        pair = RelationPair.plain(pair.s)
    rep = nrd.check_nonredundant(inst, pair, cap=a.cap, jobs=a.jobs)
    cert = nrd_certificate(inst, pair, rep)
    if a.out:
        _dump(cert, a.out)
    status = {"nonredundant": "ok", "redundant": "fail", "unknown": "unknown"}[rep.status]
    summary = f"{rep.status}: {len(rep.certificates)} certificates, redundant clauses {rep.redundant_clauses()}"
    return CommandResult(status, cert, summary)


def cmd_exact(a) -> CommandResult:
    pair = _pair(a.pair)
    res = nrd.exact_nrd(pair, a.n, multipartite=a.multipartite, cap=a.cap)
    payload = {"n": a.n, "multipartite": a.multipartite, "value": res.value, "exact": res.exact,
               "clauses": [list(c) for c in res.clauses], "nodes": res.nodes}
    status = "ok" if res.exact else "unknown"
    return CommandResult(status, payload, f"NRD = {res.value}" + ("" if res.exact else " (lower bound)"))


# ---- patterns ----

def _pattern(a):
    if a.parse:
        P = patterns.Pattern.parse(a.parse)
    elif a.pattern:
        P = patterns.pattern_from_json(_load(a.pattern))
    else:
        raise UsageError("give --parse or --pattern")
    if getattr(a, "power", 1) and a.power > 1:
        if not isinstance(P, patterns.Pattern):
            raise UsageError("--power applies to single-sorted patterns")
        P = patterns.power(P, a.power)
    return P


def cmd_pattern(a) -> CommandResult:
    if a.action == "show":
        P = _pattern(a)
        return CommandResult("ok", P.to_json(), P.pretty() if isinstance(P, patterns.Pattern) else str(P))
    if a.action == "cube-bound":
        if not a.relation:
            raise UsageError("cube-bound needs --relation")
        pair = _pair(a.relation)
        res = patterns.cube_power_lower_bound(pair, a.k, a.c, cap=a.cap)
        payload = {"status": res["status"], "k": a.k, "c": a.c, "exponent": res.get("exponent")}
        if res.get("certificate") is not None:
            P = patterns.power(patterns.cube_pattern(a.k), a.c)
            tp = RelationPair(pair.s, complement_tilde(pair))
            payload["certificate"] = _violation_cert(P, tp, res["certificate"])
        status = {"violated": "ok", "preserved": "fail"}.get(res["status"], "unknown")
        return CommandResult(status, payload, f"u_{a.k}^{a.c}: {res['status']}, exponent {res.get('exponent')}")
    P = _pattern(a)
    if not a.relation:
        raise UsageError(f"pattern {a.action} needs --relation")
    pair = _pair(a.relation)
    if a.tilde:
        pair = tilde_pair(pair)
    elif len(pair.t) == pair.domain.size ** pair.arity:
        pair = pair.s
    if a.action == "cnf":
        text = patterns.export_cnf_violation(P, pair)[0]
        if a.out:
            Path(a.out).write_text(text)
        return CommandResult("ok", {"dimacs": text}, "CNF written")
    res = patterns.preserves(P, pair, cap=a.cap, enforce_caps=not a.no_caps)
    payload = {"preserved": res.status, "nodes": res.nodes}
    if res.certificate is not None:
        payload["certificate"] = _violation_cert(P, pair, res.certificate)
        if a.out:
            _dump(payload["certificate"], a.out)
    status = {True: "ok", False: "fail", None: "unknown"}[res.status]
    return CommandResult(status, payload, f"preserved: {res.status}")


def _violation_cert(P, pair, cert) -> dict:
    pr = RelationPair(pair, pair) if isinstance(pair, Relation) else pair
    return {"kind": "violation", "pattern": P.to_json(), "pair": pair_to_json(pr),
            "certificate": cert.to_json(pr.domain)}


# ---- catalan / exclude ----

def _catalan_family(term: catalan.MaltsevTerm, m_max: int) -> catalan.CatalanFamily:
    cache = os.environ.get("NRD_CACHE_DIR")
    if not cache:
        return catalan.CatalanFamily(term, m_max)
    key = hashlib.sha256(json.dumps(term.to_json(), sort_keys=True).encode()).hexdigest()[:16]
    path = Path(cache) / f"catalan-{key}-m{m_max}.json"
    fam = catalan.CatalanFamily(term, 1)
    if path.exists():
        tables = json.loads(path.read_text())
        fam.tables = {int(k): v for k, v in tables.items()}
        fam.m_max = max(fam.tables)
        return fam
    fam.extend(m_max)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({str(k): v for k, v in fam.tables.items()}))
    return fam


def _maltsev(a) -> catalan.MaltsevTerm:
    if a.maltsev.endswith(".json") or os.path.exists(a.maltsev):
        return catalan.MaltsevTerm.from_json(_load(a.maltsev))
    return catalan.maltsev_by_name(a.maltsev, seed=a.seed)


def cmd_catalan(a) -> CommandResult:
    term = _maltsev(a)
    fam = _catalan_family(term, a.mmax)
    rep = catalan.verify_catalan(fam, a.mmax)
    payload = {"kind": "catalan", "maltsev": term.to_json(), "report": rep.to_json()}
    if a.out:
        _dump(payload, a.out)
    return CommandResult("ok" if rep.ok else "fail", payload,
                         f"{term.name}: {rep.checked} checks, {len(rep.violations)} violations")


def exclusion_certificate(R: Relation, cert: catalan.ExclusionCertificate) -> dict:
    out = {"kind": "exclusion", "relation_file": relation_to_json(R)}
    out.update(cert.to_json(R.domain))
    return out


def cmd_exclude(a) -> CommandResult:
    R = _relation(a.relation)
    if a.construct:
        m = R.domain.size
        cert = catalan.build_cyc_exclusion(m)
        if not catalan.verify_exclusion(R, cert):
            raise UsageError("--construct applies to CYC*_m relation files only")
        res = catalan.ExclusionResult(cert, a.mmax, True)
    else:
        res = catalan.exclusion_search(R, m_max=a.mmax, cap=a.cap, m_min=a.mmin)
    payload = {"status": res.status, "m_max": a.mmax, "nodes": res.nodes}
    if res.certificate is not None:
        payload["certificate"] = exclusion_certificate(R, res.certificate)
        if a.out:
            _dump(payload["certificate"], a.out)
    status = {"excluded": "ok", "none-found": "fail", "unknown": "unknown"}[res.status]
    return CommandResult(status, payload, f"{res.status} (m_max {a.mmax})")


# ---- embed ----

def _embed_one(job):
    mode, rel_json, m_max, group_json = job
    R = pair_from_json(rel_json).s
    if mode == "abelian":
        rep = embedding.abelian_embedding_check(R)
    elif mode == "pauli":
        rep = embedding.pauli_embedding_check(R)
    elif mode == "balanced":
        rep = embedding.balanced_check(R, m_max)
    else:
        G = FiniteGroup.from_json(group_json)
        eta_names = group_json.get("eta")
        if not eta_names:
            raise UsageError("group file needs an 'eta' map from domain elements to group elements")
        eta = {R.domain.index(k): G.index(v) for k, v in eta_names.items()}
        rep = embedding.verify_group_embedding(R, G, eta)
    return {"kind": "embedding", "mode": mode, "relation": relation_to_json(R), "m_max": m_max,
            "group": group_json, "report": rep.to_json()}


def cmd_embed(a) -> CommandResult:
    if a.mode == "group" and not a.group:
        raise UsageError("--mode group needs --group")
    group_json = _load(a.group) if a.group else None
    jobs = [(a.mode, _load(p), a.mmax, group_json) for p in a.relation]
    if a.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=a.jobs) as ex:
            results = list(ex.map(_embed_one, jobs))
    else:
        results = [_embed_one(j) for j in jobs]
    verdicts = [r["report"]["verdict"] for r in results]
    if a.out:
        _dump(results[0] if len(results) == 1 else {"kind": "batch", "items": results}, a.out)
    status = "unknown" if None in verdicts else ("ok" if all(verdicts) else "fail")
    payload = results[0] if len(results) == 1 else {"kind": "batch", "items": results}
    return CommandResult(status, payload, f"{a.mode}: {verdicts}")


# ---- hyper ----

def cmd_hyper(a) -> CommandResult:
    if a.action == "of":
        P = patterns.pattern_from_json(_load(a.pattern)) if a.pattern else None
        if P is None and a.builtin:
            kind, _, arg = a.builtin.partition(":")
            P = {"cube": hypergraph.cube_per_sort, "nu": hypergraph.knu_per_sort,
                 "cycle": hypergraph.cycle_unit_pattern}[kind](int(arg))
        if P is None:
            raise UsageError("give --pattern or --builtin cube:K|nu:K|cycle:T")
        if isinstance(P, patterns.Pattern):
            P = patterns.per_sort(P, a.r)
        units = hypergraph.unit_decompose(P)
        hs = [hypergraph.hypergraph_of(u).to_json() for u in units]
        return CommandResult("ok", {"units": len(units), "hypergraphs": hs}, f"{len(units)} unit pattern(s)")
    if a.action == "free":
        inst = _instance(a.instance)
        H = hypergraph.PartiteHypergraph.from_json(_load(a.hypergraph))
        phi = hypergraph.hfree_check(inst, H, cap=a.cap)
        if phi == "unknown":
            return CommandResult("unknown", {"free": None}, "cap reached")
        if phi is None:
            return CommandResult("ok", {"free": True}, "H-free")
        cert = {"kind": "hypergraph-embedding", "instance": instance_to_json(inst), "hypergraph": H.to_json(),
                "phi": [[i, H.parts[i][v], inst.variables[x]] for (i, v), x in sorted(phi.items())]}
        if a.out:
            _dump(cert, a.out)
        return CommandResult("fail", {"free": False, "certificate": cert}, "contains H")
    if a.action == "ex":
        if not a.exhaustive:
            raise UsageError("hyper ex enumerates hypergraphs exhaustively; pass --exhaustive")
        if a.n > 7:
            raise UsageError("hyper ex is capped at n <= 7")
        if not a.hypergraph:
            raise UsageError("hyper ex needs --hypergraph")
        H = hypergraph.PartiteHypergraph.from_json(_load(a.hypergraph))
        value, best = hypergraph.ex_r(a.n, [H], H.r, cap=a.cap)
        payload = {"n": a.n, "r": H.r, "value": value,
                   "extremal": instance_to_json(best) if best is not None else None}
        return CommandResult("ok", payload, f"ex_{H.r}({a.n}) = {value}")
    raise UsageError(f"unknown hyper action {a.action!r}")


# ---- kernel ----

def cmd_kernel(a) -> CommandResult:
    if a.from_cnf:
        try:
            n, clauses = kernel.read_dimacs(Path(a.from_cnf).read_text())
        except FileNotFoundError:
            raise UsageError(f"no such file: {a.from_cnf}") from None
        inst = kernel.cnf_to_satdp(clauses, n, a.p, a.q)
    elif a.inp:
        inst = kernel.SatDpInstance.from_json(_load(a.inp))
    else:
        raise UsageError("give --in or --from-cnf")
    out, trace = kernel.kernelize(inst)
    if a.out:
        _dump(out.to_json(), a.out)
    cert = {"kind": "kernel", "input": inst.to_json(), "output": out.to_json(), "trace": trace.to_json()}
    if a.trace:
        _dump(cert, a.trace)
    payload = {"verdict": trace.verdict, "size": kernel.size_report(inst, out), "certificate": cert}
    return CommandResult("ok", payload, f"{trace.verdict}: {inst.size()} -> {out.size()} clauses")


# ---- verify-cert ----

def _verify_nrd(c) -> tuple[bool, str]:
    inst = instance_from_json(c["instance"])
    pair = pair_from_json(c["pair"])
    d = pair.domain
    rows = c["report"]["per_clause"]
    if len(rows) != len(inst.clauses):
        return False, "clause count mismatch"
    checked = 0
    for k, row in enumerate(rows):
        w = row["certificate"]
        if isinstance(w, str):
            if c["report"]["status"] == "nonredundant":
                return False, f"clause {k} lacks a witness"
            continue
        sigma = tuple(d.index(w["assignment"][v]) for v in inst.variables)
        wc = nrd.WitnessCertificate(k, sigma, tuple(d.index(x) for x in w["violated_value"]))
        if w["clause_index"] != k or not nrd.verify_witness(inst, pair, wc):
            return False, f"witness for clause {k} fails"
        checked += 1
    return True, f"{checked} witnesses verified"


def _verify_violation(c) -> tuple[bool, str]:
    P = patterns.pattern_from_json(c["pattern"])
    pair = pair_from_json(c["pair"])
    cert = patterns.ViolationCertificate.from_json(c["certificate"], pair.domain)
    ok = patterns.verify_violation(P, pair, cert)
    return ok, "violation reproduced" if ok else "violation does not reproduce"


def _verify_exclusion(c) -> tuple[bool, str]:
    R = pair_from_json(c["relation_file"]).s
    cert = catalan.ExclusionCertificate.from_json(c, R.domain)
    ok = catalan.verify_exclusion(R, cert)
    return ok, "exclusion verified" if ok else "exclusion fails"


def _verify_embedding(c) -> tuple[bool, str]:
    R = pair_from_json(c["relation"]).s
    rep = c["report"]
    mode = c["mode"]
    if mode == "abelian" and rep["verdict"] is False:
        d = R.domain
        for e in rep["certificate"]["extra"]:
            target = tuple(d.index(v) for v in e["tuple"])
            combo = [(x["coefficient"], tuple(d.index(v) for v in x["tuple"])) for x in e["combination"]]
            if target in R.tuples or not embedding.verify_combination(R, target, combo):
                return False, f"combination for {e['tuple']} fails"
        return True, f"{len(rep['certificate']['extra'])} integer combinations verified"
    if mode == "balanced" and rep["verdict"] is False:
        seq = [tuple(t) for t in rep["certificate"]["tuples"]]
        ok = embedding.verify_balanced_violation(R, seq)
        return ok, "alternating sum verified" if ok else "alternating sum fails"
    again = _embed_one((mode, c["relation"], c.get("m_max", 9), c.get("group")))
    ok = again["report"] == rep
    return ok, "recomputed report matches" if ok else "recomputed report differs"


def _verify_kernel(c) -> tuple[bool, str]:
    inst = kernel.SatDpInstance.from_json(c["input"])
    out = kernel.SatDpInstance.from_json(c["output"])
    trace = kernel.KernelTrace.from_json(c["trace"])
    if kernel.replay(inst, trace) != out:
        return False, "trace replay differs from the output"
    if not kernel.is_canonical_unsat(out) and not kernel.rules_exhausted(out):
        return False, "output still admits a rule"
    return True, f"replayed {len(trace.steps)} steps"


def _verify_catalan(c) -> tuple[bool, str]:
    term = catalan.MaltsevTerm.from_json(c["maltsev"])
    m = c["report"]["m_max"]
    rep = catalan.verify_catalan(catalan.CatalanFamily(term, m), m)
    ok = rep.to_json() == c["report"] and rep.ok
    return ok, "recomputed cancellation check matches" if ok else "cancellation check differs"


def _verify_hyper(c) -> tuple[bool, str]:
    inst = instance_from_json(c["instance"])
    H = hypergraph.PartiteHypergraph.from_json(c["hypergraph"])
    phi = {(i, H.parts[i].index(v)): inst.var(x) for i, v, x in c["phi"]}
    ok = hypergraph.verify_embedding(inst, H, phi)
    return ok, "embedding verified" if ok else "embedding fails"


VERIFIERS = {
    "nrd-report": _verify_nrd,
    "violation": _verify_violation,
    "exclusion": _verify_exclusion,
    "embedding": _verify_embedding,
    "kernel": _verify_kernel,
    "catalan": _verify_catalan,
    "hypergraph-embedding": _verify_hyper,
}


def verify_certificate(c: dict) -> tuple[bool, str]:
    if "payload" in c and "kind" not in c:
        c = c["payload"]
    if "kind" not in c and "certificate" in c:
        c = c["certificate"]
    kind = c.get("kind")
    if kind == "batch":
        res = [verify_certificate(x) for x in c["items"]]
        return all(ok for ok, _ in res), "; ".join(m for _, m in res)
    if kind not in VERIFIERS:
        raise UsageError(f"unknown certificate kind {kind!r}")
    return VERIFIERS[kind](c)


def cmd_verify(a) -> CommandResult:
    ok, msg = verify_certificate(_load(a.cert))
    return CommandResult("ok" if ok else "fail", {"valid": ok, "message": msg}, msg)


# ---- wiring ----

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="print a one-line summary instead of JSON")
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help="worker processes (default 1)")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomized inputs (default 0)")
    ap = argparse.ArgumentParser(prog="nrd", description="Non-redundancy toolkit.", parents=[common])
    top = ap.add_subparsers(dest="command", required=True)

    class _Sub:
        def add_parser(self, name, **kw):
            return top.add_parser(name, parents=[common], **kw)

    sub = _Sub()

    s = sub.add_parser("zoo")
    s.add_argument("action", choices=["list", "export"])
    s.add_argument("--name")
    s.add_argument("--p", type=int, default=2)
    s.add_argument("--q", type=int, default=1)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--sets")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_zoo)

    s = sub.add_parser("gen")
    s.add_argument("--family", required=True, choices=["or-dp", "or-dp-f", "shoelace", "girth"])
    s.add_argument("--p", type=int, default=2)
    s.add_argument("--q", type=int, default=1)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--t", type=int, default=2)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--sets")
    s.add_argument("--graph", default="heawood")
    s.add_argument("--out")
    s.add_argument("--pair-out")
    s.set_defaults(fn=cmd_gen)

    s = sub.add_parser("check")
    s.add_argument("--instance", required=True)
    s.add_argument("--pair", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--conditional", action="store_true")
    g.add_argument("--plain", action="store_true", help="ignore the scaffold and check (S, D^r)")
    s.add_argument("--cap", type=int, default=nrd.DEFAULT_CAP)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("exact")
    s.add_argument("--pair", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--multipartite", action="store_true")
    s.add_argument("--cap", type=int, default=200_000)
    s.set_defaults(fn=cmd_exact)

    s = sub.add_parser("pattern")
    s.add_argument("action", choices=["show", "check", "cnf", "cube-bound"])
    s.add_argument("--parse", help="identities like 'xxy->y, yxx->y'")
    s.add_argument("--pattern", help="pattern JSON file")
    s.add_argument("--power", type=int, default=1)
    s.add_argument("--relation")
    s.add_argument("--tilde", action="store_true", help="check against (S, T~)")
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--c", type=int, default=2)
    s.add_argument("--cap", type=int, default=5_000_000)
    s.add_argument("--no-caps", action="store_true")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_pattern)

    s = sub.add_parser("catalan")
    s.add_argument("action", choices=["verify"])
    s.add_argument("--maltsev", default="group:Z3", help="group:Zn, group:Sk, random:N, or a JSON file")
    s.add_argument("--mmax", type=int, default=7)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_catalan)

    s = sub.add_parser("exclude")
    s.add_argument("--relation", required=True)
    s.add_argument("--mmax", type=int, default=7)
    s.add_argument("--mmin", type=int, default=1)
    s.add_argument("--cap", type=int, default=5_000_000)
    s.add_argument("--construct", action="store_true", help="use the explicit CYC*_m matrix")
    s.add_argument("--out")
    s.set_defaults(fn=cmd_exclude)

    s = sub.add_parser("embed")
    s.add_argument("--relation", required=True, nargs="+")
    s.add_argument("--mode", required=True, choices=["abelian", "pauli", "balanced", "group"])
    s.add_argument("--group", help="JSON with elements, table and eta")
    s.add_argument("--mmax", type=int, default=9)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_embed)

    s = sub.add_parser("hyper")
    s.add_argument("action", choices=["of", "free", "ex"])
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--exhaustive", action="store_true")
    s.add_argument("--pattern")
    s.add_argument("--builtin")
    s.add_argument("--r", type=int, default=3)
    s.add_argument("--instance")
    s.add_argument("--hypergraph")
    s.add_argument("--cap", type=int, default=2_000_000)
    s.add_argument("--out")
    s.set_defaults(fn=cmd_hyper)

    s = sub.add_parser("kernel")
    s.add_argument("--in", dest="inp")
    s.add_argument("--from-cnf")
    s.add_argument("--p", type=int, default=3)
    s.add_argument("--q", type=int, default=2)
    s.add_argument("--out")
    s.add_argument("--trace")
    s.set_defaults(fn=cmd_kernel)

    s = sub.add_parser("verify-cert")
    s.add_argument("cert")
    s.set_defaults(fn=cmd_verify)
    return ap


def run(argv=None) -> CommandResult:
    args = build_parser().parse_args(argv)
    for key, default in (("quiet", False), ("jobs", 1), ("seed", 0)):
        if not hasattr(args, key):
            setattr(args, key, default)
    t0 = time.perf_counter()
    res = args.fn(args)
    res.timing = time.perf_counter() - t0
    res._quiet = args.quiet
    return res


def main(argv=None) -> int:
    try:
        res = run(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    except (UsageError, ParseError, ValueError, KeyError, catalan.NotMaltsev) as e:
        print(f"nrd: error: {e}", file=sys.stderr)
        return 2
    if res._quiet:
        print(f"{res.status}: {res.summary}")
    else:
        print(json.dumps({"status": res.status, "payload": res.payload}, indent=1))
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
