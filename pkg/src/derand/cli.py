"""Command-line front end.

Every run prints (or writes) one JSON report::

    {tool_version, anchor, command, config, seed, backend, status, result, timings}

``config`` holds the argument vector and the enumeration caps in force, so
``derand replay REPORT`` can re-run it and compare everything except
``timings``.  Exit codes: 0 ok, 1 usage or input error, 2 a verification
was refuted (or a replay differed), 3 a cap was exceeded or the instance
is infeasible.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__, caps
from .errors import CapExceeded, DerandError

REFUTED_EXIT = 2


class Refuted(Exception):
    pass


def _jsonify(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_jsonify)


def body(report: dict) -> str:
    """Canonical text of a report with timings removed (the replay key)."""
    return dumps({k: v for k, v in report.items() if k != "timings"})


def report_emit(report: dict, fmt: str = "json", path: str | None = None) -> str:
    if fmt == "json":
        text = dumps(report) + "\n"
    elif fmt == "csv":
        rows = report["result"].get("records") or [
            {k: v for k, v in report["result"].items() if not isinstance(v, (list, dict))}]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=sorted({k for r in rows for k in r}), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (json.dumps(v, default=_jsonify) if isinstance(v, (list, dict)) else v)
                        for k, v in r.items()})
        text = buf.getvalue()
    else:
        raise DerandError(f"unknown format {fmt!r}")
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


# -- handlers: each returns (anchor, result) and raises Refuted(result) on refutation

def _rng(args, label: str) -> np.random.Generator:
    from .seeds import child_rng
    return child_rng(args.rng_seed, label)


def cmd_field_check(args):
    from .field import check_axioms, gf
    res = [check_axioms(gf(q)) for q in args.q]
    out = {"records": [{"q": r["q"], "ok": r["ok"], "triples": r["triples"]} for r in res]}
    if not all(r["ok"] for r in res):
        raise Refuted("field axioms (exhaustive)", out)
    return "field axioms (exhaustive)", out


def cmd_field_arith(args):
    from .field import arith, gf
    ctx = gf(args.q)
    return "field arithmetic", {"field": ctx.spec(), "op": args.op,
                                "value": arith(ctx, args.a, args.b, args.op)}


def cmd_dist_distance(args):
    from .probdist import Dist, dist_to_minentropy, stat_distance
    a = Dist.from_json(open(args.a).read())
    out = {}
    if args.b:
        out["stat_distance"] = stat_distance(a, Dist.from_json(open(args.b).read()))
    if args.min_entropy is not None:
        out["dist_to_minentropy"] = dist_to_minentropy(a, args.min_entropy)
    return "statistical distance", out


def _make_code(args):
    from .lincode import make_code
    params = {"q": args.q, "n": args.n, "k": args.k}
    if args.kind == "gabidulin":
        params["m"] = args.m
    return make_code(args.kind, params, rng=_rng(args, "code") if args.kind == "random" else None)


def cmd_code_make(args):
    from .lincode import min_distance, write_qmatrix
    code = _make_code(args)
    if args.distance:
        min_distance(code)
    if args.matrix_out:
        with open(args.matrix_out, "w") as fh:
            write_qmatrix(code.q, code.generator, fh)
    return "linear code construction", {"code": code.describe()}


def cmd_code_distance(args):
    from .field import gf
    from .lincode import min_weight_of_span, read_qmatrix
    q, G = read_qmatrix(open(args.matrix).read())
    return "minimum distance (exhaustive)", {"q": q, "n": G.shape[1], "k": G.shape[0],
                                             "d": min_weight_of_span(gf(q), G)}


def cmd_map_audit(args):
    from .field import make_field
    from .prand import audit_map, flat_sources, guv_condenser, lhl_map
    if args.kind == "lhl":
        f = lhl_map(args.n, args.m, args.regime, k=args.k)
        anchor = "leftover hash audit"
    else:
        f = guv_condenser(make_field(2, args.field_bits), args.n, args.h, args.l, k=args.k)
        anchor = "GUV condenser audit"
    srcs = flat_sources(f.in_size, 1 << int(args.k), args.sources, _rng(args, "sources"))
    res = audit_map(f, args.k, srcs)
    res["map"] = f.descriptor()
    res["pass"] = float(res["worst"]) <= f.eps + 1e-12
    del res["errors"]
    if not res["pass"]:
        raise Refuted(anchor, res)
    return anchor, res


def cmd_map_symfix(args):
    from .lincode import min_distance, rs_code
    from .field import gf
    from .prand import audit_symbol_fixing, code_map
    code = rs_code(gf(args.q), args.n, args.k)
    min_distance(code)
    f = code_map(code, "gen-extractor")
    res = audit_symbol_fixing(f, args.free)
    res["map"] = f.descriptor()
    if res["worst"] != 0 and args.free >= args.n - code.min_distance + 1:
        raise Refuted("symbol-fixing extractor audit", res)
    return "symbol-fixing extractor audit", res


def cmd_wiretap_audit(args):
    from .wiretap import audit_resilience, check_decodability, make_scheme
    params = {"q": args.q, "n": args.n, "k": args.k, "m": args.m, "t": args.t}
    s = make_scheme(args.kind, {k: v for k, v in params.items() if v is not None})
    res = audit_resilience(s, t=args.t)
    res["scheme"] = s.describe()
    res["decodable"] = check_decodability(s)
    if not res["decodable"] or not res["floor_holds"]:
        raise Refuted("wiretap resilience audit", res)
    return "wiretap resilience audit", res


def cmd_gtest_make(args):
    from .gtest import ks_matrix, random_matrix
    if args.kind == "ks":
        from .field import gf
        from .lincode import rs_code
        mm = ks_matrix(rs_code(gf(args.q), args.n, args.k), u=args.u)
    elif args.kind == "random-disjunct":
        mm = random_matrix("disjunct", args.n, args.d, _rng(args, "gtest"), m=args.m)
    else:
        mm = random_matrix("regular", args.n, args.d, _rng(args, "gtest"), m=args.m, u=args.u)
    mm.provenance["rng_seed"] = args.rng_seed
    if args.matrix_out:
        mm.save(args.matrix_out)
    return "measurement matrix construction", {"rows": mm.m, "cols": mm.n, "claims": mm.claims,
                                               "provenance": mm.provenance}


def cmd_gtest_verify(args):
    from .gtest import REFUTED, MeasurementMatrix, verify_matrix
    mm = MeasurementMatrix.load(args.matrix)
    if args.property.startswith("resilient"):
        res = verify_matrix(mm, args.property, rng=_rng(args, "resilience"))
    else:
        res = verify_matrix(mm, args.property, all_witnesses=args.all_witnesses)
    if "witness" in res:
        res["witness_columns_1based"] = _one_based(res["witness"])
    if "witnesses" in res:
        res["witnesses_1based"] = [_one_based(w) for w in res["witnesses"]]
    if args.record:
        mm.save(args.matrix)
    if res["status"] == REFUTED:
        raise Refuted("disjunctness verification", res)
    return "disjunctness verification", res


def _one_based(w: dict) -> dict:
    return {k: ([c + 1 for c in v] if isinstance(v, list) else v + 1) for k, v in w.items() if k != "x"}


def cmd_gtest_decode(args):
    from .gtest import MeasurementMatrix, distance_decode
    mm = MeasurementMatrix.load(args.matrix)
    y = [int(c) for c in args.outcome.replace(",", "")]
    cols = distance_decode(mm, y, args.e)
    return "distance decoder", {"support_1based": [c + 1 for c in cols]}


def cmd_channel_simulate(args):
    from .chancode import bec, bsc, transmit
    ch = (bsc if args.kind == "bsc" else bec)(args.p)
    y = transmit(ch, np.zeros(args.n, dtype=np.int64), _rng(args, "channel"))
    hits = sum(1 for v in y if v is None) if args.kind == "bec" else int(np.sum(y))
    sd = math.sqrt(args.n * args.p * (1 - args.p))
    return "channel simulation", {"channel": ch.describe(), "n": args.n, "events": hits,
                                  "expected": args.n * args.p, "sigma": sd}


def cmd_channel_audit_bec(args):
    from .chancode import failing_seed_fraction
    from .prand import audit_map, lhl_map, symbol_fixing_source
    f = lhl_map(args.n, args.k)
    rng = _rng(args, "erasures")
    free = args.n - args.erased
    recs, ok = [], True
    for _ in range(args.sets):
        S = sorted(rng.choice(args.n, size=args.erased, replace=False).tolist())
        keep = [i for i in range(args.n) if i not in S]
        eps = audit_map(f, free, [symbol_fixing_source(2, args.n, keep, [0] * args.n)],
                        role="extractor")["worst"]
        frac = failing_seed_fraction(f, S)
        good = frac <= 5 * eps
        ok &= good
        recs.append({"erased": S, "eps_audited": eps, "failing_fraction": frac, "bound": 5 * eps,
                     "holds": good})
    out = {"records": recs, "mode": "exact"}
    if not ok:
        raise Refuted("BEC ensemble audit", out)
    return "BEC ensemble audit", out


def cmd_channel_audit_bsc(args):
    from .chancode import ensemble, exact_decoding_error
    from .prand import flat_sources, lhl_map, seed_errors
    f = lhl_map(args.n, args.r, "condenser", k=args.entropy)
    ens = ensemble("F", f)
    Z = flat_sources(1 << args.n, 1 << args.entropy, 1, _rng(args, "noise"))[0]
    errs = [exact_decoding_error(c, Z) for c in ens.codes]
    audit = seed_errors(f, Z, args.entropy, "lossless-condenser")
    eps = float(f.eps)
    root = math.sqrt(eps)
    bad = sum(1 for e in errs if e > root) / len(errs)
    out = {"mode": "exact", "eps_claimed": eps, "eps_audited": sum(audit) / len(audit),
           "bad_seed_fraction": bad, "allowed": 2 * root, "routes_agree": errs == audit,
           "max_error": max(errs), "rank_deficient_seeds": sum(r < args.r for r in ens.ranks)}
    if bad > 2 * root or errs != audit:
        raise Refuted("BSC ensemble audit", out)
    return "BSC ensemble audit", out


def cmd_channel_justesen(args):
    from .chancode import bsc, estimate_error, justesen_scheme
    from .prand import lhl_map
    f = lhl_map(2 * args.k, args.k)
    recs = []
    for s in args.s:
        js = justesen_scheme(args.k, s, max(1, s // 2), f)
        r = estimate_error(js, bsc(args.p), args.trials, _rng(args, f"justesen/{s}"))
        recs.append({"s": s, "N": js.N, "rate": js.rate, "failures": r["failures"],
                     "trials": r["trials"], "failure_rate": r["rate"], "interval": r["interval"]})
    dec = all(a["failure_rate"] > b["failure_rate"] for a, b in zip(recs, recs[1:]))
    out = {"records": recs, "strictly_decreasing": dec, "mode": "montecarlo"}
    return "Justesen concatenation", out


def cmd_gv_ensemble(args):
    from .gvrand import derandomized_ensemble
    from .prand import NWDesign
    kind, _, rest = args.source.partition(":")
    if kind == "rng":
        rep = derandomized_ensemble(args.n, args.k, args.count, rng_seed=int(rest))
    elif kind == "nw":
        func_file, _, design_file = rest.partition(":")
        table = [int(c) for c in open(func_file).read().split()]
        d = json.load(open(design_file))
        design = NWDesign(d["t"], d["s"], d["r"], tuple(tuple(S) for S in d["sets"]))
        rep = derandomized_ensemble(args.n, args.k, args.count, f=table, design=design)
    else:
        raise DerandError(f"unknown source {args.source!r}")
    return "Gilbert-Varshamov ensemble", rep.to_dict()


# -- parser -----------------------------------------------------------------

def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="derand", description="Pseudorandom objects and the codes and tests built from them.")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--backend", choices=["rational", "double"], default="rational")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", help="write the report here instead of stdout")
    top = p.add_subparsers(dest="group")

    def verb(group, name, fn, **kw):
        sp = group.add_parser(name, **kw)
        sp.set_defaults(fn=fn)
        return sp

    g = top.add_parser("field").add_subparsers(dest="verb")
    s = verb(g, "check", cmd_field_check)
    s.add_argument("--q", type=_ints, default=[2, 4, 8, 16, 7])
    s = verb(g, "arith", cmd_field_arith)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--op", choices=["add", "sub", "mul", "inv", "pow"], required=True)
    s.add_argument("a", type=int)
    s.add_argument("b", type=int, nargs="?")

    g = top.add_parser("dist").add_subparsers(dest="verb")
    s = verb(g, "distance", cmd_dist_distance)
    s.add_argument("--a", required=True)
    s.add_argument("--b")
    s.add_argument("--min-entropy", type=float)

    g = top.add_parser("code").add_subparsers(dest="verb")
    s = verb(g, "make", cmd_code_make)
    s.add_argument("--kind", choices=["rs", "hadamard", "random", "gabidulin"], required=True)
    s.add_argument("--q", type=int, default=2)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--distance", action="store_true")
    s.add_argument("--matrix-out")
    s = verb(g, "distance", cmd_code_distance)
    s.add_argument("--matrix", required=True)

    g = top.add_parser("map").add_subparsers(dest="verb")
    s = verb(g, "audit", cmd_map_audit)
    s.add_argument("--kind", choices=["lhl", "guv"], default="lhl")
    s.add_argument("--regime", choices=["extractor", "condenser"], default="extractor")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, default=1)
    s.add_argument("--k", type=float, required=True)
    s.add_argument("--h", type=int, default=2)
    s.add_argument("--l", type=int, default=4)
    s.add_argument("--field-bits", type=int, default=4)
    s.add_argument("--sources", type=int, default=100)
    s = verb(g, "symfix", cmd_map_symfix)
    s.add_argument("--q", type=int, default=7)
    s.add_argument("--n", type=int, default=7)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--free", type=int, default=3)

    g = top.add_parser("wiretap").add_subparsers(dest="verb")
    s = verb(g, "audit", cmd_wiretap_audit)
    s.add_argument("--kind", choices=["mds", "gabidulin", "side-channel"], required=True)
    for name in ("q", "n", "k", "m", "t"):
        s.add_argument(f"--{name}", type=int)

    g = top.add_parser("gtest").add_subparsers(dest="verb")
    s = verb(g, "make", cmd_gtest_make)
    s.add_argument("--kind", choices=["ks", "random-disjunct", "random-regular"], required=True)
    s.add_argument("--q", type=int, default=4)
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--u", type=int, default=1)
    s.add_argument("--m", type=int)
    s.add_argument("--matrix-out")
    s = verb(g, "verify", cmd_gtest_verify)
    s.add_argument("--matrix", required=True)
    s.add_argument("--property", required=True)
    s.add_argument("--record", action="store_true", help="update the claims side-car file")
    s.add_argument("--all-witnesses", action="store_true",
                   help="list the first violation for every column (or column set) instead of stopping")
    s = verb(g, "decode", cmd_gtest_decode)
    s.add_argument("--matrix", required=True)
    s.add_argument("--outcome", required=True)
    s.add_argument("--e", type=int, default=0)

    g = top.add_parser("channel").add_subparsers(dest="verb")
    s = verb(g, "simulate", cmd_channel_simulate)
    s.add_argument("--kind", choices=["bec", "bsc"], default="bsc")
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--n", type=int, default=10000)
    s = verb(g, "audit-bec", cmd_channel_audit_bec)
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--erased", type=int, default=5)
    s.add_argument("--sets", type=int, default=20)
    s = verb(g, "audit-bsc", cmd_channel_audit_bsc)
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--r", type=int, default=8)
    s.add_argument("--entropy", type=int, default=3)
    s = verb(g, "justesen", cmd_channel_justesen)
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--s", type=_ints, default=[4, 8, 16])
    s.add_argument("--p", type=float, default=0.05)
    s.add_argument("--trials", type=int, default=10000)

    g = top.add_parser("gv").add_subparsers(dest="verb")
    s = verb(g, "ensemble", cmd_gv_ensemble)
    s.add_argument("--n", type=int, default=14)
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--count", type=int, default=200)
    s.add_argument("--source", default="rng:0")

    s = top.add_parser("replay", help="re-run a report's configuration and compare")
    s.add_argument("report")
    return p


def run(argv: list[str]) -> tuple[int, dict | None]:
    """Execute one command; returns (exit code, report)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return (0 if e.code == 0 else 1), None
    if args.group is None or (args.group != "replay" and getattr(args, "fn", None) is None):
        parser.print_usage(sys.stderr)
        return 1, None
    if args.group == "replay":
        return replay(args.report)
    config = {"argv": _strip_out(argv), "caps": caps.snapshot(), "backend": args.backend,
              "rng_seed": args.rng_seed}
    t0 = time.perf_counter()
    status, code = "ok", 0
    try:
        anchor, result = args.fn(args)
    except Refuted as r:
        (anchor, result), status, code = r.args, "refuted", REFUTED_EXIT
    except CapExceeded as e:
        anchor, result, status, code = args.fn.__name__, {"error": type(e).__name__, "message": str(e)}, "cap", 3
    except (DerandError, ValueError, OSError) as e:
        print(f"derand: {type(e).__name__}: {e}", file=sys.stderr)
        return 1, None
    report = {"tool_version": __version__, "anchor": anchor, "command": [args.group, args.verb],
              "config": config, "seed": args.rng_seed, "backend": args.backend, "status": status,
              "result": result, "timings": {"wall_s": time.perf_counter() - t0}}
    report_emit(report, args.format, args.out)
    return code, report


def _strip_out(argv) -> list[str]:
    """Drop --out so a replay never overwrites the report it checks."""
    clean, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--out":
            skip = True
        elif not a.startswith("--out="):
            clean.append(a)
    return clean


def replay(path: str) -> tuple[int, dict]:
    old = json.load(open(path))
    cfg = old["config"]
    clean = _strip_out(cfg["argv"])
    saved = dict(caps._overrides)
    caps.set_caps(**cfg["caps"])
    try:
        buf = io.StringIO()
        real, sys.stdout = sys.stdout, buf
        try:
            _, new = run(clean)
        finally:
            sys.stdout = real
    finally:
        caps._overrides.clear()
        caps._overrides.update(saved)
    same = new is not None and body(new) == body(json.loads(dumps(old)))
    rep = {"replay_of": path, "identical": same}
    print(dumps(rep))
    return (0 if same else REFUTED_EXIT), rep


def main(argv: list[str] | None = None) -> int:
    code, _ = run(sys.argv[1:] if argv is None else argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
