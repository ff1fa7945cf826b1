"""Command-line interface.

Exit codes: 0 success / Consistent / pass, 1 check failed / Inconsistent,
2 usage or input error, 3 Inconclusive.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import einstein, equivalence, invariants1, invariants2, metrics
from . import transform as transform_mod
from .errors import G2InvError, InsufficientCoverageError

SECOND_ORDER_COLUMNS = (
    ["X_" + k for k in invariants1.FUNDAMENTAL_IDS]
    + ["Xperp_" + k for k in invariants1.FUNDAMENTAL_IDS]
    + ["C_ric", "Q_ric", "C_nu", "C_nu_prime", "Q_nu",
       "K_Xi", "K_Xiperp", "J1", "J2"])


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return value


def dumps(obj, indent=0):
    """Deterministic JSON with floats at 17 significant digits."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = ",\n".join(f'{pad} "{k}": {dumps(v, indent + 1).lstrip()}'
                           for k, v in obj.items())
        return f"{pad}{{\n{items}\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        items = ",\n".join(dumps(v, indent + 1) for v in obj)
        return f"{pad}[\n{items}\n{pad}]"
    if isinstance(obj, bool) or obj is None:
        return pad + {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return pad + str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return pad + _fmt(float(obj))
    return pad + '"' + str(obj).replace('"', '\\"') + '"'


def _parse_point(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected t1,t2 got {text!r}")
    return (float(parts[0]), float(parts[1]))


def _parse_range(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected a:b:n got {text!r}")
    return (float(parts[0]), float(parts[1]), int(parts[2]))


def _resolve_points(args, m):
    spec = getattr(args, "points", None) or "grid"
    if spec != "grid":
        return [_parse_point(p) for p in spec.split(";") if p]
    rect = metrics.default_domain(m)
    if rect is None:
        raise G2InvError(
            "metric has no known sampling domain; pass explicit "
            "--points t1,t2;t1,t2;...")
    n = getattr(args, "grid", None) or 4
    return metrics.grid_points(rect, n, margin=0.05)


def _emit(args, report):
    text = dumps(report) + "\n" if getattr(args, "json", False) \
        else _plain(report) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _plain(obj, key="", depth=0):
    pad = "  " * depth
    if isinstance(obj, dict):
        lines = []
        for k, v in obj.items():
            if isinstance(v, (dict, list, tuple)):
                lines.append(f"{pad}{k}:")
                lines.append(_plain(v, depth=depth + 1))
            else:
                lines.append(f"{pad}{k}: {_fmt(v)}")
        return "\n".join(lines)
    if isinstance(obj, (list, tuple)):
        return "\n".join(_plain(v, depth=depth) if isinstance(v, (dict, list))
                         else f"{pad}- {_fmt(v)}" for v in obj)
    return f"{pad}{_fmt(obj)}"


def cmd_invariants(args):
    m = metrics.load_metric(args.metric)
    pj = metrics.point_jets(m, args.at, order=max(2, args.order),
                            method=args.method)
    jv = invariants1.first_invariant_jets(pj)
    report = {
        "command": "invariants",
        "metric": m.name,
        "point": list(args.at),
        "order": args.order,
        "fundamentals": {k: jv[k].value
                         for k in invariants1.FUNDAMENTAL_IDS},
    }
    if args.order >= 2:
        sec = invariants2.second_invariants_from_jets(pj)
        report["second_order"] = {
            **{"X_" + k: sec.XI[k] for k in invariants1.FUNDAMENTAL_IDS},
            **{"Xperp_" + k: sec.XperpI[k]
               for k in invariants1.FUNDAMENTAL_IDS},
            "C_ric": sec.C_ric, "Q_ric": sec.Q_ric,
            "C_nu": sec.C_nu, "C_nu_prime": sec.C_nu_prime,
            "Q_nu": sec.Q_nu, "K_Xi": sec.K_Xi, "K_Xiperp": sec.K_Xiperp,
            "J1": sec.J1, "J2": sec.J2,
        }
    _emit(args, report)
    return 0


def cmd_grid(args):
    m = metrics.load_metric(args.metric)
    a1, b1, n1 = args.t1
    a2, b2, n2 = args.t2
    points = [(x, y) for x in np.linspace(a1, b1, n1)
              for y in np.linspace(a2, b2, n2)]
    rows = []
    for pt in points:
        row = {"t1": pt[0], "t2": pt[1]}
        try:
            pj = metrics.point_jets(m, pt, order=2, method=args.method)
            jv = invariants1.first_invariant_jets(pj)
            for k in invariants1.FUNDAMENTAL_IDS:
                row[k] = jv[k].value
            if args.order >= 2:
                sec = invariants2.second_invariants_from_jets(pj)
                for k in invariants1.FUNDAMENTAL_IDS:
                    row["X_" + k] = sec.XI[k]
                    row["Xperp_" + k] = sec.XperpI[k]
                for k in ("C_ric", "Q_ric", "C_nu", "C_nu_prime", "Q_nu",
                          "K_Xi", "K_Xiperp", "J1", "J2"):
                    row[k] = getattr(sec, k)
        except G2InvError:
            for k in invariants1.FUNDAMENTAL_IDS:
                row[k] = None
        rows.append(row)
    columns = ["t1", "t2"] + list(invariants1.FUNDAMENTAL_IDS)
    if args.order >= 2:
        columns += SECOND_ORDER_COLUMNS
    if args.csv:
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(
                "nan" if row.get(c) is None else _fmt(float(row.get(c)))
                for c in columns))
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        args.json = True
        _emit(args, {"command": "grid", "metric": m.name,
                     "columns": columns, "rows": rows})
    return 0


def cmd_check_einstein(args):
    m = metrics.load_metric(args.metric)
    points = _resolve_points(args, m)
    rows = []
    worst = 0.0
    for pt in points:
        res = einstein.residual(m, args.lam, pt, method=args.method)
        worst = max(worst, res.normalized)
        rows.append({"point": list(pt), "normalized": res.normalized,
                     "max_abs": res.max_abs, "scale": res.scale})
    ok = worst < args.tol
    _emit(args, {"command": "check-einstein", "metric": m.name,
                 "lambda": args.lam, "tol": args.tol,
                 "max_normalized": worst, "pass": ok, "points": rows})
    return 0 if ok else 1


def cmd_check_relations(args):
    m = metrics.load_metric(args.metric)
    points = _resolve_points(args, m)
    report = {"command": "check-relations", "metric": m.name}
    ok = True
    if not (args.first or args.second or args.onshell):
        args.first = args.second = True
    if args.first:
        rows = []
        worst = 0.0
        for pt in points:
            pj = metrics.point_jets(m, pt, order=2, method=args.method)
            rep = invariants1.relations_first(pj)
            worst = max(worst, rep["max_residual"])
            rows.append({"point": list(pt), **{
                r["id"]: ("skipped" if r["skipped"] else r["residual"])
                for r in rep["relations"]}})
        report["first_order"] = {"max_residual": worst,
                                 "pass": worst < args.tol, "points": rows}
        ok = ok and worst < args.tol
    if args.second:
        rep = invariants2.relations_second(m, points, tol=args.tol,
                                           method=args.method)
        report["second_order"] = {
            "max_residual": rep["max_residual"], "pass": rep["pass"],
            "points": [{"point": list(r["point"]), "q_ric": r["q_ric"],
                        "q_nu": r["q_nu"], "commutator": r["commutator"]}
                       for r in rep["points"]]}
        ok = ok and rep["pass"]
    if args.onshell:
        rep = einstein.onshell_relations(m, args.lam, points, tol=args.tol,
                                         method=args.method)
        report["onshell"] = {
            "max_residual": rep["max_residual"], "pass": rep["pass"],
            "points": [{"point": list(r["point"]),
                        **r["residuals"],
                        "gauss_equality": r["gauss_curvature_equality"],
                        "einstein_normalized": r["einstein_normalized"]}
                       for r in rep["points"]]}
        ok = ok and rep["pass"]
    report["pass"] = ok
    _emit(args, report)
    return 0 if ok else 1


def cmd_rank(args):
    which = args.set
    order = 2 if which == "order2_20" else 1
    if args.random is not None:
        probe = invariants1.random_point_jets(args.random, order=order,
                                              transitive=which.endswith(
                                                  "transitive"))
    else:
        if args.metric is None:
            raise G2InvError("rank needs a metric file or --random SEED")
        m = metrics.load_metric(args.metric)
        at = args.at
        if at is None:
            dom = metrics.default_domain(m)
            if dom is None:
                raise G2InvError(
                    "metric has no known sampling domain; pass --at t1,t2")
            at = (sum(dom[0]) / 2, sum(dom[1]) / 2)
        probe = metrics.point_jets(m, at, order=order)
    rank = invariants1.jacobian_rank(which, probe, eps=args.eps)
    expected = {"fundamental6": 6, "fundamental6_transitive": 4,
                "order2_20": 20}[which]
    _emit(args, {"command": "rank", "set": which, "rank": rank,
                 "expected_generic": expected})
    return 0 if rank == expected else 1


def cmd_transform(args):
    m = metrics.load_metric(args.metric)
    p = transform_mod.load_transform(args.transform)
    points = _resolve_points(args, m)
    if args.report_invariance:
        rep = transform_mod.invariance_report(m, p, points, tol=args.tol)
        _emit(args, {"command": "transform", "metric": m.name,
                     "max_invariant_residual": rep["max_invariant_residual"],
                     "sign_laws_pass": rep["sign_laws_pass"],
                     "pass": rep["pass"],
                     "points": [{"point": list(r["point"]),
                                 "eps1": r["eps1"], "eps2": r["eps2"],
                                 "invariant_residual":
                                     r["invariant_residual"],
                                 "frame_residual": r["frame_residual"]}
                                for r in rep["points"]]})
        return 0 if rep["pass"] else 1
    rows = []
    for pt in points:
        pj = transform_mod.pushforward_jets(
            metrics.point_jets(m, pt, order=2), p)
        jv = invariants1.first_invariant_jets(pj)
        rows.append({"point": list(pt), "image": list(pj.point),
                     **{k: jv[k].value
                        for k in invariants1.FUNDAMENTAL_IDS}})
    _emit(args, {"command": "transform", "metric": m.name, "points": rows})
    return 0


def _parse_rect(text):
    t1, t2 = text.split(",")
    a, b = (float(x) for x in t1.split(":"))
    c, d = (float(x) for x in t2.split(":"))
    return ((a, b), (c, d))


def cmd_equiv(args):
    ma = metrics.load_metric(args.metric_a)
    mb = metrics.load_metric(args.metric_b)
    pair = tuple(args.pair.split(","))
    verdict = equivalence.compare_metrics(
        ma, mb, pair=pair, n=args.grid, tol=args.tol,
        rect_a=_parse_rect(args.rect_a) if args.rect_a else None,
        rect_b=_parse_rect(args.rect_b) if args.rect_b else None)
    _emit(args, {"command": "equiv", "metric_a": ma.name,
                 "metric_b": mb.name, "verdict": verdict.verdict,
                 "coverage_a": verdict.coverage_a,
                 "coverage_b": verdict.coverage_b,
                 "max_discrepancy": verdict.max_discrepancy,
                 "witness": verdict.witness, "note": verdict.note})
    return verdict.exit_code()


def cmd_catalog(args):
    if args.name is None:
        _emit(args, {"command": "catalog",
                     "names": list(metrics.CATALOG_NAMES)})
        return 0
    params = {}
    for item in args.param or []:
        key, _, val = item.partition("=")
        params[key] = float(val)
    m = metrics.catalog(args.name, params)
    doc = m.to_document()
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(dumps(doc) + "\n")
    else:
        _emit(args, doc)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="g2inv",
        description="Differential invariants and equivalence of 4D "
                    "metrics with two commuting Killing vectors")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, method=True):
        p.add_argument("--json", action="store_true",
                       help="machine-readable report")
        p.add_argument("--out", help="write the report to a file")
        if method:
            p.add_argument("--method", choices=("analytic", "fd"),
                           default="analytic",
                           help="jet engine: analytic or finite differences")

    p = sub.add_parser("invariants", help="invariants at a point")
    p.add_argument("metric")
    p.add_argument("--at", type=_parse_point, required=True)
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    common(p)
    p.set_defaults(fn=cmd_invariants)

    p = sub.add_parser("grid", help="invariants over a grid")
    p.add_argument("metric")
    p.add_argument("--t1", type=_parse_range, required=True,
                   metavar="a:b:n")
    p.add_argument("--t2", type=_parse_range, required=True,
                   metavar="a:b:n")
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    p.add_argument("--csv", action="store_true")
    common(p)
    p.set_defaults(fn=cmd_grid)

    p = sub.add_parser("check-einstein", help="Lambda-vacuum residuals")
    p.add_argument("metric")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--points", default="grid",
                   help='"t1,t2;t1,t2;..." or "grid"')
    p.add_argument("--grid", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-8)
    common(p)
    p.set_defaults(fn=cmd_check_einstein)

    p = sub.add_parser("check-relations", help="functional relation suites")
    p.add_argument("metric")
    p.add_argument("--first", action="store_true")
    p.add_argument("--second", action="store_true")
    p.add_argument("--onshell", action="store_true")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--points", default="grid")
    p.add_argument("--grid", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-7)
    common(p)
    p.set_defaults(fn=cmd_check_relations)

    p = sub.add_parser("rank", help="numerical independence ranks")
    p.add_argument("metric", nargs="?")
    p.add_argument("--random", type=int, metavar="SEED")
    p.add_argument("--at", type=_parse_point)
    p.add_argument("--set", required=True,
                   choices=("fundamental6", "fundamental6_transitive",
                            "order2_20"))
    p.add_argument("--eps", type=float, default=1e-6)
    common(p, method=False)
    p.set_defaults(fn=cmd_rank)

    p = sub.add_parser("transform", help="pushforward and invariance")
    p.add_argument("metric")
    p.add_argument("transform")
    p.add_argument("--report-invariance", action="store_true")
    p.add_argument("--points", default="grid")
    p.add_argument("--grid", type=int, default=3)
    p.add_argument("--tol", type=float, default=1e-7)
    common(p, method=False)
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("equiv", help="signature comparison of two metrics")
    p.add_argument("metric_a")
    p.add_argument("metric_b")
    p.add_argument("--pair", default="Crho,lC")
    p.add_argument("--grid", type=int, default=12)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--rect-a", metavar="a:b,c:d",
                   help="sampling rectangle for metric A")
    p.add_argument("--rect-b", metavar="a:b,c:d",
                   help="sampling rectangle for metric B")
    common(p, method=False)
    p.set_defaults(fn=cmd_equiv)

    p = sub.add_parser("catalog", help="built-in solution catalog")
    p.add_argument("name", nargs="?")
    p.add_argument("--param", action="append", metavar="k=v")
    p.add_argument("--emit", metavar="FILE")
    common(p, method=False)
    p.set_defaults(fn=cmd_catalog)
    return ap


def run(argv):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as err:
        return 2 if err.code not in (0, None) else 0
    try:
        return args.fn(args)
    except InsufficientCoverageError as err:
        sys.stderr.write(f"error: {err}\n")
        return 3
    except (G2InvError, OSError, ValueError) as err:
        sys.stderr.write(f"error: {err}\n")
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
