"""Command-line front end.

Exit codes: 0 ok, 2 parse, 3 geometry, 4 invariance, 5 solver or
precondition failure, 6 bound violation.
"""
import argparse
import sys

import numpy as np

from . import estimates, io, mahler
from .constants import TOL, report_tolerance
from .equipartition import solve_d2, solve_s4
from .errors import InvarianceError, MahlerError, ParseError, PreconditionError
from .fixtures import d2_vertices
from .groups import GROUP_NAMES, UnknownGroupError, group, is_invariant

EXIT_BOUND = 6
LEMMAS = ("2.4", "2.5", "2.6", "2.9", "2.10")


def _emit(report, as_json, lines):
    if as_json:
        print(io.dumps(report))
    else:
        for line in lines:
            print(line)


def _group(name):
    try:
        return group(name)
    except UnknownGroupError as exc:
        raise ParseError(str(exc), "--group") from None


def cmd_product(args):
    K = io.load_body(args.body)
    vol = K.volume()
    out = {"mode": args.mode, "volume": vol}
    if args.mode == "santalo":
        res = mahler.santalo_point(K)
        out.update(santalo=res.as_dict(), polar_volume=res.polar_volume,
                   product=vol * res.polar_volume)
    else:
        pv = K.polar_volume()
        out.update(polar_volume=pv, product=vol * pv)
    lines = [f"volume        {out['volume']:.15g}",
             f"polar volume  {out['polar_volume']:.15g}",
             f"product       {out['product']:.15g}"]
    if args.mode == "santalo":
        lines.insert(1, "santalo point " + " ".join(f"{t:.12g}" for t in out["santalo"]["z"]))
    _emit(out, args.json, lines)
    return 0


def cmd_equipartition(args):
    K = io.load_body(args.body)
    G = _group(args.group)
    if not is_invariant(G, K):
        raise InvarianceError(f"body is not {G.name}-invariant")
    if G.name == "D2":
        part = solve_d2(K, tol=args.tol)
        out = part.as_dict()
        lines = ["p        " + " ".join(f"{t:.15g}" for t in part.p),
                 "S        " + " ".join(f"{t:.15g}" for t in part.S),
                 f"residual {part.residual:.3g}",
                 f"levels   {len(part.diagnostics['levels'])}"
                 f" (eps {part.diagnostics['eps']:.3g})"]
    else:
        bal = solve_s4(K, tol=args.tol)
        out = bal.as_dict()
        lines = [f"u        {bal.u:.15g}", f"c        {bal.c_val:.15g}",
                 f"beta     {bal.beta_val:.15g}", f"residual {bal.residual:.3g}",
                 f"bracket  [{bal.bracket[0]:.6g}, {bal.bracket[1]:.6g}]"]
    out["group"] = G.name
    _emit(out, args.json, lines)
    return 0


def cmd_verify(args):
    K = io.load_body(args.body)
    G = _group(args.group)
    rep = mahler.verify(K, G, chain=not args.no_chain)
    out = rep.as_dict()
    eq = rep.equality["kind"] if rep.equality else "none"
    lines = [f"group         {rep.group}", f"volume        {rep.volume:.15g}",
             f"polar volume  {rep.polar_volume:.15g}", f"product       {rep.product:.15g}",
             f"gap           {rep.gap:.6g}", f"equality      {eq}"]
    if rep.chain:
        lines.append(f"chain bound   {rep.chain['final_bound']:.15g}"
                     f" ({'ok' if rep.chain['passed'] else 'FAILED'})")
        for s in rep.chain["steps"]:
            lines.append(f"  {s['name']:<22} slack {s['slack']: .3e}"
                         f"{'' if s['passed'] else '  FAILED'}")
    lines.extend(rep.notes)
    _emit(out, args.json, lines)
    return 0 if rep.passed else EXIT_BOUND


def cmd_sweep(args):
    if args.count < 1:
        raise ParseError("count must be at least 1", "--count")
    G = _group(args.group)
    rows = mahler.sweep(G, args.count, args.seed, args.kind, args.jobs)
    tol = report_tolerance()
    if args.kind == "smooth":
        tol = max(tol, TOL.smooth_oracle)
    summary = mahler.sweep_summary(rows, tol)
    text = mahler.rows_to_csv(rows)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        sink = sys.stdout
    else:
        sys.stdout.write(text)
        sink = sys.stderr
    print(f"min gap {summary['min_gap']:.6g} at seed {summary['argmin_seed']}; "
          f"failures {summary['failures']}; violations {summary['violations']}", file=sink)
    return EXIT_BOUND if summary["violations"] else 0


# ------------------------------------------------------------------ estimate

_NAMED = {"e1": (1, 0, 0), "e2": (0, 1, 0), "e3": (0, 0, 1)}


def _point(tok):
    sign = -1.0 if tok.startswith("-") and tok[1:] in _NAMED else 1.0
    if tok.lstrip("-") in _NAMED:
        return sign * np.array(_NAMED[tok.lstrip("-")], dtype=float)
    try:
        v = np.array([float(t) for t in tok.split(",")])
    except ValueError:
        raise ParseError(f"cannot read point {tok!r}", "points") from None
    if v.shape != (3,):
        raise ParseError(f"point {tok!r} needs three coordinates", "points")
    return v


def _points(tokens, K):
    if tokens == ["octant"]:
        return [np.eye(3)[i] for i in range(3)]
    if tokens == ["fundamental"]:
        return list(d2_vertices((1, 1, 1))[1:])
    return [_point(t) for t in tokens]


def _simplex_pairs(K):
    """a, b, a°, b° of the planar equality case for a D2 simplex diag(a,b,c) T."""
    V = K.vertices
    s = np.abs(V).max(axis=0)
    if len(V) != 4 or not np.allclose(np.sort(np.abs(V), axis=0), np.tile(s, (4, 1))):
        raise PreconditionError("'pairs' needs the simplexD2 builtin")
    _, _, vpmp, vppm = d2_vertices(s)
    return vpmp, vppm, np.array([1, -1, 1]) / (3 * s), np.array([1, 1, -1]) / (3 * s)


def cmd_estimate(args):
    K = io.load_body(args.body)
    polar = [_point(t) for t in args.polar] if args.polar else None
    if args.lemma == "2.9" and args.points == ["pairs"]:
        a, b, a0, b0 = _simplex_pairs(K)
        rep = estimates.cone_pair_2d(K, a, b, a0, b0)
    else:
        pts = _points(args.points, K)
        if args.lemma in ("2.4", "2.6", "2.9") and len(pts) != 2:
            raise ParseError(f"lemma {args.lemma} takes two points", "points")
        if args.lemma in ("2.5", "2.10") and len(pts) < 3:
            raise ParseError(f"lemma {args.lemma} takes at least three generators", "points")
        if args.lemma in ("2.4", "2.6", "2.9"):
            a, b = (K.boundary_point(p) for p in pts)
            if args.lemma == "2.4":
                rep = estimates.pairing_curve(K, a, b)
            elif args.lemma == "2.6":
                a0, b0 = polar if polar else (None, None)
                rep = estimates.section_pairing(K, a, b, a0, b0)
            else:
                a0, b0 = polar if polar else (K.lambda_map(a), K.lambda_map(b))
                rep = estimates.cone_pair_2d(K, a, b, a0, b0)
                if K.is_polytope and not polar:
                    rep.inputs["polar_rule"] = "polytope lowest-index facet"
        elif args.lemma == "2.5":
            rep = estimates.surface_estimate(K, pts)
        else:
            if polar is None:
                polar = [K.lambda_map(K.boundary_point(p)) for p in pts]
            rep = estimates.surface_estimate(K, pts, polar)
    out = rep.as_dict()
    out["lemma"] = args.lemma
    _emit(out, args.json, [f"lemma {args.lemma}", f"lhs   {rep.lhs:.15g}",
                           f"rhs   {rep.rhs:.15g}", f"slack {rep.slack:.6g}"])
    return 0 if rep.passed else EXIT_BOUND


# ------------------------------------------------------------------ entry

def build_parser():
    ap = argparse.ArgumentParser(prog="mahlerlab",
                                 description="Volume products of symmetric convex bodies.")
    sub = ap.add_subparsers(dest="command", required=True)
    groups = list(GROUP_NAMES)

    p = sub.add_parser("product", help="volume, polar volume and their product")
    p.add_argument("body", help="body JSON file or builtin name")
    p.add_argument("--mode", choices=("at-origin", "santalo"), default="at-origin")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("equipartition", help="solve for the D2 partition or the S4 balance")
    p.add_argument("body")
    p.add_argument("--group", choices=("D2", "S4"), required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_equipartition)

    p = sub.add_parser("verify", help="check the 64/9 bound with chain and equality diagnosis")
    p.add_argument("body")
    p.add_argument("--group", choices=groups, required=True)
    p.add_argument("--no-chain", action="store_true", help="skip the inequality chain")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="verify seeded random invariant bodies")
    p.add_argument("--group", choices=groups, required=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kind", choices=("polytope", "smooth"), default="polytope")
    p.add_argument("--csv", help="write rows here instead of stdout")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("estimate", help="evaluate one inequality oracle")
    p.add_argument("--lemma", choices=LEMMAS, required=True)
    p.add_argument("body")
    p.add_argument("points", nargs="+",
                   help="e1, -e2, x,y,z, 'octant', 'fundamental' or 'pairs'")
    p.add_argument("--polar", nargs="+", help="polar points or generators")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_estimate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MahlerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        diag = getattr(exc, "diagnostics", None)
        if diag:
            print(io.dumps(diag), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
