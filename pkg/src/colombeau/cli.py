"""Command-line front end.

Exit codes: 0 yes / success, 1 no / failed check, 2 inconclusive,
64 usage or input errors, 70 internal errors.  Failures print a JSON error
document on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import traceback

import numpy as np

from . import expr as E
from .association import TestFunction, battery, ck_associated, is_associated, limit_from_values, pairing_sequence
from .asymptotics import classify_moderate, classify_negligible
from .config import RunConfig, load_config
from .demos import DEMOS, run_demo, summary_text
from .dsl import from_doc, parse, to_text
from .embedding import embed_distribution
from .errors import ColombeauError, ParameterError, ParseError
from .nets import ChartDomain, EpsilonGrid, Representative
from .reports import json_text, write_csv, write_json

EXIT_USAGE = 64
EXIT_INTERNAL = 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let values such as "-1,1" or "-1,1;-2,2" follow an option without "="
        self._negative_number_matcher = re.compile(r"^-[\d.][\d.,;eE+-]*$")

    def error(self, message):
        raise UsageError(message)


def _error_document(kind, message, code):
    return json.dumps({"error": {"type": kind, "message": message, "exit_code": code}}, sort_keys=True)


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------

def _box(text):
    """``"a,b;c,d"`` -> ((a, b), (c, d))."""
    try:
        sides = [tuple(float(v) for v in part.split(",")) for part in text.split(";")]
    except ValueError as exc:
        raise ParseError(f"cannot read box {text!r}: {exc}") from exc
    if any(len(s) != 2 for s in sides):
        raise ParseError(f"box sides must be 'a,b', got {text!r}")
    return tuple(sides)


def _floats(text, n=None):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ParseError(f"cannot read numbers from {text!r}") from exc
    if n is not None and len(vals) != n:
        raise ParseError(f"expected {n} numbers, got {len(vals)} in {text!r}")
    return vals


def _read_text(arg):
    """An argument that is either a path to an existing file or literal text."""
    if os.path.isfile(arg):
        with open(arg, encoding="utf-8") as fh:
            return fh.read()
    return arg


def _expression(arg, names, mollifier):
    text = _read_text(arg).strip()
    if text.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON expression document: {exc}") from exc
        return from_doc(doc, names)
    return parse(text, names, mollifier)


def _domain(args, K):
    names = tuple(args.vars.split(","))
    if args.domain:
        bounds = _box(args.domain)
    else:
        bounds = tuple((a - 1.0, b + 1.0) for a, b in K)
    if len(bounds) != len(names):
        raise ParseError(f"{len(names)} coordinate names but a {len(bounds)}-dimensional domain")
    return ChartDomain.box(bounds, names)


def _config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    changes = {}
    if args.grid:
        g = EpsilonGrid.parse(args.grid)
        changes.update(eps_max=g.eps_max, ratio=g.ratio, count=g.count)
    if args.mollifier_q is not None:
        changes["mollifier_q"] = args.mollifier_q
    if args.out:
        changes["out"] = args.out
    return cfg.replace(**changes)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_classify(args, cfg):
    K = _box(args.box)
    dom = _domain(args, K)
    rep = Representative.scalar(_expression(args.expr, dom.names, cfg.mollifier), dom)
    if args.mode == "moderate":
        v = classify_moderate(rep, K, args.alpha_max, cfg.grid, cfg.tolerances)
    else:
        v = classify_negligible(rep, K, args.m_max, cfg.grid, assume_moderate=args.alpha_max == 0,
                                alpha_max=args.alpha_max, tol=cfg.tolerances)
    keys = list(v.values)
    write_csv(os.path.join(cfg.out, "classify.csv"), ["eps"] + [f"sup_{k}" for k in keys],
              [[e] + [v.values[k][j] for k in keys] for j, e in enumerate(cfg.grid)])
    doc = v.to_dict()
    write_json(os.path.join(cfg.out, "classify.json"), doc)
    sys.stdout.write(json_text(doc))
    return v.answer.exit_code


def cmd_embed(args, cfg):
    names = (args.var,)
    lo, hi, n = _floats(args.x, 3)
    dom = ChartDomain.interval(lo - 1.0, hi + 1.0, args.var)
    rep = embed_distribution(_read_text(args.dist).strip(), cfg.mollifier, dom, eps_max=cfg.eps_max)
    xs = np.linspace(lo, hi, int(n))
    rows = []
    for eps in cfg.grid:
        vals = rep.eval_many(eps, xs[:, None])
        rows.extend([eps, x, val] for x, val in zip(xs, vals))
    write_csv(os.path.join(cfg.out, "embed.csv"), ["eps", args.var, "value"], rows)
    doc = {"expression": to_text(rep.expr, names)}
    write_json(os.path.join(cfg.out, "embed.json"), doc)
    sys.stdout.write(json_text(doc))
    return 0


def cmd_pair(args, cfg):
    c, w = _floats(args.test, 2)
    phi = TestFunction(c, w)
    K = ((c - w, c + w),)
    dom = _domain(args, K)
    rep = Representative.scalar(_expression(args.expr, dom.names, cfg.mollifier), dom)
    vals = pairing_sequence(rep, phi, cfg.grid)
    lim = limit_from_values(vals, cfg.tolerances)
    write_csv(os.path.join(cfg.out, "pair.csv"), ["eps", "pairing"], list(zip(cfg.grid, vals)))
    doc = {"test_function": phi.label(), "limit": lim.limit, "converged": lim.converged,
           "accelerated": lim.accelerated, "spread": lim.spread}
    write_json(os.path.join(cfg.out, "pair.json"), doc)
    sys.stdout.write(json_text(doc))
    return 0 if lim.converged else 2


def cmd_associate(args, cfg):
    K = _box(args.box)
    dom = _domain(args, K)
    u = Representative.scalar(_expression(args.left, dom.names, cfg.mollifier), dom)
    v = Representative.scalar(_expression(args.right, dom.names, cfg.mollifier), dom)
    if args.ck is not None:
        verdict = ck_associated(u, v, args.ck, K, cfg.grid, cfg.tolerances)
        keys = list(verdict.values)
        write_csv(os.path.join(cfg.out, "associate.csv"), ["eps"] + [f"sup_{k}" for k in keys],
                  [[e] + [verdict.values[k][j] for k in keys] for j, e in enumerate(cfg.grid)])
    else:
        verdict = is_associated(u, v, battery(K[0]), cfg.grid, cfg.tolerances)
        keys = list(verdict.values)
        write_csv(os.path.join(cfg.out, "associate.csv"), ["eps"] + keys,
                  [[e] + [verdict.values[k][j] for k in keys] for j, e in enumerate(cfg.grid)])
    doc = verdict.to_dict()
    if verdict.limits:
        doc["limits"] = {k: {"limit": l, "converged": c} for k, (l, c) in verdict.limits.items()}
    write_json(os.path.join(cfg.out, "associate.json"), doc)
    sys.stdout.write(json_text(doc))
    return verdict.answer.exit_code


def _metric_from_document(text, cfg):
    try:
        doc = json.loads(text)
        names = tuple(doc["names"])
        dom = ChartDomain.box(doc["domain"], names)
        rows = [[parse(c, names, cfg.mollifier) if isinstance(c, str) else E.Const(float(c)) for c in row]
                for row in doc["g"]]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed metric document: {exc}") from exc
    return Representative.matrix(rows, dom)


def cmd_geodesic(args, cfg):
    from .geometry import check_metric, geodesic_net, pp_wave_components

    if args.metric:
        g = _metric_from_document(_read_text(args.metric), cfg)
    else:
        g = pp_wave_components(args.ppwave or cfg.profile, cfg.mollifier)
    G = check_metric(g, cfg.grid)
    p0 = _floats(args.p0, G.n)
    v0 = _floats(args.v0, G.n)
    t_span = _floats(args.tspan, 2)
    curve, rep = geodesic_net(G, p0, v0, cfg.grid, t_span, rtol=cfg.ode_rtol)
    names = list(G.domain.names)
    times = rep.times
    rows = []
    for c, eps in zip(curve.curves, cfg.grid):
        P, V = c.position(times), c.velocity(times)
        rows.extend([eps, t, *P[:, k], *V[:, k]] for k, t in enumerate(times))
    write_csv(os.path.join(cfg.out, "geodesic.csv"), ["eps", "t"] + names + ["d" + n for n in names], rows)
    write_csv(os.path.join(cfg.out, "geodesic_limit.csv"), ["t"] + names,
              [[t, *p] for t, p in zip(times, rep.limit)])
    doc = {"index": G.index, "det": G.det.render(names), "c_bounded": curve.bounded,
           "hull": curve.hull, "truncated": any(curve.truncated), **rep.to_dict()}
    write_json(os.path.join(cfg.out, "geodesic.json"), doc)
    sys.stdout.write(json_text(doc))
    return 0 if (rep.converged and curve.bounded) else 2


def cmd_flow(args, cfg):
    from .flows import GeneralizedVectorField, flow_identities, flow_net, torus_field

    if args.field:
        try:
            doc = json.loads(_read_text(args.field))
            names = tuple(doc["names"])
            dom = ChartDomain.torus(names) if doc.get("periodic") else ChartDomain.box(doc["domain"], names)
            exprs = [parse(c, names, cfg.mollifier) for c in doc["xi"]]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed field document: {exc}") from exc
        xi = GeneralizedVectorField.from_exprs(exprs, dom)
    else:
        xi = torus_field(cfg.mollifier)
    lattice = None
    if args.lattice:
        lattice = np.array([_floats(p, xi.n) for p in args.lattice.split(";")])
    t_span = _floats(args.tspan, 2)
    phi = flow_net(xi, cfg.grid, t_span, lattice, cfg.ode_rtol)
    times = np.linspace(t_span[0], t_span[1], args.times)
    names = list(xi.domain.names)
    rows = []
    for j, eps in enumerate(cfg.grid):
        for t in times:
            for p0, p in zip(phi.lattice, phi.reported(j, t)):
                rows.append([eps, t, *p0, *p])
    write_csv(os.path.join(cfg.out, "flow.csv"), ["eps", "t"] + [n + "0" for n in names] + names, rows)
    ident = flow_identities(phi)
    doc = {"truncated": any(phi.truncated.values()), **ident}
    write_json(os.path.join(cfg.out, "flow.json"), doc)
    sys.stdout.write(json_text(doc))
    return 2 if doc["truncated"] else 0


def cmd_demo(args, cfg):
    if args.profile:
        cfg = cfg.replace(profile=args.profile)
    out = os.path.join(cfg.out, args.name)
    doc = run_demo(args.name, cfg, out)
    sys.stdout.write(summary_text(doc))
    return 0 if doc["passed"] else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="colombeau", description="Generalized functions as computable epsilon-nets.")
    p.add_argument("--grid", help="eps grid 'eps_max,ratio,count' (default 0.5,0.7,24)")
    p.add_argument("--mollifier-q", type=int, help="number of vanishing kernel moments")
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", help="key = value configuration file")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--vars", default="x", help="comma-separated coordinate names")
        sp.add_argument("--domain", help="chart box 'a,b;c,d' (default: K widened by 1)")

    c = sub.add_parser("classify", help="moderate / negligible classification")
    c.add_argument("expr", help="expression text or file (prefix syntax or JSON document)")
    c.add_argument("--box", required=True, help="compact box K as 'a,b;c,d'")
    c.add_argument("--mode", choices=("moderate", "negligible"), default="moderate")
    c.add_argument("--alpha-max", type=int, default=0)
    c.add_argument("--m-max", type=int, default=4)
    common(c)

    e = sub.add_parser("embed", help="tabulate the embedding of a distribution")
    e.add_argument("dist", help="distribution text, e.g. \"delta'@0.5 + H\"")
    e.add_argument("--x", default="-1,1,201", help="'a,b,n' sample points")
    e.add_argument("--var", default="x")

    pr = sub.add_parser("pair", help="pairings with a bump test function and their limit")
    pr.add_argument("expr")
    pr.add_argument("--test", default="0.1,0.6", help="bump 'center,width'")
    common(pr)

    a = sub.add_parser("associate", help="association (or C^k-association with --ck)")
    a.add_argument("left")
    a.add_argument("right")
    a.add_argument("--box", default="-1,1")
    a.add_argument("--ck", type=int)
    common(a)

    g = sub.add_parser("geodesic", help="geodesics for every grid eps and their limit")
    g.add_argument("--metric", help="JSON metric document {names, domain, g}")
    g.add_argument("--ppwave", choices=("vacuum", "nonvacuum"))
    g.add_argument("--p0", default="-1,0,1,1")
    g.add_argument("--v0", default="1,0,0,0")
    g.add_argument("--tspan", default="-1,1")

    f = sub.add_parser("flow", help="flows of a vector field for every grid eps")
    src = f.add_mutually_exclusive_group()
    src.add_argument("--field", help="JSON field document {names, domain | periodic, xi}")
    src.add_argument("--torus", action="store_true", help="the torus pulse field (default)")
    f.add_argument("--lattice", help="initial points 'a,b;c,d;...'")
    f.add_argument("--tspan", default="0,2")
    f.add_argument("--times", type=int, default=9)

    d = sub.add_parser("demo", help="worked examples with pass/fail summary")
    d.add_argument("name", choices=sorted(DEMOS))
    d.add_argument("--profile", choices=("vacuum", "nonvacuum"))
    return p


COMMANDS = {
    "classify": cmd_classify, "embed": cmd_embed, "pair": cmd_pair, "associate": cmd_associate,
    "geodesic": cmd_geodesic, "flow": cmd_flow, "demo": cmd_demo,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        os.makedirs(cfg.out, exist_ok=True)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        sys.stderr.write(_error_document("usage", str(exc), EXIT_USAGE) + "\n")
        return EXIT_USAGE
    except (ParseError, ParameterError) as exc:
        sys.stderr.write(_error_document(type(exc).__name__, str(exc), EXIT_USAGE) + "\n")
        return EXIT_USAGE
    except (ColombeauError, OSError) as exc:
        sys.stderr.write(_error_document(type(exc).__name__, str(exc), EXIT_INTERNAL) + "\n")
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - last-resort error document
        detail = "".join(traceback.format_exception_only(type(exc), exc)).strip()
        sys.stderr.write(_error_document("internal", detail, EXIT_INTERNAL) + "\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
