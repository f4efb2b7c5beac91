"""Worked examples: CSV tables plus a summary with pass/fail checks.

Every demo takes a :class:`RunConfig` and an output directory, writes its
tables there and returns a summary dictionary whose ``checks`` entry maps a
check name to ``{"value", "threshold", "passed"}``.
"""

from __future__ import annotations

import math
import os

import numpy as np

from . import expr as E
from .association import TestFunction, limit_from_values, product_obstruction
from .asymptotics import (GeneralizedPoint, Tri, classify_number_negligible, point_eval)
from .config import RunConfig
from .flows import torus_example
from .geometry import PP_NAMES, geodesic_net, pp_wave_metric, ricci_pairing
from .nets import ChartDomain, Representative
from .reports import csv_text, json_text, write_csv, write_json

PP_START = (-1.0, 0.0, 1.0, 1.0)
PP_VELOCITY = (1.0, 0.0, 0.0, 0.0)
PP_TSPAN = (-1.0, 1.0)
PP_TEST = TestFunction(0.1, 0.6, 1.0, 0)


def _check(value, threshold, passed):
    return {"value": value, "threshold": threshold, "passed": bool(passed)}


def _profile_derivative(profile, alpha, x, y):
    """``d^alpha f(x, y)`` for a named profile, alpha over ``(u, v, x, y)``."""
    from .dsl import parse
    from .geometry import PROFILES
    from .tape import evaluate

    f = parse(PROFILES[profile], PP_NAMES)
    d = E.derive(f, alpha)
    return float(evaluate((d,), 0.1, np.array([[0.0, 0.0, x, y]]), 4)[0, 0])


def ppwave(cfg, out):
    """Impulsive-wave geodesics through the pulse and the curvature pairing."""
    grid = cfg.grid
    G = pp_wave_metric(cfg.profile, cfg.mollifier, grid=grid)
    curve, rep = geodesic_net(G, PP_START, PP_VELOCITY, grid, PP_TSPAN, rtol=cfg.ode_rtol)
    times = np.linspace(PP_TSPAN[0], PP_TSPAN[1], 201)
    rows = []
    for c, eps in zip(curve.curves, grid):
        P = c.position(times)
        V = c.velocity(times)
        for k, t in enumerate(times):
            rows.append([eps, t, *P[:, k], *V[:, k]])
    header = ["eps", "t"] + list(PP_NAMES) + ["d" + n for n in PP_NAMES]
    write_csv(os.path.join(out, "ppwave_geodesics.csv"), header, rows)
    write_csv(os.path.join(out, "ppwave_limit.csv"), ["t"] + list(PP_NAMES),
              [[t, *p] for t, p in zip(rep.times, rep.limit)])
    jumps = rep.jumps
    jrows = [[eps] + [jumps["velocity_per_eps"][n][j] for n in PP_NAMES]
             + [jumps["position_per_eps"][n][j] for n in PP_NAMES] for j, eps in enumerate(grid)]
    jrows.append([0.0] + [jumps["velocity"][n] for n in PP_NAMES] + [jumps["position"][n] for n in PP_NAMES])
    write_csv(os.path.join(out, "ppwave_jumps.csv"),
              ["eps"] + ["jump_d" + n for n in PP_NAMES] + ["jump_" + n for n in PP_NAMES], jrows)

    x0, y0 = jumps["crossing"]["x"], jumps["crossing"]["y"]
    target_jump = 0.5 * _profile_derivative(cfg.profile, (0, 0, 1, 0), x0, y0)
    jump_x = jumps["velocity"]["x"]
    rel = abs(jump_x - target_jump) / abs(target_jump)

    fixed = (0.0, 0.0, PP_START[2], PP_START[3])
    pairings = [ricci_pairing(G, PP_TEST, eps, fixed) for eps in grid]
    lim = limit_from_values(pairings, cfg.tolerances)
    phi0 = float(PP_TEST.value(np.array([0.0]))[0])
    lap = sum(_profile_derivative(cfg.profile, a, *fixed[2:]) for a in ((0, 0, 2, 0), (0, 0, 0, 2)))
    target_curv = -0.5 * lap * phi0
    curv_err = abs(lim.limit - target_curv) / max(abs(target_curv), phi0)
    write_csv(os.path.join(out, "ppwave_curvature.csv"), ["eps", "pairing_Ruu"],
              [[e, p] for e, p in zip(grid, pairings)] + [[0.0, lim.limit]])
    checks = {
        "metric_index": _check(G.index, 1, G.index == 1),
        "metric_det": _check(G.det.render(list(PP_NAMES)), "-0.25",
                             isinstance(G.det, E.Const) and G.det.value == -0.25),
        "c_bounded": _check(curve.bounded, True, curve.bounded),
        "limit_cauchy": _check(max(rep.cauchy_distances[-5:]), 1e-4, rep.converged),
        "jump_dx_relative_error": _check(rel, 0.02, rel <= 0.02),
        "limit_straightness": _check(rep.straightness, 1e-4, rep.straightness <= 1e-4),
        "curvature_pairing_relative_error": _check(curv_err, 0.01, lim.converged and curv_err <= 0.01),
    }
    return {
        "demo": "ppwave", "profile": cfg.profile,
        "jump_dx_extrapolated": jump_x, "jump_dx_target": target_jump,
        "jump_v_position": jumps["position"]["v"], "jump_dv": jumps["velocity"]["v"],
        "crossing": jumps["crossing"], "curvature_pairing": lim.limit, "curvature_target": target_curv,
        "checks": checks,
    }


def torus_flow(cfg, out):
    """The torus field with a pulse of width ``1/|log eps|``."""
    rep = torus_example(cfg.mollifier, cfg.grid)
    phi = rep.flow
    rows = []
    for j, eps in enumerate(cfg.grid):
        for t in rep.times:
            got = phi.reported(j, t)
            for p0, p in zip(phi.lattice, got):
                rows.append([eps, t, *p0, *p])
    write_csv(os.path.join(out, "torus_flow.csv"), ["eps", "t", "alpha0", "beta0", "alpha", "beta"], rows)
    ident = rep.identities
    write_csv(os.path.join(out, "torus_errors.csv"),
              ["eps", "closed_form_error", "limit_error", "identity_residual", "group_residual"],
              [[e, c, l, i, g] for e, c, l, i, g in zip(cfg.grid, rep.closed_form_error, rep.limit_error,
                                                         ident["identity"], ident["group"])])
    cmax = max(rep.closed_form_error)
    checks = {
        "closed_form_sup_error": _check(cmax, 1e-6, cmax <= 1e-6),
        "identity_residual": _check(ident["max_identity"], 1e-6, ident["max_identity"] <= 1e-6),
        "group_residual": _check(ident["max_group"], 1e-6, ident["max_group"] <= 1e-6),
        "limit_error_smallest_eps": _check(rep.limit_error[-1], 1e-6, rep.limit_error[-1] <= 1e-6),
    }
    return {"demo": "torus-flow", "window": rep.window, "excluded_samples": rep.excluded, "checks": checks}


def pointvalue(cfg, out):
    """``u_eps(x) = rho_eps(x - eps)`` at classical points and at the point ``[(eps)]``."""
    grid = cfg.grid
    dom = ChartDomain.interval(-4.0, 4.0)
    shift = Representative.scalar(E.sub(E.var(0), E.EPS), dom)
    kernel = Representative.scalar(E.Kernel(cfg.mollifier, 0, E.var(0), E.EPS), dom)
    u = shift.compose(kernel, ((-2.0, 2.0),), grid)
    points = {"0": GeneralizedPoint.classical([0.0], grid), "0.3": GeneralizedPoint.classical([0.3], grid),
              "-0.3": GeneralizedPoint.classical([-0.3], grid),
              "eps": GeneralizedPoint((E.EPS,), ((0.0, cfg.eps_max),), grid)}
    verdicts, values = {}, {}
    for name, p in points.items():
        r = point_eval(u, p)
        verdicts[name] = classify_number_negligible(r, 4, grid, cfg.tolerances)
        values[name] = r.values(grid)
    write_csv(os.path.join(out, "pointvalue.csv"), ["eps"] + [f"u_at_{k}" for k in points],
              [[e] + [values[k][j] for k in points] for j, e in enumerate(grid)])
    slope = verdicts["eps"].estimates["value"].slope
    checks = {f"negligible_at_{k}": _check(verdicts[k].label, "negligible(4)", verdicts[k].answer is Tri.YES)
              for k in ("0", "0.3", "-0.3")}
    checks["not_negligible_at_eps"] = _check(verdicts["eps"].label, "not negligible", verdicts["eps"].answer is Tri.NO)
    checks["slope_at_eps"] = _check(slope, -1.0, abs(slope + 1.0) <= 0.1)
    return {"demo": "pointvalue", "verdicts": {k: v.label for k, v in verdicts.items()}, "checks": checks}


def schwartz_obstruction(cfg, out):
    """``x``, ``delta`` and ``vp(1/x)`` multiplied in two bracketings."""
    grid = cfg.grid
    res = product_obstruction(cfg.mollifier, PP_TEST, grid)
    seq = res["sequences"]
    write_csv(os.path.join(out, "obstruction.csv"),
              ["eps", "x_delta", "delta_times_x_vp", "left_net", "right_net"],
              [[e, seq["x_delta"][j], seq["delta_times_one"][j], seq["left_net"][j], seq["right_net"][j]]
               for j, e in enumerate(grid)])
    phi0 = res["phi0"]
    gap = abs(res["distributional_right"] - res["distributional_left"])
    checks = {
        "distributional_left_zero": _check(res["distributional_left"], 0.0, res["distributional_left"] == 0.0),
        "distributional_right_phi0": _check(res["distributional_right"], phi0,
                                            abs(res["distributional_right"] - phi0) <= 1e-6),
        "bracketings_differ": _check(gap, phi0, abs(gap - phi0) <= 1e-6),
        "nets_identical": _check(res["same_net"], True, res["same_net"]),
        "net_limit_half_phi0": _check(res["generalized_left"], 0.5 * phi0,
                                      abs(res["generalized_left"] - 0.5 * phi0) <= 1e-6),
    }
    out_doc = {k: v for k, v in res.items() if k != "sequences"}
    out_doc.update(demo="schwartz-obstruction", checks=checks)
    return out_doc


DEMOS = {
    "ppwave": ppwave,
    "torus-flow": torus_flow,
    "pointvalue": pointvalue,
    "schwartz-obstruction": schwartz_obstruction,
}


def summary_text(doc):
    lines = [f"demo {doc['demo']}"]
    for name, c in doc["checks"].items():
        value = c["value"]
        shown = "%.6g" % value if isinstance(value, float) and math.isfinite(value) else str(value)
        lines.append(f"  {'PASS' if c['passed'] else 'FAIL'}  {name}: {shown} (threshold {c['threshold']})")
    return "\n".join(lines) + "\n"


def run_demo(name, cfg=None, out=None):
    """Run one demo, write ``summary.json`` and ``summary.txt``; returns the summary."""
    cfg = cfg or RunConfig()
    if name not in DEMOS:
        raise KeyError(f"unknown demo {name!r}; choose from {sorted(DEMOS)}")
    out = out or os.path.join(cfg.out, name)
    os.makedirs(out, exist_ok=True)
    doc = DEMOS[name](cfg, out)
    doc["passed"] = all(c["passed"] for c in doc["checks"].values())
    write_json(os.path.join(out, "summary.json"), doc)
    with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(summary_text(doc))
    return doc


__all__ = ["DEMOS", "run_demo", "summary_text", "csv_text", "json_text"]
