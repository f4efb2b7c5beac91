"""Pairing nets with test functions, association and C^k-association."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as E
from . import quadrature, tape
from .asymptotics import DEFAULT_TOL, Tri, Verdict, eps_value, fit_order, multi_indices, sup_on_compact
from .errors import DomainError
from .nets import EpsilonGrid, Representative, check_eps

BATTERY_VERSION = 1
_WINDOW_PANELS = 8


@dataclass(frozen=True)
class TestFunction:
    """``amp * exp(-1/(1 - ((x - center)/width)^2))`` along coordinate ``axis``."""

    center: float
    width: float
    amp: float = 1.0
    axis: int = 0

    __test__ = False  # not a pytest class

    @property
    def expr(self):
        s = E.div(E.sub(E.var(self.axis), E.Const(self.center)), E.Const(self.width))
        return E.mul(E.Const(self.amp), E.Bump(0, s))

    @property
    def support(self):
        return (self.center - self.width, self.center + self.width)

    def value(self, x):
        s = (np.asarray(x, dtype=float) - self.center) / self.width
        out = np.zeros_like(s)
        inside = np.abs(s) < 1
        out[inside] = self.amp * np.exp(-1.0 / (1.0 - s[inside] ** 2))
        return out

    def label(self):
        return f"bump(c={self.center:g},w={self.width:g})"


def battery(K=(-1.0, 1.0), axis=0):
    """Fixed set of 12 bumps covering ``K`` (version :data:`BATTERY_VERSION`)."""
    a, b = K
    L = b - a
    widths = (0.25, 0.5, 0.9)
    out = []
    for i in range(12):
        c = a + L * (i + 0.5) / 12
        w = widths[i % 3] * L / 2
        w = min(w, c - a + 0.05 * L, b - c + 0.05 * L)
        out.append(TestFunction(round(c, 12), round(w, 12), 1.0, axis))
    return tuple(out)


def _breakpoints(rep_expr, phi, eps, ndim, fixed):
    lo, hi = phi.support
    pts = [lo, hi]
    for axis, center, half in E.kernel_windows(rep_expr, ndim):
        if axis != phi.axis:
            continue
        c = eps_value(center, eps, ndim)
        h = abs(eps_value(half, eps, ndim))
        # panels in the kernel variable y = (x - c)/scale
        for t in np.linspace(-1.0, 1.0, 2 * _WINDOW_PANELS + 1):
            p = c + t * h
            if lo < p < hi:
                pts.append(p)
    return np.unique(pts)


def pair(rep, phi, eps, fixed=None, tol=1e-10):
    """``int u_eps(x) phi(x) dx`` along ``phi.axis`` (other coordinates held at ``fixed``)."""
    if rep.shape:
        raise ValueError("pairing is defined for scalar representatives")
    ndim = rep.domain.ndim
    eps = check_eps(eps, rep.eps_ceiling)
    base = np.zeros(ndim) if fixed is None else np.asarray(fixed, dtype=float).copy()
    lo, hi = phi.support
    if not rep.domain.periodic:
        probe = np.tile(base, (2, 1))
        probe[:, phi.axis] = [lo, hi]
        a, b = rep.domain.lower[phi.axis], rep.domain.upper[phi.axis]
        others = np.delete(probe, phi.axis, axis=1)
        inside = np.delete(np.array([rep.domain.lower, rep.domain.upper]), phi.axis, axis=1)
        if not (a < lo and hi < b) or np.any(others <= inside[0]) or np.any(others >= inside[1]):
            raise DomainError(f"test function support [{lo}, {hi}] not inside the chart")
    integrand = E.mul(rep.expr, phi.expr)
    t = tape.compile_exprs((integrand,), ndim)

    def fn(xs):
        X = np.tile(base, (len(xs), 1))
        X[:, phi.axis] = xs
        return tape.run(t, eps, np.ascontiguousarray(rep.domain.wrap(X)))[0]

    val, _, _ = quadrature.integrate(fn, _breakpoints(rep.expr, phi, eps, ndim, base), tol=tol)
    return val


def pairing_sequence(rep, phi, grid=None, fixed=None):
    grid = grid or EpsilonGrid()
    return np.array([pair(rep, phi, eps, fixed) for eps in grid])


@dataclass
class LimitEstimate:
    limit: float
    converged: bool
    accelerated: bool
    values: list
    spread: float


def _aitken(v):
    d = np.diff(v)
    dd = np.diff(d)
    with np.errstate(divide="ignore", invalid="ignore"):
        acc = v[2:] - d[1:] ** 2 / dd
    return acc


def _geometric(v):
    d = np.diff(v[-6:])
    if np.any(d == 0.0):
        return False
    r = d[1:] / d[:-1]
    return bool(np.all(np.abs(r) < 1.0) and np.ptp(r) <= 0.05 * np.max(np.abs(r)))


def limit_from_values(values, tol=DEFAULT_TOL):
    v = np.asarray(values, dtype=float)
    tail = v[-5:]
    spread = float(np.ptp(tail))
    if spread <= tol.assoc:
        return LimitEstimate(float(v[-1]), True, False, v.tolist(), spread)
    if len(v) >= 8 and _geometric(v):
        acc = _aitken(v)
        acc_tail = acc[-5:]
        if np.all(np.isfinite(acc_tail)):
            s = float(np.ptp(acc_tail))
            if s <= tol.assoc:
                return LimitEstimate(float(acc[-1]), True, True, v.tolist(), s)
    return LimitEstimate(float(v[-1]), False, False, v.tolist(), spread)


def associated_limit(rep, phi, grid=None, fixed=None, tol=DEFAULT_TOL):
    """Limit of the pairings along the grid; converged iff the last 5 values are Cauchy within ``tol.assoc``
    (after Aitken acceleration when successive differences are geometric)."""
    return limit_from_values(pairing_sequence(rep, phi, grid, fixed), tol)


def is_associated(u, v, tests=None, grid=None, tol=DEFAULT_TOL):
    """``u - v -> 0`` against every test function of the battery."""
    grid = grid or EpsilonGrid()
    diff = u - v
    if tests is None:
        K = u.domain.default_compact(0.25) if not u.domain.periodic else ((-1.0, 1.0),)
        tests = battery(K[0])
    answers = []
    details = {}
    for phi in tests:
        est = associated_limit(diff, phi, grid, tol=tol)
        details[phi.label()] = est
        if est.converged:
            answers.append(Tri.YES if abs(est.limit) <= tol.assoc else Tri.NO)
        else:
            answers.append(Tri.INCONCLUSIVE)
    if Tri.NO in answers:
        answer = Tri.NO
    elif Tri.INCONCLUSIVE in answers:
        answer = Tri.INCONCLUSIVE
    else:
        answer = Tri.YES
    return Verdict(answer, "associated", None, {}, grid.values.tolist(),
                   {k: e.values for k, e in details.items()},
                   limits={k: (e.limit, e.converged) for k, e in details.items()})


def ck_associated(u, v, k, K, grid=None, tol=DEFAULT_TOL, threshold=1e-4):
    """``sup_K |d^alpha (u - v)| -> 0`` for all ``|alpha| <= k``."""
    grid = grid or EpsilonGrid()
    diff = u - v
    answers = []
    estimates, values = {}, {}
    for alpha in multi_indices(u.domain.ndim, k):
        sups = sup_on_compact(diff, K, alpha, grid)
        key = "alpha=" + ",".join(map(str, alpha))
        values[key] = sups.tolist()
        est = fit_order(sups, grid, tol)
        estimates[key] = est
        tail = sups[len(sups) - len(sups) // 2:]
        monotone = bool(np.all(np.diff(tail) <= 1e-12 * np.max(np.abs(tail)) + 1e-300))
        if sups[-1] < threshold and monotone:
            answers.append(Tri.YES)
        elif sups[-1] >= threshold and est.good(tol) and est.slope <= tol.slope:
            answers.append(Tri.NO)
        else:
            answers.append(Tri.INCONCLUSIVE)
    if Tri.NO in answers:
        answer = Tri.NO
    elif Tri.INCONCLUSIVE in answers:
        answer = Tri.INCONCLUSIVE
    else:
        answer = Tri.YES
    return Verdict(answer, "C^k-associated", k if answer is Tri.YES else None, estimates,
                   grid.values.tolist(), values)


def product_obstruction(mollifier, phi=None, grid=None, domain=None):
    """Multiplying ``x``, ``delta`` and ``vp(1/x)`` in two bracketings.

    Returns a dictionary with

    * ``distributional_left``: ``(x delta) vp`` with ``x delta`` replaced by its
      associated distribution ``0``;
    * ``distributional_right``: ``delta (x vp)`` with ``x vp = 1``, i.e. ``phi(0)``;
    * ``generalized_left`` / ``generalized_right``: pairing limits of the two
      bracketings of the net product (identical nets in the algebra).
    """
    from .embedding import embed_expr, parse_distribution
    from .nets import ChartDomain

    grid = grid or EpsilonGrid()
    domain = domain or ChartDomain.interval(-2.0, 2.0)
    phi = phi or TestFunction(0.1, 0.6)
    x = E.var(0)
    delta = embed_expr(parse_distribution("delta"), mollifier)
    vp = embed_expr(parse_distribution("pv_inv"), mollifier)
    xvp_dist = embed_expr(parse_distribution("x*pv_inv"), mollifier)
    left_net = Representative.scalar(E.mul(E.mul(x, delta), vp), domain)
    right_net = Representative.scalar(E.mul(delta, E.mul(x, vp)), domain)
    xdelta = associated_limit(Representative.scalar(E.mul(x, delta), domain), phi, grid)
    right_d = associated_limit(Representative.scalar(E.mul(delta, xvp_dist), domain), phi, grid)
    gl = associated_limit(left_net, phi, grid)
    gr = associated_limit(right_net, phi, grid)
    return {
        "phi0": float(phi.value(np.array([0.0]))[0]),
        "x_delta_limit": xdelta.limit,
        "distributional_left": 0.0 if xdelta.converged and abs(xdelta.limit) <= DEFAULT_TOL.assoc else math.nan,
        "distributional_right": right_d.limit,
        "generalized_left": gl.limit,
        "generalized_right": gr.limit,
        "converged": bool(xdelta.converged and right_d.converged and gl.converged and gr.converged),
        "same_net": left_net.same_as(right_net),
        "sequences": {"x_delta": xdelta.values, "delta_times_one": right_d.values,
                      "left_net": gl.values, "right_net": gr.values},
    }
