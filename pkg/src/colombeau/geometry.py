"""Generalized pseudo-Riemannian metrics in charts.

A metric is a symmetric matrix of representatives.  It is accepted when its
determinant is invertible as a generalized function on a sample of the chart
and its signature is constant at the smallest grid epsilon.  Christoffel
symbols and curvature are assembled per epsilon from symbolic derivatives of
the components and a numeric inverse.

Curvature convention: ``R^l_{kij} = d_i G^l_{jk} - d_j G^l_{ik} + G^l_{im} G^m_{jk}
- G^l_{jm} G^m_{ik}`` (the components of ``R(d_i, d_j) d_k``), Ricci
``R_{kj} = R^i_{kij}``.  With this convention the round sphere has positive
sectional curvature.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as E
from . import tape
from .asymptotics import DEFAULT_TOL, Tri, eps_value, invertibility_from_values
from .errors import DomainError, GridMismatchError, MetricError
from .mollifier import make_mollifier
from .nets import ChartDomain, EpsilonGrid, Representative, check_eps
from .odeint import Window, integrate

SIGNATURE_SAMPLES = 32


# ---------------------------------------------------------------------------
# metric validation
# ---------------------------------------------------------------------------

def det_expr(rows):
    """Symbolic determinant by cofactor expansion along the first row (zero entries skipped)."""
    n = len(rows)
    if n == 1:
        return rows[0][0]
    terms = []
    for j, a in enumerate(rows[0]):
        if a == E.ZERO:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        t = E.mul(a, det_expr(minor))
        terms.append(t if j % 2 == 0 else E.neg(t))
    return E.add(*terms) if terms else E.ZERO


def _sample_lattice(K, budget=4096):
    n = len(K)
    m = max(3, int(budget ** (1.0 / n)))
    if m % 2 == 0:
        m -= 1
    axes = [np.linspace(a, b, m) for a, b in K]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


@dataclass
class GeneralizedMetric:
    """A validated metric: components, index and determinant certificate."""

    g: Representative
    index: int
    det: E.Expr
    det_verdict: object
    smallest_eps_checked: float
    grid: EpsilonGrid
    _tapes: dict = field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.g.shape[0]

    @property
    def domain(self):
        return self.g.domain

    def component(self, i, j):
        return self.g.component(i, j)

    # -- compiled pieces ----------------------------------------------------
    def _pairs(self):
        return [(i, j) for i in range(self.n) for j in range(i, self.n)]

    def _tape(self, order):
        """Tape with g_ij, then d_l g_ij, then d_m d_l g_ij (m <= l) up to ``order``."""
        t = self._tapes.get(order)
        if t is not None:
            return t
        n = self.n
        exprs = [self.component(i, j) for i, j in self._pairs()]
        if order >= 1:
            exprs += [self.component(i, j).diff(l) for l in range(n) for i, j in self._pairs()]
        if order >= 2:
            exprs += [self.component(i, j).diff(l).diff(m)
                      for m in range(n) for l in range(m, n) for i, j in self._pairs()]
        t = tape.compile_exprs(tuple(exprs), n)
        self._tapes[order] = t
        return t

    def _evaluate(self, eps, X, order):
        n = self.n
        X = np.ascontiguousarray(self.domain.wrap(np.atleast_2d(np.asarray(X, dtype=float))))
        raw = tape.run(self._tape(order), eps, X)
        npts = X.shape[0]
        pairs = self._pairs()
        P = len(pairs)

        def unpack(block):
            out = np.empty((npts, n, n))
            for k, (i, j) in enumerate(pairs):
                out[:, i, j] = block[k]
                out[:, j, i] = block[k]
            return out

        g = unpack(raw[:P])
        res = [g]
        if order >= 1:
            dg = np.empty((npts, n, n, n))
            for l in range(n):
                dg[:, l] = unpack(raw[P * (1 + l):P * (2 + l)])
            res.append(dg)
        if order >= 2:
            ddg = np.empty((npts, n, n, n, n))
            base = P * (1 + n)
            k = 0
            for m in range(n):
                for l in range(m, n):
                    blk = unpack(raw[base + P * k:base + P * (k + 1)])
                    ddg[:, m, l] = blk
                    ddg[:, l, m] = blk
                    k += 1
            res.append(ddg)
        return res

    def metric_at(self, eps, X):
        """``g_eps`` at points ``X`` (shape ``(npts, n, n)``)."""
        eps = check_eps(eps, self.g.eps_ceiling)
        return self._evaluate(eps, X, 0)[0]

    def christoffel_many(self, eps, X):
        """``Gamma[p, k, i, j] = Gamma^k_ij`` at points ``X``."""
        eps = check_eps(eps, self.g.eps_ceiling)
        g, dg = self._evaluate(eps, X, 1)
        return _christoffel(np.linalg.inv(g), dg)

    def curvature_many(self, eps, X):
        """Riemann ``R[p, l, k, i, j] = R^l_{kij}`` and Ricci ``Ric[p, k, j]`` at points ``X``."""
        eps = check_eps(eps, self.g.eps_ceiling)
        g, dg, ddg = self._evaluate(eps, X, 2)
        ginv = np.linalg.inv(g)
        first = _first_kind(dg)
        gam = np.einsum("pkl,plij->pkij", ginv, first)
        # d_m g^{kl} = -g^{ka} d_m g_ab g^{bl}
        dginv = -np.einsum("pka,pmab,pbl->pmkl", ginv, dg, ginv)
        dfirst = 0.5 * (np.einsum("pmijl->pmlij", ddg)
                        + np.einsum("pmjil->pmlij", ddg)
                        - np.einsum("pmlij->pmlij", ddg))
        # ddg[p, m, a, b, c] = d_m d_a g_bc, dfirst[p, m, l, i, j] = d_m [l, ij]
        dgam = np.einsum("pmkl,plij->pmkij", dginv, first) + np.einsum("pkl,pmlij->pmkij", ginv, dfirst)
        riem = _riemann(gam, dgam)
        ric = np.einsum("pikij->pkj", riem)
        return riem, ric


def _first_kind(dg):
    """``[l, ij] = (d_i g_jl + d_j g_il - d_l g_ij) / 2`` with ``dg[p, a, b, c] = d_a g_bc``."""
    return 0.5 * (np.einsum("pijl->plij", dg) + np.einsum("pjil->plij", dg) - dg)


def _christoffel(ginv, dg):
    return np.einsum("pkl,plij->pkij", ginv, _first_kind(dg))


def _riemann(gam, dgam):
    """``R^l_{kij}`` from ``gam[p, l, i, j]`` and ``dgam[p, m, l, i, j] = d_m Gamma^l_ij``."""
    term1 = np.einsum("piljk->plkij", dgam)
    term2 = np.einsum("pjlik->plkij", dgam)
    term3 = np.einsum("plim,pmjk->plkij", gam, gam)
    term4 = np.einsum("pljm,pmik->plkij", gam, gam)
    return term1 - term2 + term3 - term4


def check_metric(g, grid=None, K=None, samples=None, tol=DEFAULT_TOL):
    """Validate a matrix representative as a generalized pseudo-Riemannian metric.

    Checks structural symmetry, invertibility of ``det g`` from the infimum
    of ``|det g_eps|`` over the sample points (box center included) along the
    grid, and constancy of the eigenvalue signature over at least 32 sample
    points at the smallest grid epsilon.  Raises :class:`MetricError`.
    """
    grid = grid or EpsilonGrid()
    if len(g.shape) != 2 or g.shape[0] != g.shape[1]:
        raise MetricError(f"metric must be a square matrix, got shape {g.shape}")
    n = g.shape[0]
    if n != g.domain.ndim:
        raise MetricError(f"{n}x{n} metric on a {g.domain.ndim}-dimensional chart")
    for i, j in itertools.combinations(range(n), 2):
        if g.component(i, j) != g.component(j, i):
            raise MetricError(f"metric is not symmetric: g[{i}][{j}] = {g.component(i, j).render()} "
                              f"but g[{j}][{i}] = {g.component(j, i).render()}")
    if grid.eps_max > g.eps_ceiling:
        raise MetricError(f"grid eps_max={grid.eps_max} exceeds certificate ceiling {g.eps_ceiling}")
    rows = [[g.component(i, j) for j in range(n)] for i in range(n)]
    det = det_expr(rows)
    if K is None:
        K = g.domain.default_compact(0.1) if not g.domain.periodic else tuple((-math.pi, math.pi) for _ in range(n))
    K = tuple((float(a), float(b)) for a, b in K)
    if samples is None:
        samples = _sample_lattice(K)
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    center = np.array([[0.5 * (a + b) for a, b in K]])
    samples = np.vstack([center, samples])
    det_tape = tape.compile_exprs((det,), n)
    X = np.ascontiguousarray(g.domain.wrap(samples))
    infs = np.array([np.min(np.abs(tape.run(det_tape, eps, X)[0])) for eps in grid])
    verdict = invertibility_from_values(infs, grid, tol)
    if verdict.answer is not Tri.YES:
        where = samples[int(np.argmin(np.abs(tape.run(det_tape, grid.smallest, X)[0])))]
        raise MetricError(f"determinant {det.render(list(g.domain.names))} is not invertible "
                          f"({verdict.answer.value}: {verdict.message or 'power-law fit'}; "
                          f"min |det| at smallest eps {infs[-1]:.3e} near {where.tolist()})")
    if len(samples) < SIGNATURE_SAMPLES:
        raise MetricError(f"signature check needs at least {SIGNATURE_SAMPLES} sample points")
    metric = GeneralizedMetric(g, -1, det, verdict, grid.smallest, grid)
    vals = metric.metric_at(grid.smallest, samples)
    ev = np.linalg.eigvalsh(vals)
    scale = np.max(np.abs(ev), axis=1, keepdims=True)
    # nondegeneracy is certified by the determinant; this only guards round-off-level eigenvalues
    if np.any(np.abs(ev) <= 1e-14 * scale):
        raise MetricError("degenerate metric: eigenvalue at round-off level at a sample point")
    neg = np.sum(ev < 0, axis=1)
    if np.any(neg != neg[0]):
        k = int(np.argmax(neg != neg[0]))
        raise MetricError(f"signature varies: {int(neg[0])} negative eigenvalues at {samples[0].tolist()}, "
                          f"{int(neg[k])} at {samples[k].tolist()}")
    metric.index = int(neg[0])
    return metric


def christoffel(G, eps, x):
    """``Gamma^k_ij`` at one point (array ``[k, i, j]``)."""
    return G.christoffel_many(eps, np.atleast_2d(x))[0]


def curvature(G, eps, x):
    """``(R^l_{kij}, R_{kj})`` at one point."""
    riem, ric = G.curvature_many(eps, np.atleast_2d(x))
    return riem[0], ric[0]


# ---------------------------------------------------------------------------
# curves and geodesics
# ---------------------------------------------------------------------------

def _windows(G, eps):
    n = G.n
    out = []
    seen = set()
    for comp in G.g.components:
        for axis, center, half in E.kernel_windows(comp, n):
            c = eps_value(center, eps, n)
            h = abs(eps_value(half, eps, n))
            key = (axis, c, h)
            if key in seen or not h > 0:
                continue
            seen.add(key)
            out.append(Window(axis, c, h, G.domain.periodic, max_step=min(h, eps) / 10.0))
    return out


def _chart_margin(domain):
    if domain.periodic:
        return None
    lo, hi = np.array(domain.lower), np.array(domain.upper)
    n = domain.ndim

    def margin(y):
        x = y[:n]
        return float(min(np.min(x - lo), np.min(hi - x)))

    return margin


@dataclass
class CurveAtEps:
    """One representative of a curve: position, velocity and acceleration as functions of ``t``."""

    eps: float
    t_span: tuple
    position: object
    velocity: object
    acceleration: object = None
    truncated: bool = False
    message: str = ""
    solution: object = field(default=None, repr=False)

    def check(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = sorted(self.t_span)
        if np.any(t < lo - 1e-12) or np.any(t > hi + 1e-12):
            raise DomainError(f"t outside [{lo}, {hi}]")
        return t


def explicit_curve(exprs, eps, t_span, domain):
    """A curve ``t -> (exprs_k(t))`` with eps-dependent expressions in ``Var(0) = t``."""
    exprs = tuple(E.as_expr(e) for e in exprs)
    vel = tuple(e.diff(0) for e in exprs)
    acc = tuple(e.diff(0) for e in vel)
    tp = tape.compile_exprs(exprs + vel + acc, 1)
    n = len(exprs)
    check_eps(eps, min(e.eps_ceiling for e in exprs + vel + acc))

    def block(k):
        def f(t):
            ts = np.atleast_1d(np.asarray(t, dtype=float))
            out = tape.run(tp, eps, np.ascontiguousarray(ts[:, None]))[k * n:(k + 1) * n]
            return out[:, 0] if np.ndim(t) == 0 else out
        return f

    return CurveAtEps(float(eps), tuple(t_span), block(0), block(1), block(2))


GEODESIC_RTOL_FACTOR = 1e-2


def geodesic(G, p0, v0, eps, t_span=(0.0, 1.0), rtol=None):
    """Geodesic of ``g_eps`` through ``p0`` with velocity ``v0`` at ``t_span[0]``.

    Adaptive DOP853 at ``rtol * GEODESIC_RTOL_FACTOR`` (``rtol`` defaults to
    ``1e-10``); the step is capped at ``eps/10`` near kernel supports.  Inside
    a pulse the energy is a difference of terms of size ``1/eps``, so the
    tighter factor is what keeps it constant to ``1e-8`` relative.  Leaving
    the chart truncates the solution and sets ``truncated``.
    """
    rtol = (DEFAULT_TOL.ode_rtol if rtol is None else rtol) * GEODESIC_RTOL_FACTOR
    eps = check_eps(eps, G.g.eps_ceiling)
    n = G.n
    p0 = np.asarray(p0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if p0.shape != (n,) or v0.shape != (n,):
        raise DomainError(f"initial data must have {n} components")
    if not G.domain.contains(p0)[0]:
        raise DomainError(f"initial point {p0.tolist()} is outside the chart")

    def accel(x, v):
        gam = G.christoffel_many(eps, x[None, :])[0]
        return -np.einsum("kij,i,j->k", gam, v, v)

    def rhs(t, y):
        return np.concatenate([y[n:], accel(y[:n], y[n:])])

    sol = integrate(rhs, t_span, np.concatenate([p0, v0]), _windows(G, eps), rtol=rtol,
                    atol=rtol * 1e-2, in_chart=_chart_margin(G.domain))

    def position(t):
        y = sol(t)
        return y[:n]

    def velocity(t):
        y = sol(t)
        return y[n:]

    def acceleration(t):
        y = np.atleast_2d(sol(t).T)
        out = np.array([accel(r[:n], r[n:]) for r in y]).T
        return out[:, 0] if np.ndim(t) == 0 else out

    return CurveAtEps(eps, (float(t_span[0]), sol.t_end), position, velocity, acceleration,
                      sol.truncated, sol.message, sol)


def energy(G, curve, t):
    """``g_eps(gamma', gamma')`` along a curve."""
    t = curve.check(t)
    x = curve.position(t).T
    v = curve.velocity(t).T
    g = G.metric_at(curve.eps, x)
    return np.einsum("pij,pi,pj->p", g, v, v)


@dataclass
class GeneralizedCurve:
    """Per-eps representatives of a curve over a common grid."""

    grid: EpsilonGrid
    curves: tuple
    bounded: bool
    hull: tuple
    bounding_box: tuple
    truncated: tuple

    def __getitem__(self, j):
        return self.curves[j]

    def __len__(self):
        return len(self.curves)


@dataclass
class LimitReport:
    times: np.ndarray
    converged: bool
    cauchy_distances: list
    limit: np.ndarray
    kinks: list
    jumps: dict
    straightness: float
    window: float

    def to_dict(self):
        return {"converged": self.converged, "cauchy_distances": self.cauchy_distances,
                "kinks": self.kinks, "jumps": self.jumps, "straightness": self.straightness,
                "window": self.window}


def _hull(points, margin=0.1):
    lo = np.min(points, axis=0)
    hi = np.max(points, axis=0)
    width = hi - lo
    pad = margin * np.where(width > 0, width, np.maximum(1.0, np.abs(lo)))
    return (tuple(zip(lo.tolist(), hi.tolist())),
            tuple(zip((lo - pad).tolist(), (hi + pad).tolist())))


def richardson(values, eps):
    """Limit of ``values(eps) = L + c eps + O(eps^2)`` from the smallest grid values.

    Linear least squares in ``eps`` over the smallest half of the grid, which
    is the order-one Richardson step applied to a whole tail at once.
    """
    values = np.asarray(values, dtype=float)
    eps = np.asarray(eps, dtype=float)
    tail = slice(len(eps) - len(eps) // 2, None)
    A = np.vstack([np.ones_like(eps[tail]), eps[tail]]).T
    coef, *_ = np.linalg.lstsq(A, values[tail], rcond=None)
    return float(coef[0])


def geodesic_net(G, p0, v0, grid=None, t_span=(0.0, 1.0), n_times=401, cauchy_tol=1e-4,
                 pulse_axis=None, rtol=None):
    """Geodesics for every grid eps, c-boundedness and the limit curve.

    The limit is the smallest-eps curve on a fixed time sampling, accepted
    when the sup distance between successive representatives is below
    ``cauchy_tol`` over the last five grid steps.  For metrics with a kernel
    window along ``pulse_axis`` (default: the first window's axis), velocity
    jumps across the window are extrapolated to ``eps = 0``.
    """
    grid = grid or EpsilonGrid()
    curves = tuple(geodesic(G, p0, v0, eps, t_span, rtol) for eps in grid)
    truncated = tuple(c.truncated for c in curves)
    t_end = min(c.t_span[1] for c in curves) if t_span[1] >= t_span[0] else max(c.t_span[1] for c in curves)
    times = np.linspace(t_span[0], t_end, n_times)
    pos = np.array([c.position(times).T for c in curves])  # (J, T, n)
    finite = bool(np.all(np.isfinite(pos)))
    hull, box = _hull(pos.reshape(-1, G.n)) if finite else ((), ())
    bounded = finite and not any(truncated)
    dists = [float(np.max(np.abs(pos[j + 1] - pos[j]))) for j in range(len(curves) - 1)]
    converged = bool(len(dists) >= 5 and max(dists[-5:]) <= cauchy_tol)
    limit = pos[-1]

    windows = _windows(G, grid.smallest)
    kinks, jumps = [], {}
    if pulse_axis is None and windows:
        pulse_axis = windows[0].index
    window = 0.0
    if pulse_axis is not None:
        w_min = [w for w in windows if w.index == pulse_axis]
        center = w_min[0].center if w_min else 0.0
        window = 10.0 * grid.smallest
        names = G.domain.names
        per_eps = {name: [] for name in names}
        dvel = {name: [] for name in names}
        crossing = []
        for c, eps in zip(curves, grid):
            ws = [w for w in _windows(G, eps) if w.index == pulse_axis]
            half = ws[0].half if ws else eps
            sol_t = c.solution.t
            xs = c.solution.y[pulse_axis]
            lo_edge, hi_edge = center - 3 * half, center + 3 * half
            # exact parameter values where the trajectory meets the window edges
            i_lo = int(np.argmax(xs > lo_edge)) if np.any(xs > lo_edge) else len(xs) - 1
            i_hi = int(np.argmax(xs > hi_edge)) if np.any(xs > hi_edge) else len(xs) - 1
            before = _crossing_time(c, pulse_axis, lo_edge, sol_t[max(i_lo - 1, 0)], sol_t[i_lo])
            after = _crossing_time(c, pulse_axis, hi_edge, sol_t[max(i_hi - 1, 0)], sol_t[i_hi])
            tc = _crossing_time(c, pulse_axis, center, before, after)
            va, vb = c.velocity(before), c.velocity(after)
            # one-sided straight-line continuations evaluated at the crossing
            xa = c.position(before) + va * (tc - before)
            xb = c.position(after) - vb * (after - tc)
            for k, name in enumerate(names):
                per_eps[name].append(float(vb[k] - va[k]))
                dvel[name].append(float(xb[k] - xa[k]))
            crossing.append(c.position(tc))
            kinks.append(float(tc))
        cross = np.array(crossing)
        eps_vals = grid.values
        jumps = {
            "velocity": {name: richardson(per_eps[name], eps_vals) for name in names},
            "position": {name: richardson(dvel[name], eps_vals) for name in names},
            "crossing": {name: richardson(cross[:, k], eps_vals) for k, name in enumerate(names)},
            "velocity_per_eps": per_eps,
            "position_per_eps": dvel,
        }
        kinks = [kinks[-1]]
    # straightness of the limit outside the shrinking pulse window
    straight = 0.0
    if pulse_axis is not None and len(times) >= 3:
        u = limit[:, pulse_axis]
        d2 = limit[2:] - 2 * limit[1:-1] + limit[:-2]
        ok = (np.abs(u[:-2] - center) > window) & (np.abs(u[2:] - center) > window) & (np.abs(u[1:-1] - center) > window)
        ok &= np.sign(u[:-2] - center) == np.sign(u[2:] - center)
        straight = float(np.max(np.abs(d2[ok]))) if np.any(ok) else 0.0
    report = LimitReport(times, converged, dists, limit, kinks, jumps, straight, window)
    return GeneralizedCurve(grid, curves, bounded, hull, box, truncated), report


def _crossing_time(c, axis, center, a, b):
    from scipy.optimize import brentq

    f = lambda t: float(c.position(t)[axis] - center)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fa * fb > 0:
        return a if abs(fa) < abs(fb) else b
    return brentq(f, a, b, xtol=1e-14, rtol=1e-14)


# ---------------------------------------------------------------------------
# fields along curves
# ---------------------------------------------------------------------------

@dataclass
class CurveVectorField:
    """Vector field along one curve representative: ``value(t)`` and, if known, ``dt(t)``."""

    curve: CurveAtEps
    value: object
    dt: object = None

    def __call__(self, t):
        return self.value(t)

    def _combine(self, other, a, b):
        if other.curve is not self.curve:
            raise GridMismatchError("fields live on different curve representatives")
        dt = None
        if self.dt is not None and other.dt is not None:
            dt = lambda t: a * self.dt(t) + b * other.dt(t)
        return CurveVectorField(self.curve, lambda t: a * self.value(t) + b * other.value(t), dt)

    def linear(self, other, a, b):
        """``a * self + b * other``."""
        return self._combine(other, a, b)

    def times(self, fn, dfn):
        """``fn(t) * self`` with ``(fn xi)' = fn' xi + fn xi'``."""
        dt = None
        if self.dt is not None:
            dt = lambda t: dfn(t) * self.value(t) + fn(t) * self.dt(t)
        return CurveVectorField(self.curve, lambda t: fn(t) * self.value(t), dt)


def velocity_field(curve):
    return CurveVectorField(curve, curve.velocity, curve.acceleration)


def field_from_exprs(curve, exprs):
    """Field with components given as expressions in ``Var(0) = t``; exact ``t``-derivatives."""
    exprs = tuple(E.as_expr(e) for e in exprs)
    d = tuple(e.diff(0) for e in exprs)
    tp = tape.compile_exprs(exprs + d, 1)
    n = len(exprs)

    def block(k):
        def f(t):
            ts = np.atleast_1d(np.asarray(t, dtype=float))
            out = tape.run(tp, curve.eps, np.ascontiguousarray(ts[:, None]))[k * n:(k + 1) * n]
            return out[:, 0] if np.ndim(t) == 0 else out
        return f

    return CurveVectorField(curve, block(0), block(1))


def induced_covariant_derivative(xi, G, eps=None):
    """``xi'^k = d xi^k/dt + Gamma^k_ij gamma'^i xi^j`` along ``xi.curve``."""
    curve = xi.curve
    if eps is not None and float(eps) != curve.eps:
        raise GridMismatchError(f"field lives at eps={curve.eps}, requested eps={eps}")
    if xi.dt is None:
        raise ValueError("field has no t-derivative")

    def value(t):
        t_arr = curve.check(t)
        x = curve.position(t_arr).T
        v = curve.velocity(t_arr).T
        w = np.atleast_2d(xi.value(t_arr).T) if np.ndim(t) else np.atleast_2d(xi.value(t_arr).T)
        gam = G.christoffel_many(curve.eps, x)
        out = np.asarray(xi.dt(t_arr)).T + np.einsum("pkij,pi,pj->pk", gam, v, w)
        return out.T[:, 0] if np.ndim(t) == 0 else out.T

    return CurveVectorField(curve, value)


def inner(G, xi, eta, t):
    """``g_eps(xi, eta)`` along the common curve."""
    if xi.curve is not eta.curve:
        raise GridMismatchError("fields live on different curve representatives")
    curve = xi.curve
    t_arr = curve.check(t)
    g = G.metric_at(curve.eps, curve.position(t_arr).T)
    return np.einsum("pij,ip,jp->p", g, np.atleast_2d(xi.value(t_arr)), np.atleast_2d(eta.value(t_arr)))


# ---------------------------------------------------------------------------
# impulsive wave
# ---------------------------------------------------------------------------

PROFILES = {
    "vacuum": "(- (^ x 2) (^ y 2))",
    "nonvacuum": "(+ (^ x 2) (^ y 2))",
}

PP_NAMES = ("u", "v", "x", "y")


def pp_wave_domain(bounds=((-3.0, 3.0), (-50.0, 50.0), (-5.0, 5.0), (-5.0, 5.0))):
    return ChartDomain.box(bounds, PP_NAMES)


def pp_wave_components(f=None, mollifier=None, domain=None):
    """Matrix representative ``f(x, y) rho_eps(u) du^2 - du dv + dx^2 + dy^2`` in ``(u, v, x, y)``."""
    from .dsl import parse

    mollifier = mollifier or make_mollifier()
    domain = domain or pp_wave_domain()
    if f is None or isinstance(f, str) and f in PROFILES:
        f = PROFILES[f or "vacuum"]
    if isinstance(f, str):
        f = parse(f, PP_NAMES, mollifier)
    f = E.as_expr(f)
    if f.has_eps or not f.free_vars <= {2, 3}:
        raise ValueError("profile must be an eps-independent expression in x and y")
    guu = E.mul(f, E.Kernel(mollifier, 0, E.var(0), E.EPS))
    h = E.Const(-0.5)
    z, one = E.ZERO, E.ONE
    rows = [[guu, h, z, z], [h, z, z, z], [z, z, one, z], [z, z, z, one]]
    return Representative.matrix(rows, domain)


def pp_wave_metric(f=None, mollifier=None, domain=None, grid=None):
    """Validated impulsive-wave metric (default profile ``x^2 - y^2``)."""
    return check_metric(pp_wave_components(f, mollifier, domain), grid)


def ricci_pairing(G, phi, eps, fixed, component=(0, 0), tol=1e-10):
    """``int Ric_ab(eps, x) phi(x_axis) dx_axis`` along ``phi.axis``, other coordinates at ``fixed``."""
    from .association import _WINDOW_PANELS
    from .quadrature import integrate as quad

    a, b = component
    axis = phi.axis
    base = np.asarray(fixed, dtype=float)
    lo, hi = phi.support
    pts = [lo, hi]
    for w in _windows(G, eps):
        if w.index == axis:
            pts += [p for p in w.center + w.half * np.linspace(-1, 1, 2 * _WINDOW_PANELS + 1) if lo < p < hi]

    def fn(xs):
        X = np.tile(base, (len(xs), 1))
        X[:, axis] = xs
        _, ric = G.curvature_many(eps, X)
        return ric[:, a, b] * phi.value(xs)

    return quad(fn, np.unique(pts), tol=tol)[0]
