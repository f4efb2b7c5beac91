"""Vector fields, flows and map-valued nets on box charts and the flat torus."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as E
from . import tape
from .asymptotics import DEFAULT_TOL, OrderEstimate, Tri, Verdict, eps_value, fit_order, sup_at
from .errors import DomainError
from .mollifier import make_mollifier
from .nets import TWO_PI, ChartDomain, EpsilonGrid, Representative, check_eps
from .odeint import Window, integrate

BATCH = 32


# ---------------------------------------------------------------------------
# c-boundedness
# ---------------------------------------------------------------------------

@dataclass
class BoundedVerdict:
    answer: Tri
    hull: tuple
    bounding_box: tuple
    witness: list | None = None
    estimate: OrderEstimate | None = None
    message: str = ""

    @property
    def bounded(self):
        return self.answer is Tri.YES


def _sample_box(K, budget=4096):
    n = len(K)
    m = max(3, int(round(budget ** (1.0 / n))))
    axes = [np.linspace(a, b, m) for a, b in K]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _map_values(rep, eps, X):
    vals = rep.eval_many(eps, X, check=False)
    return vals.reshape(len(X), -1)


def c_bounded(rep, K, grid=None, tol=DEFAULT_TOL, target=None):
    """Do the images ``u_eps(K)`` stay in one compact set along the grid?

    ``target`` is the chart the values live in; a periodic target is compact
    and gives ``yes`` outright.  Otherwise the hull of all sampled images is
    reported with a 10% margin, and a power-law growth of ``sup |u_eps|``
    (slope below ``-tol.slope``) gives ``no`` with the worst sample point.
    """
    grid = grid or EpsilonGrid()
    K = tuple((float(a), float(b)) for a, b in K)
    if not rep.domain.contains_box(K):
        raise DomainError(f"box {K} is not inside the chart domain")
    ncomp = int(np.prod(rep.shape)) if rep.shape else 1
    if target is not None and target.periodic:
        full = tuple((0.0, TWO_PI) for _ in range(ncomp))
        return BoundedVerdict(Tri.YES, full, full, message="periodic target is compact")
    X = _sample_box(K)
    lo = np.full(ncomp, np.inf)
    hi = np.full(ncomp, -np.inf)
    sups = []
    worst = None
    for eps in grid:
        V = _map_values(rep, eps, X)
        if not np.all(np.isfinite(V)):
            bad = X[int(np.argmax(~np.all(np.isfinite(V), axis=1)))]
            return BoundedVerdict(Tri.NO, (), (), bad.tolist(), None, f"non-finite image at eps={eps:g}")
        lo = np.minimum(lo, V.min(axis=0))
        hi = np.maximum(hi, V.max(axis=0))
        mags = np.max(np.abs(V), axis=1)
        sups.append(float(mags.max()))
        worst = X[int(np.argmax(mags))]
    est = fit_order(np.array(sups), grid, tol)
    width = hi - lo
    pad = 0.1 * np.where(width > 0, width, np.maximum(1.0, np.abs(lo)))
    hull = tuple(zip(lo.tolist(), hi.tolist()))
    box = tuple(zip((lo - pad).tolist(), (hi + pad).tolist()))
    if est.good(tol) and not est.all_zero and est.slope < -tol.slope:
        return BoundedVerdict(Tri.NO, hull, box, worst.tolist(), est,
                              f"images grow like eps^{est.slope:.3f}")
    return BoundedVerdict(Tri.YES, hull, box, None, est)


# ---------------------------------------------------------------------------
# vector fields and flows
# ---------------------------------------------------------------------------

@dataclass
class GeneralizedVectorField:
    """A vector-valued representative ``xi`` on a chart (``shape == (n,)``)."""

    rep: Representative
    report: dict | None = None

    def __post_init__(self):
        if self.rep.shape != (self.rep.domain.ndim,):
            raise ValueError(f"vector field needs shape ({self.rep.domain.ndim},), got {self.rep.shape}")

    @classmethod
    def from_exprs(cls, exprs, domain):
        return cls(Representative.vector(exprs, domain))

    @property
    def domain(self):
        return self.rep.domain

    @property
    def n(self):
        return self.rep.domain.ndim

    def __neg__(self):
        return GeneralizedVectorField(-self.rep)

    def windows(self, eps, batch=1):
        """Kernel windows of the components, replicated for a batch of stacked states."""
        out = []
        seen = set()
        for comp in self.rep.components:
            for axis, center, half in E.kernel_windows(comp, self.n):
                c = eps_value(center, eps, self.n)
                h = abs(eps_value(half, eps, self.n))
                if (axis, c, h) in seen or not h > 0:
                    continue
                seen.add((axis, c, h))
                for b in range(batch):
                    out.append(Window(b * self.n + axis, c, h, self.domain.periodic))
        return out


def _flow_batch(xi, eps, X0, t_span, rtol):
    n = xi.n
    m = len(X0)
    tp = xi.rep.compiled()
    dom = xi.domain

    def rhs(t, y):
        X = np.ascontiguousarray(dom.wrap(y.reshape(m, n)))
        return tape.run(tp, eps, X).T.ravel()

    margin = None
    if not dom.periodic:
        lo = np.tile(np.array(dom.lower), m)
        hi = np.tile(np.array(dom.upper), m)
        margin = lambda y: float(min(np.min(y - lo), np.min(hi - y)))
    return integrate(rhs, t_span, np.asarray(X0, dtype=float).ravel(), xi.windows(eps, m),
                     rtol=rtol, atol=rtol * 1e-2, in_chart=margin)


def flow(xi, eps, t, x0, rtol=None):
    """``Phi_eps(t, x0)`` (unwrapped coordinates; raises if the trajectory leaves a box chart)."""
    rtol = DEFAULT_TOL.ode_rtol if rtol is None else rtol
    eps = check_eps(eps, xi.rep.eps_ceiling)
    x0 = np.asarray(x0, dtype=float)
    if float(t) == 0.0:
        return x0.copy()
    sol = _flow_batch(xi, eps, x0[None, :], (0.0, float(t)), rtol)
    if sol.truncated:
        raise DomainError(f"flow truncated: {sol.message}")
    return sol.y[:, -1]


@dataclass
class GeneralizedFlow:
    """Per-eps flows on a lattice of initial points, with dense output in ``t``."""

    field: GeneralizedVectorField
    grid: EpsilonGrid
    lattice: np.ndarray
    t_span: tuple
    solutions: dict = field(repr=False, default_factory=dict)
    truncated: dict = field(default_factory=dict)

    def at(self, j, t):
        """``Phi_{eps_j}(t, lattice)`` as an array ``(npts, n)`` (unwrapped)."""
        n = self.field.n
        parts = [sol(float(t)).reshape(-1, n) for sol in self.solutions[j]]
        return np.vstack(parts)

    def reported(self, j, t):
        """Like :meth:`at`, torus angles mapped into ``[0, 2 pi)``."""
        return self.field.domain.report_angles(self.at(j, t))


def flow_net(xi, grid=None, t_span=(0.0, 1.0), lattice=None, rtol=None):
    """Integrate the flow from every lattice point for every grid eps (batched states)."""
    grid = grid or EpsilonGrid()
    rtol = DEFAULT_TOL.ode_rtol if rtol is None else rtol
    if lattice is None:
        K = xi.domain.default_compact(0.1)
        lattice = _sample_box(K, 25 ** xi.n if xi.n <= 1 else 5 ** xi.n)
    lattice = np.atleast_2d(np.asarray(lattice, dtype=float))
    out = GeneralizedFlow(xi, grid, lattice, tuple(map(float, t_span)))
    for j, eps in enumerate(grid):
        eps = check_eps(eps, xi.rep.eps_ceiling)
        sols = [_flow_batch(xi, eps, lattice[b:b + BATCH], t_span, rtol)
                for b in range(0, len(lattice), BATCH)]
        out.solutions[j] = sols
        out.truncated[j] = any(s.truncated for s in sols)
    return out


def flow_identities(phi, pairs=None, rtol=None):
    """Residuals of ``Phi(0, x) = x`` and ``Phi(t + s, x) = Phi(t, Phi(s, x))`` per grid eps."""
    t0, t1 = phi.t_span
    if pairs is None:
        L = t1 - t0
        pairs = [(0.25 * L, 0.5 * L), (0.5 * L, 0.4 * L), (0.1 * L, 0.85 * L)]
    dom = phi.field.domain
    ident, group = [], []
    for j, eps in enumerate(phi.grid):
        if phi.truncated[j]:
            ident.append(math.nan)
            group.append(math.nan)
            continue
        ident.append(float(np.max(dom.distance(phi.at(j, 0.0), phi.lattice))))
        worst = 0.0
        for s, t in pairs:
            if not t0 <= s + t <= t1:
                raise ValueError(f"t + s = {s + t} outside the flow interval")
            mid = phi.at(j, s)
            again = np.vstack([_flow_batch(phi.field, eps, mid[b:b + BATCH], (0.0, t),
                                           DEFAULT_TOL.ode_rtol if rtol is None else rtol).y[:, -1].reshape(-1, phi.field.n)
                               for b in range(0, len(mid), BATCH)])
            worst = max(worst, float(np.max(dom.distance(again, phi.at(j, s + t)))))
        group.append(worst)
    return {"identity": ident, "group": group,
            "max_identity": float(np.nanmax(ident)), "max_group": float(np.nanmax(group))}


# ---------------------------------------------------------------------------
# flow-theorem growth conditions
# ---------------------------------------------------------------------------

def _log_fit(values, grid):
    L = np.abs(np.log(grid.values))
    out = {}
    for name, feature in (("log", L), ("log2", L ** 2)):
        A = np.vstack([feature, np.ones_like(feature)]).T
        coef, *_ = np.linalg.lstsq(A, values, rcond=None)
        resid = values - A @ coef
        scale = max(float(np.max(np.abs(values))), 1e-300)
        out[name] = {"coefficient": float(coef[0]), "intercept": float(coef[1]),
                     "relative_residual": float(np.sqrt(np.mean(resid ** 2)) / scale)}
    return out


def check_flow_conditions(xi, grid=None, K=None):
    """Growth of ``sup |xi_eps|`` and ``sup |d xi_eps|`` against ``|log eps|`` (informative).

    The report contains per-eps sups, least-squares coefficients against
    ``|log eps|`` and ``|log eps|^2`` with relative residuals, and the
    better-fitting growth law for each quantity.
    """
    grid = grid or EpsilonGrid()
    n = xi.n
    K = K or xi.domain.default_compact(0.1)
    norm2 = Representative.scalar(E.add(*(E.power(c, 2) for c in xi.rep.components)), xi.domain)
    sup_norm = np.sqrt(np.array([sup_at(norm2, K, eps) for eps in grid]))
    derivs = []
    for comp in xi.rep.components:
        for i in range(n):
            d = Representative.scalar(comp.diff(i), xi.domain)
            derivs.append([sup_at(d, K, eps) for eps in grid])
    sup_deriv = np.max(np.array(derivs), axis=0)
    report = {"eps": grid.values.tolist(), "sup_norm": sup_norm.tolist(), "sup_derivative": sup_deriv.tolist()}
    for name, vals in (("norm", sup_norm), ("derivative", sup_deriv)):
        fits = _log_fit(vals, grid)
        report[f"{name}_fits"] = fits
        spread = float(np.ptp(vals))
        if spread <= 1e-9 * max(1.0, float(np.max(np.abs(vals)))):
            law = "bounded"
        else:
            law = min(fits, key=lambda k: fits[k]["relative_residual"])
        report[f"{name}_growth"] = law
    report["C_est"] = report["norm_fits"]["log"]["coefficient"]
    xi.report = report
    return report


# ---------------------------------------------------------------------------
# map-valued nets
# ---------------------------------------------------------------------------

def map_equivalent(u, v, K, m_max=3, grid=None, target=None, tol=DEFAULT_TOL):
    """``sup_K d(u_eps, v_eps) = O(eps^m_max)`` in the target chart's distance."""
    grid = grid or EpsilonGrid()
    if u.domain != v.domain or u.shape != v.shape:
        raise ValueError("maps must share source chart and shape")
    K = tuple((float(a), float(b)) for a, b in K)
    X = _sample_box(K)
    sups = []
    for eps in grid:
        a = _map_values(u, eps, X)
        b = _map_values(v, eps, X)
        if target is not None:
            d = target.distance(a, b)
        else:
            d = np.sqrt(np.sum((a - b) ** 2, axis=1))
        sups.append(float(np.max(d)))
    sups = np.array(sups)
    est = fit_order(sups, grid, tol)
    if est.all_zero:
        answer = Tri.YES
    elif not est.good(tol):
        answer = Tri.INCONCLUSIVE
    else:
        answer = Tri.YES if est.slope >= m_max - tol.slope else Tri.NO
    return Verdict(answer, "equivalent", m_max if answer is Tri.YES else None, {"distance": est},
                   grid.values.tolist(), {"distance": sups.tolist()})


# ---------------------------------------------------------------------------
# the torus example
# ---------------------------------------------------------------------------

def log_scale():
    """``sigma(eps) = 1/|log eps| = -1/log(eps)`` (valid for ``eps <= 1/2``)."""
    return E.div(E.Const(-1.0), E.log(E.EPS))


def torus_field(mollifier=None):
    """``xi_eps(alpha, beta) = (1, 1 - rho_sigma(alpha))`` with ``sigma = 1/|log eps|``."""
    mollifier = mollifier or make_mollifier()
    dom = ChartDomain.torus()
    pulse = E.Kernel(mollifier, 0, E.var(0), log_scale())
    return GeneralizedVectorField.from_exprs((E.ONE, E.sub(E.ONE, pulse)), dom)


def _turns(mollifier, theta, sigma):
    """``int_0^theta`` of the periodized kernel ``rho_sigma`` (lifted, continuous in theta)."""
    theta = np.asarray(theta, dtype=float)
    k = np.floor((theta + math.pi) / TWO_PI)
    wrapped = theta - k * TWO_PI
    base = mollifier.partial_moment(0, np.array([0.0]))[0]
    return k + mollifier.partial_moment(0, wrapped / sigma) - base


def _heaviside_turns(theta):
    theta = np.asarray(theta, dtype=float)
    k = np.floor((theta + math.pi) / TWO_PI)
    wrapped = theta - k * TWO_PI
    return k + np.where(wrapped >= 0, 1.0, 0.0) - 1.0


def torus_closed_form(mollifier, eps, t, X):
    """``(alpha + t, beta + t - int_alpha^{alpha+t} rho_sigma)``."""
    sigma = -1.0 / math.log(eps)
    X = np.atleast_2d(X)
    a, b = X[:, 0], X[:, 1]
    return np.stack([a + t, b + t - (_turns(mollifier, a + t, sigma) - _turns(mollifier, a, sigma))], axis=1)


def torus_limit(t, X):
    """``(alpha + t, beta + t - H(alpha + t) + H(alpha))`` with ``H`` counted per turn."""
    X = np.atleast_2d(X)
    a, b = X[:, 0], X[:, 1]
    return np.stack([a + t, b + t - (_heaviside_turns(a + t) - _heaviside_turns(a))], axis=1)


def _wrapped_abs(theta):
    return np.abs(np.mod(np.asarray(theta) + math.pi, TWO_PI) - math.pi)


def torus_default_lattice():
    alphas = np.array([-2.5, -1.2, -0.6, -0.3, 0.0, 0.4, 1.0, 2.2, 3.0])
    betas = np.array([0.0, 1.5, 4.0])
    A, B = np.meshgrid(alphas, betas, indexing="ij")
    return np.stack([A.ravel(), B.ravel()], axis=1)


@dataclass
class TorusReport:
    field: GeneralizedVectorField
    flow: GeneralizedFlow
    times: np.ndarray
    closed_form_error: list
    limit_error: list
    window: float
    excluded: int
    identities: dict

    def to_dict(self):
        return {"closed_form_error": self.closed_form_error, "limit_error": self.limit_error,
                "window": self.window, "excluded": self.excluded, "identities": self.identities,
                "eps": self.flow.grid.values.tolist()}


def torus_example(mollifier=None, grid=None, lattice=None, t_span=(0.0, 2.0), n_times=9, identities=True):
    """Flow of the torus field compared with its closed form and with the discontinuous limit."""
    mollifier = mollifier or make_mollifier()
    grid = grid or EpsilonGrid()
    xi = torus_field(mollifier)
    lattice = torus_default_lattice() if lattice is None else np.atleast_2d(lattice)
    phi = flow_net(xi, grid, t_span, lattice)
    times = np.linspace(t_span[0], t_span[1], n_times)
    dom = xi.domain
    window = 2.0 * (-1.0 / math.log(grid.smallest)) * mollifier.radius
    closed, limit = [], []
    excluded = 0
    for j, eps in enumerate(grid):
        worst_c, worst_l = 0.0, 0.0
        for t in times:
            got = phi.at(j, t)
            worst_c = max(worst_c, float(np.max(dom.distance(got, torus_closed_form(mollifier, eps, t, lattice)))))
            keep = (_wrapped_abs(lattice[:, 0]) > window) & (_wrapped_abs(lattice[:, 0] + t) > window)
            if j == 0:
                excluded += int(np.sum(~keep))
            if np.any(keep):
                d = dom.distance(got[keep], torus_limit(t, lattice[keep]))
                worst_l = max(worst_l, float(np.max(d)))
        closed.append(worst_c)
        limit.append(worst_l)
    ident = flow_identities(phi) if identities else {}
    return TorusReport(xi, phi, times, closed, limit, window, excluded, ident)
