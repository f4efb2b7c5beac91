import math

import numpy as np
import pytest
import sympy as sp

from colombeau import expr as E
from colombeau.association import TestFunction
from colombeau.errors import MetricError
from colombeau.geometry import (check_metric, christoffel, curvature, energy, explicit_curve,
                                field_from_exprs, geodesic, geodesic_net, induced_covariant_derivative,
                                inner, pp_wave_components, pp_wave_metric, ricci_pairing, velocity_field)
from colombeau.nets import ChartDomain, EpsilonGrid, Representative

GRID = EpsilonGrid(0.5, 0.7, 12)
T = E.var(0)


def minkowski():
    dom = ChartDomain.box([(-5, 5)] * 4, ("t", "x", "y", "z"))
    rows = [[E.Const(float(-1 if i == j == 0 else (1 if i == j else 0))) for j in range(4)] for i in range(4)]
    return check_metric(Representative.matrix(rows, dom), GRID)


def sphere():
    dom = ChartDomain.box([(0.2, 2.9), (-3.0, 3.0)], ("theta", "phi"))
    rows = [[E.ONE, E.ZERO], [E.ZERO, E.power(E.sin(E.var(0)), 2)]]
    return check_metric(Representative.matrix(rows, dom), GRID, K=((0.4, 2.7), (-2.0, 2.0)))


@pytest.fixture(scope="module")
def pp():
    return pp_wave_metric("vacuum", grid=GRID)


def test_minkowski_is_flat():
    G = minkowski()
    assert G.index == 1 and G.det == E.Const(-1.0)
    X = np.random.default_rng(0).uniform(-2, 2, size=(20, 4))
    assert np.all(G.christoffel_many(0.1, X) == 0.0)
    riem, ric = G.curvature_many(0.1, X)
    assert np.max(np.abs(riem)) <= 1e-10
    c = geodesic(G, [0, 0.5, 0, -1], [1, 0.3, -0.2, 0.1], 0.1, (0.0, 2.0))
    ts = np.linspace(0, 2, 9)
    want = np.array([0, 0.5, 0, -1])[:, None] + np.outer([1, 0.3, -0.2, 0.1], ts)
    assert np.max(np.abs(c.position(ts) - want)) <= 1e-9


def test_flat_geodesic_net_is_eps_independent():
    G = minkowski()
    curve, rep = geodesic_net(G, [0, 0, 0, 0], [1, 0.5, 0, 0], EpsilonGrid(0.5, 0.7, 8), (0.0, 1.0), n_times=21)
    assert rep.converged and max(rep.cauchy_distances) <= 1e-12
    assert rep.straightness <= 1e-12


def test_sphere_christoffel_and_curvature():
    G = sphere()
    assert G.index == 0
    for th in (0.5, 1.1, 2.3):
        gam = christoffel(G, 0.2, [th, 0.4])
        assert gam[0, 1, 1] == pytest.approx(-math.sin(th) * math.cos(th), abs=1e-13)
        assert gam[1, 0, 1] == pytest.approx(math.cos(th) / math.sin(th), rel=1e-13)
        assert gam[1, 1, 0] == gam[1, 0, 1]
        riem, ric = curvature(G, 0.2, [th, 0.4])
        g = G.metric_at(0.2, np.array([[th, 0.4]]))[0]
        # sectional curvature R_{theta phi theta phi} / det g with R_{lkij} = g_lm R^m_kij
        low = np.einsum("lm,mkij->lkij", g, riem)
        K = low[0, 1, 0, 1] / (g[0, 0] * g[1, 1])
        assert abs(K) == pytest.approx(1.0, abs=1e-6)
        assert np.allclose(ric, g, atol=1e-9)


def test_degenerate_metric_is_rejected():
    dom = ChartDomain.box([(-1, 1), (-1, 1)], ("x", "y"))
    rows = [[E.power(E.var(0), 2), E.ZERO], [E.ZERO, E.ONE]]
    with pytest.raises(MetricError):
        check_metric(Representative.matrix(rows, dom), GRID)


def test_asymmetric_metric_is_rejected():
    dom = ChartDomain.box([(-1, 1), (-1, 1)], ("x", "y"))
    rows = [[E.ONE, E.var(0)], [E.ZERO, E.ONE]]
    with pytest.raises(MetricError):
        check_metric(Representative.matrix(rows, dom), GRID)


def test_ppwave_determinant_and_index_by_sympy(pp):
    u, v, x, y = sp.symbols("u v x y")
    h = sp.Function("h")(u)
    f = sp.Function("f")(x, y)
    g = sp.Matrix([[f * h, -sp.Rational(1, 2), 0, 0], [-sp.Rational(1, 2), 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    assert sp.simplify(g.det()) == -sp.Rational(1, 4)
    assert pp.index == 1 and pp.det == E.Const(-0.25)
    # eigenvalue oracle at a few points
    X = np.array([[0.0, 0.0, 1.0, 1.0], [0.01, 3.0, -2.0, 0.5]])
    for eps in (0.5, 0.01):
        for gm in pp.metric_at(eps, X):
            assert int(np.sum(np.linalg.eigvalsh(gm) < 0)) == 1


def test_ppwave_christoffel_supported_in_pulse(moll, pp):
    eps = 0.05
    inside = pp.christoffel_many(eps, np.array([[0.02, 0.0, 1.3, 0.4]]))[0]
    outside = pp.christoffel_many(eps, np.array([[0.2, 0.0, 1.3, 0.4], [-0.06, 1.0, 0.3, 2.0]]))
    assert np.any(inside != 0.0)
    assert np.all(outside == 0.0)
    # Gamma^x_uu = -1/2 d_x (f rho_eps(u)) = -x rho_eps(u) for f = x^2 - y^2
    rho = moll.value(np.array([0.02 / eps]))[0] / eps
    assert inside[2, 0, 0] == pytest.approx(-1.3 * rho, rel=1e-13)


def _sympy_ricci(g, coords):
    n = len(coords)
    ginv = g.inv()
    gam = [[[sum(ginv[a, d] * (sp.diff(g[d, b], coords[c]) + sp.diff(g[d, c], coords[b])
                               - sp.diff(g[b, c], coords[d])) for d in range(n)) / 2
             for c in range(n)] for b in range(n)] for a in range(n)]
    ric = sp.zeros(n, n)
    for b in range(n):
        for d in range(n):
            ric[b, d] = sp.simplify(sum(sp.diff(gam[a][b][d], coords[a]) - sp.diff(gam[a][b][a], coords[d])
                                        + sum(gam[a][a][e] * gam[e][b][d] - gam[a][d][e] * gam[e][b][a]
                                              for e in range(n)) for a in range(n)))
    return ric


@pytest.mark.parametrize("profile, fxy", [("vacuum", lambda x, y: x ** 2 - y ** 2),
                                          ("nonvacuum", lambda x, y: x ** 2 + y ** 2),
                                          ("(* (sin x) (exp y))", lambda x, y: sp.sin(x) * sp.exp(y))])
def test_ppwave_ricci_matches_symbolic_oracle(moll, profile, fxy):
    u, v, x, y = sp.symbols("u v x y")
    h = sp.Function("h")(u)
    g = sp.Matrix([[fxy(x, y) * h, -sp.Rational(1, 2), 0, 0], [-sp.Rational(1, 2), 0, 0, 0],
                   [0, 0, 1, 0], [0, 0, 0, 1]])
    ric = _sympy_ricci(g, (u, v, x, y))
    # only R_uu survives: -1/2 (f_xx + f_yy) h(u)
    assert all(sp.simplify(ric[i, j]) == 0 for i in range(4) for j in range(4) if (i, j) != (0, 0))
    ruu = sp.lambdify((x, y, h), ric[0, 0].subs(sp.Derivative(h, u), 0))
    G = pp_wave_metric(profile, moll, grid=GRID)
    eps = 0.1
    X = np.array([[0.03, 0.0, 0.7, -0.4], [-0.05, 2.0, 1.5, 0.3], [0.099, -1.0, -0.2, 1.1]])
    _, got = G.curvature_many(eps, X)
    for p, r in zip(X, got):
        want = float(ruu(p[2], p[3], moll.value(np.array([p[0] / eps]))[0] / eps))
        assert r[0, 0] == pytest.approx(want, rel=1e-10, abs=1e-10)
        r2 = r.copy()
        r2[0, 0] = 0.0
        assert np.max(np.abs(r2)) <= 1e-9 * max(1.0, abs(want))


def test_ricci_pairing_limits(moll):
    phi = TestFunction(0.1, 0.6)
    phi0 = float(phi.value(np.array([0.0]))[0])
    fixed = (0.0, 0.0, 1.0, 1.0)
    vac = pp_wave_metric("vacuum", moll, grid=GRID)
    non = pp_wave_metric("nonvacuum", moll, grid=GRID)
    for eps in (0.3, 0.01):
        assert abs(ricci_pairing(vac, phi, eps, fixed)) <= 1e-12
        assert ricci_pairing(non, phi, eps, fixed) == pytest.approx(-2.0 * phi0, rel=1e-2)


def _random_curves(rng, n=10):
    """Curves in (u, v, x, y) that cross the pulse at u = 0."""
    out = []
    for _ in range(n):
        a = rng.uniform(-0.5, 0.5, size=(4, 3))
        comps = [E.add(E.Const(float(a[k, 0])), E.mul(E.Const(float(a[k, 1]) + (1.0 if k == 0 else 0.0)), T),
                       E.mul(E.Const(float(a[k, 2])), E.sin(E.mul(E.Const(2.0), T)))) for k in range(4)]
        comps[0] = E.add(comps[0], E.Const(-float(a[0, 0])))
        out.append(comps)
    return out


def _fd(fn, t, h=1e-4):
    return (-fn(t + 2 * h) + 8 * fn(t + h) - 8 * fn(t - h) + fn(t - 2 * h)) / (12 * h)


def test_metric_compatibility_along_random_curves(pp):
    rng = np.random.default_rng(7)
    eps = 0.3
    dom = pp.domain
    worst = 0.0
    for comps in _random_curves(rng):
        c = explicit_curve(comps, eps, (-1.0, 1.0), dom)
        b = rng.uniform(-1, 1, size=(2, 4, 2))
        xi = field_from_exprs(c, [E.add(E.Const(float(b[0, k, 0])), E.mul(E.Const(float(b[0, k, 1])), E.cos(T)))
                                  for k in range(4)])
        eta = field_from_exprs(c, [E.add(E.Const(float(b[1, k, 0])), E.mul(E.Const(float(b[1, k, 1])), E.power(T, 2)))
                                   for k in range(4)])
        dxi, deta = induced_covariant_derivative(xi, pp), induced_covariant_derivative(eta, pp)
        ts = np.linspace(-0.9, 0.9, 37)
        lhs = _fd(lambda t: inner(pp, xi, eta, t), ts)
        rhs = inner(pp, dxi, eta, ts) + inner(pp, xi, deta, ts)
        scale = np.maximum(1.0, np.abs(rhs))
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / scale)))
    assert worst <= 1e-6


def test_torsion_free_and_linearity(pp):
    rng = np.random.default_rng(3)
    X = rng.uniform(-0.4, 0.4, size=(50, 4))
    for eps in (0.5, 0.2):
        gam = pp.christoffel_many(eps, X)
        assert np.array_equal(gam, np.swapaxes(gam, 2, 3))
    c = explicit_curve(_random_curves(rng, 1)[0], 0.2, (-1.0, 1.0), pp.domain)
    xi = field_from_exprs(c, [E.sin(T), E.ONE, T, E.cos(T)])
    eta = field_from_exprs(c, [E.power(T, 2), E.exp(T), E.ZERO, E.ONE])
    a, b = 1.7, -0.4
    lhs = induced_covariant_derivative(xi.linear(eta, a, b), pp)
    dxi, deta = induced_covariant_derivative(xi, pp), induced_covariant_derivative(eta, pp)
    ts = np.linspace(-0.9, 0.9, 19)
    assert np.max(np.abs(lhs(ts) - (a * dxi(ts) + b * deta(ts)))) <= 1e-9
    # Leibniz in a scalar function
    fxi = xi.times(np.sin, np.cos)
    got = induced_covariant_derivative(fxi, pp)(ts)
    want = np.cos(ts) * xi(ts) + np.sin(ts) * dxi(ts)
    assert np.max(np.abs(got - want)) <= 1e-9


@pytest.mark.parametrize("eps", [0.3, 0.05, 0.01, 1e-3])
def test_geodesic_energy_and_parallel_velocity(pp, eps):
    c = geodesic(pp, [-1.0, 0.0, 0.8, 0.6], [1.0, 0.3, 0.2, -0.1], eps, (0.0, 2.0))
    assert not c.truncated
    ts = np.linspace(0.0, 2.0, 2001)
    en = energy(pp, c, ts)
    assert np.max(np.abs(en - en[0])) <= 1e-8 * abs(en[0])
    acc = induced_covariant_derivative(velocity_field(c), pp)(ts)
    assert np.max(np.abs(acc)) <= 1e-9 * max(1.0, 1.0 / eps ** 2)


def test_sphere_geodesic_is_a_great_circle():
    G = sphere()
    c = geodesic(G, [math.pi / 2, 0.0], [0.6, 0.8], 0.2, (0.0, 1.5))
    ts = np.linspace(0, 1.5, 16)
    th, ph = c.position(ts)
    p = np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
    # great circle: the points lie in the plane spanned by p(0) and p'(0)
    normal = np.cross([1.0, 0.0, 0.0], [0.0, 0.8, -0.6])
    assert np.max(np.abs(normal @ p)) <= 1e-9
    en = energy(G, c, ts)
    assert np.max(np.abs(en - 1.0)) <= 1e-9


def test_ppwave_geodesic_net_refracts(moll):
    G = pp_wave_metric("vacuum", moll, grid=EpsilonGrid(0.5, 0.7, 16))
    p0 = (-1.0, 0.0, 1.0, 0.5)
    curve, rep = geodesic_net(G, p0, (1.0, 0.0, 0.0, 0.0), EpsilonGrid(0.5, 0.7, 16), (-1.0, 1.0), n_times=201)
    assert curve.bounded and not any(curve.truncated)
    x0, y0 = rep.jumps["crossing"]["x"], rep.jumps["crossing"]["y"]
    assert rep.jumps["velocity"]["x"] == pytest.approx(x0, rel=0.02)
    assert rep.jumps["velocity"]["y"] == pytest.approx(-y0, rel=0.02)
    # v jumps by f(x(0), y(0)) in the limit
    assert rep.jumps["position"]["v"] == pytest.approx(x0 ** 2 - y0 ** 2, rel=0.02)
    assert rep.straightness <= 1e-4


def test_pp_wave_components_reject_eps_profile(moll):
    with pytest.raises(ValueError):
        pp_wave_components(E.mul(E.EPS, E.var(2)), moll)
