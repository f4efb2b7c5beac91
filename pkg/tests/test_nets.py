import math

import numpy as np
import pytest

from colombeau import expr as E
from colombeau.errors import CompositionError, DomainError, ParameterError
from colombeau.nets import ChartDomain, EpsilonGrid, Representative, sigma

X = E.var(0)


def test_eval_examples(moll):
    dom = ChartDomain.interval(-4.0, 4.0)
    assert sigma(E.power(X, 2), dom).eval(0.5, 3.0) == 9.0
    rho = Representative.scalar(E.Kernel(moll, 0, X, E.EPS), dom)
    for eps in (0.5, 0.01):
        assert rho.eval(eps, 0.0) == pytest.approx(moll.value(np.array([0.0]))[0] / eps, rel=1e-14)
    shifted = Representative.scalar(E.Kernel(moll, 0, E.sub(X, E.EPS), E.EPS), dom)
    for eps in (0.3, 0.02):
        assert shifted.eval(eps, eps) == pytest.approx(moll.value(np.array([0.0]))[0] / eps, rel=1e-14)


def test_eval_rejects_bad_inputs():
    dom = ChartDomain.interval(-1.0, 1.0)
    u = sigma(X, dom)
    with pytest.raises(DomainError):
        u.eval(0.5, 2.0)
    for eps in (0.0, -0.1, 1.5, math.nan):
        with pytest.raises(ParameterError):
            u.eval(eps, 0.0)


def test_eps_ceiling_from_log_certificate():
    dom = ChartDomain.interval(-1.0, 1.0)
    u = Representative.scalar(E.div(E.Const(-1.0), E.log(E.EPS)), dom)
    assert u.eval(0.5, 0.0) == pytest.approx(1.0 / math.log(2.0))
    with pytest.raises(ParameterError):
        u.eval(0.9, 0.0)


def test_grid_invariants():
    g = EpsilonGrid()
    v = g.values
    assert len(v) == 24 and v[0] == 0.5 and np.all(np.diff(v) < 0)
    assert g.smallest == pytest.approx(0.5 * 0.7 ** 23)
    assert EpsilonGrid.parse("0.25,0.5,8").values[-1] == pytest.approx(0.25 * 0.5 ** 7)
    for bad in ("1.5,0.7,24", "0.5,1.0,24", "0.5,0.7,7", "0.5,0.7", "a,b,c"):
        with pytest.raises(ParameterError):
            EpsilonGrid.parse(bad)


def test_torus_domain_wraps_and_uses_periodic_distance():
    T = ChartDomain.torus()
    a = np.array([[0.1, 6.2]])
    b = np.array([[2 * math.pi + 0.1, -0.08318530717958605]])
    assert T.distance(a, b)[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(T.contains(np.array([[100.0, -7.0]])))
    assert T.report_angles(np.array([[-0.5, 7.0]]))[0] == pytest.approx([2 * math.pi - 0.5, 7.0 - 2 * math.pi])


def test_shapes_and_componentwise_algebra():
    dom = ChartDomain.box([(-1, 1), (-1, 1)], ("x", "y"))
    m = Representative.matrix([[X, E.ONE], [E.ONE, E.var(1)]], dom)
    v = m * 2.0 + 1.0
    assert np.allclose(v.eval(0.3, [0.5, -0.25]), [[2.0, 3.0], [3.0, 0.5]])
    with pytest.raises(ValueError):
        Representative.matrix([[X], [X, X]], dom)
    with pytest.raises(ValueError):
        Representative.scalar(E.var(2), dom)


def test_derive_composes(moll):
    dom = ChartDomain.interval(-2.0, 2.0)
    u = Representative.scalar(E.mul(E.sin(X), E.Kernel(moll, 0, X, E.EPS)), dom)
    a = u.derive((1,)).derive((2,))
    b = u.derive((3,))
    xs = np.linspace(-0.3, 0.3, 41)[:, None]
    assert np.allclose(a.eval_many(0.2, xs), b.eval_many(0.2, xs), rtol=1e-12, atol=1e-9)


def test_compose_examples(moll, short_grid):
    dom = ChartDomain.interval(-4.0, 4.0)
    u = Representative.scalar(E.mul(E.sin(X), E.KMom(moll, 0, X, E.EPS)), dom)
    ident = sigma(X, dom)
    same = ident.compose(u, ((-2.0, 2.0),), short_grid)
    xs = np.linspace(-2, 2, 17)[:, None]
    assert np.array_equal(same.eval_many(0.1, xs), u.eval_many(0.1, xs))
    const = Representative.constant(0.25, dom)
    c = const.compose(u, ((-2.0, 2.0),), short_grid)
    assert np.allclose(c.eval_many(0.1, xs), u.eval(0.1, 0.25))
    shift = Representative.scalar(E.sub(X, E.EPS), dom)
    kern = Representative.scalar(E.Kernel(moll, 0, X, E.EPS), dom)
    pv = shift.compose(kern, ((-2.0, 2.0),), short_grid)
    for eps in (0.2, 0.05):
        assert pv.eval(eps, eps) == pytest.approx(moll.value(np.array([0.0]))[0] / eps)


def test_compose_rejects_escaping_or_unbounded_ranges(short_grid):
    inner_dom = ChartDomain.interval(-4.0, 4.0)
    outer_dom = ChartDomain.interval(-1.0, 1.0)
    outer = sigma(E.power(X, 2), outer_dom)
    with pytest.raises(CompositionError):
        sigma(E.mul(E.Const(3.0), X), inner_dom).compose(outer, ((-1.0, 1.0),), short_grid)
    blowup = Representative.scalar(E.div(X, E.EPS), inner_dom)
    with pytest.raises(CompositionError):
        blowup.compose(outer, ((-1.0, 1.0),), short_grid)
