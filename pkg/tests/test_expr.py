import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from colombeau import expr as E
from colombeau.errors import CertificateError
from colombeau.nets import ChartDomain, Representative
from colombeau.tape import evaluate

X, Y = E.var(0), E.var(1)


def ev(e, eps, pts, ndim=2):
    return evaluate((e,), eps, np.atleast_2d(pts), ndim)[0]


# random smooth expressions in (x, y, eps) with certified quotients only
def _leaves():
    return st.sampled_from([X, Y, E.EPS, E.Const(0.5), E.Const(-1.25), E.Const(2.0)])


def _extend(children):
    unary = st.sampled_from([E.sin, E.cos, lambda a: E.exp(E.mul(E.Const(0.3), E.sin(a))),
                             lambda a: E.power(a, 2), lambda a: E.power(a, 3)])
    return st.one_of(
        st.tuples(children, children).map(lambda p: E.add(*p)),
        st.tuples(children, children).map(lambda p: E.mul(*p)),
        st.tuples(children, children).map(lambda p: E.sub(*p)),
        st.tuples(unary, children).map(lambda p: p[0](p[1])),
        children.map(lambda a: E.div(a, E.add(E.Const(1.5), E.power(E.sin(a), 2)))),
    )


exprs = st.recursive(_leaves(), _extend, max_leaves=8)
points = st.tuples(st.floats(0.01, 1.0), st.floats(-2, 2), st.floats(-2, 2))


def _close(a, b, rel):
    scale = max(1.0, abs(a), abs(b))
    return abs(a - b) <= rel * scale


@settings(max_examples=200, deadline=None)
@given(exprs, exprs, exprs, points)
def test_ring_axioms_hold_pointwise(a, b, c, p):
    eps, x, y = p
    pt = [x, y]
    va, vb, vc = (ev(e, eps, pt)[0] for e in (a, b, c))
    checks = [
        (E.add(a, b), va + vb), (E.add(b, a), va + vb),
        (E.mul(a, b), va * vb), (E.mul(b, a), va * vb),
        (E.add(E.add(a, b), c), (va + vb) + vc),
        (E.mul(E.mul(a, b), c), va * vb * vc),
        (E.mul(a, E.add(b, c)), va * (vb + vc)),
        (E.mul(E.ONE, a), va), (E.add(E.Const(0.0), a), va),
    ]
    # round-off is relative to the largest intermediate, not to a cancelled result
    M = max(1.0, abs(va), abs(vb), abs(vc), abs(va * vb), abs(va * vb * vc), abs(va * vb) + abs(va * vc))
    for e, want in checks:
        got = ev(e, eps, pt)[0]
        assert abs(got - want) <= 1e-12 * M, (e, got, want)


def test_ring_axioms_on_ten_thousand_samples(moll, rng):
    a = E.mul(E.sin(X), E.Kernel(moll, 0, Y, E.EPS))
    b = E.add(E.KMom(moll, 0, X, E.EPS), E.power(Y, 2))
    c = E.div(E.cos(E.mul(X, Y)), E.add(E.Const(2.0), E.power(E.sin(X), 2)))
    pts = rng.uniform(-1.5, 1.5, size=(10_000, 2))
    for eps in (0.5, 0.05, 0.003):
        va, vb, vc = (ev(e, eps, pts) for e in (a, b, c))
        M = np.maximum.reduce([np.ones_like(va), np.abs(va), np.abs(vb), np.abs(vc),
                               np.abs(va * vb * vc), np.abs(va * vb) + np.abs(va * vc)])
        for e, want in ((E.add(E.add(a, b), c), va + vb + vc), (E.mul(E.mul(a, b), c), va * vb * vc),
                        (E.mul(a, E.add(b, c)), va * vb + va * vc), (E.mul(b, a), va * vb)):
            assert np.all(np.abs(ev(e, eps, pts) - want) <= 1e-12 * M)


@settings(max_examples=150, deadline=None)
@given(exprs, exprs, points, st.integers(0, 1))
def test_derive_is_a_derivation(a, b, p, axis):
    eps, x, y = p
    alpha = (1, 0) if axis == 0 else (0, 1)
    lhs = E.derive(E.mul(a, b), alpha)
    rhs = E.add(E.mul(E.derive(a, alpha), b), E.mul(a, E.derive(b, alpha)))
    l, r = ev(lhs, eps, [x, y])[0], ev(rhs, eps, [x, y])[0]
    assert _close(l, r, 1e-9)


@settings(max_examples=60, deadline=None)
@given(exprs, points)
def test_derivatives_commute_and_compose(a, p):
    eps, x, y = p
    d1 = E.derive(E.derive(a, (1, 0)), (0, 1))
    d2 = E.derive(E.derive(a, (0, 1)), (1, 0))
    d3 = E.derive(a, (1, 1))
    vals = [ev(d, eps, [x, y])[0] for d in (d1, d2, d3)]
    assert _close(vals[0], vals[1], 1e-9) and _close(vals[0], vals[2], 1e-9)


def test_finite_difference_order_at_least_1p8():
    e = E.add(E.mul(E.sin(E.mul(E.Const(3.0), X)), E.exp(Y)), E.power(X, 3))
    d = E.derive(e, (1, 0))
    x0 = np.array([0.37, -0.2])
    exact = ev(d, 0.1, x0)[0]
    errs = []
    hs = [0.1 / 2 ** k for k in range(5)]
    for h in hs:
        fd = (ev(e, 0.1, x0 + [h, 0])[0] - ev(e, 0.1, x0 - [h, 0])[0]) / (2 * h)
        errs.append(abs(fd - exact))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 1.8)


def test_symbolic_derivative_examples(moll):
    assert E.derive(E.power(X, 2), (1,)) == E.mul(E.Const(2.0), X)
    k = E.Kernel(moll, 0, X, E.EPS)
    dk = E.derive(k, (1,))
    # eps^-2 rho'(x/eps) against a direct difference of rho(x/eps)/eps
    eps, x, h = 0.3, 0.1, 1e-5
    fd = (moll.value(np.array([(x + h) / eps]))[0] - moll.value(np.array([(x - h) / eps]))[0]) / (2 * h * eps)
    assert ev(dk, eps, [[x]], 1)[0] == pytest.approx(fd, rel=1e-7)
    # Leibniz: d(sin x rho_eps) = cos x rho_eps + sin x rho_eps'
    prod = E.derive(E.mul(E.sin(X), k), (1,))
    want = math.cos(x) * ev(k, eps, [[x]], 1)[0] + math.sin(x) * ev(dk, eps, [[x]], 1)[0]
    assert ev(prod, eps, [[x]], 1)[0] == pytest.approx(want, rel=1e-12)


def test_quotient_needs_certificate():
    with pytest.raises(CertificateError):
        E.div(E.ONE, X)
    with pytest.raises(CertificateError):
        E.div(E.ONE, E.sin(X))
    ok = E.div(E.ONE, E.mul(E.power(E.EPS, 2), E.add(E.ONE, E.power(X, 2))))
    assert ev(ok, 0.5, [[0.0]], 1)[0] == pytest.approx(4.0)


def test_trees_are_immutable_and_hashable():
    e = E.add(X, E.Const(1.0))
    with pytest.raises(Exception):
        e.terms = ()
    assert hash(e) == hash(E.add(X, E.Const(1.0)))


def test_representative_algebra_examples(moll):
    dom = ChartDomain.interval(-2.0, 2.0)
    H = Representative.scalar(E.KMom(moll, 0, X, E.EPS), dom)
    one = Representative.constant(1.0, dom)
    for eps, x in ((0.3, 0.1), (0.05, -0.02)):
        assert (one * H).eval(eps, x) == H.eval(eps, x)
        assert (H * H).eval(eps, x) == pytest.approx(H.eval(eps, x) ** 2, rel=1e-15)
    delta = Representative.scalar(E.Kernel(moll, 0, X, E.EPS), dom)
    xs = Representative.scalar(X, dom)
    assert (xs * delta).eval(0.1, 0.0) == 0.0
