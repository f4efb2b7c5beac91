import math

import mpmath as mp
import numpy as np
import pytest

from colombeau import expr as E
from colombeau.embedding import (embed_distribution, embed_smooth, parse_distribution,
                                 singular_points)
from colombeau.errors import ParseError, UnsupportedDistributionError
from colombeau.nets import ChartDomain

from test_mollifier import mp_kernel

DOM = ChartDomain.interval(-4.0, 4.0)


def mp_convolve(w, rho, eps, x, breaks=()):
    """``(w * rho_eps)(x) = int w(x - eps y) rho(y) dy`` in multiprecision."""
    pts = sorted({-1.0, 1.0, *[(x - b) / eps for b in breaks if -1 < (x - b) / eps < 1]})
    return float(mp.quad(lambda y: w(x - eps * y) * rho(y), pts))


def test_delta_embeds_as_scaled_kernel(moll):
    u = embed_distribution("delta", moll, DOM)
    xs = np.linspace(-0.3, 0.3, 25)
    for eps in (0.4, 0.03):
        assert np.allclose(u.eval_many(eps, xs[:, None]), moll.value(xs / eps) / eps, rtol=1e-14, atol=0)


def test_shifted_delta_derivative(moll):
    u = embed_distribution("delta'@0.5", moll, DOM)
    xs = np.linspace(0.3, 0.7, 9)
    eps = 0.2
    assert np.allclose(u.eval_many(eps, xs[:, None]), moll.value((xs - 0.5) / eps, 1) / eps ** 2, rtol=1e-13)


@pytest.mark.parametrize("text, w, breaks", [
    ("H", lambda x: mp.mpf(1) if x >= 0 else mp.mpf(0), (0.0,)),
    ("sign", lambda x: mp.sign(x), (0.0,)),
    ("abs", abs, (0.0,)),
    ("pp[(-1,0.5): 1 + x^2; (0.5,inf): 2*x]", lambda x: (1 + x * x) if -1 <= x < 0.5 else (2 * x if x >= 0.5 else 0),
     (-1.0, 0.5)),
    ("x*H@0.2 - 3*abs", lambda x: (x if x >= 0.2 else 0) - 3 * abs(x), (0.0, 0.2)),
])
def test_piecewise_embeddings_against_convolution(moll, text, w, breaks):
    u = embed_distribution(text, moll, DOM)
    rho = mp_kernel(moll)
    for eps in (0.5, 0.05):
        for x in (-1.02, -0.3, -0.01, 0.0, 0.13, 0.21, 0.5, 1.4):
            want = mp_convolve(w, rho, eps, x, breaks)
            assert u.eval(eps, x) == pytest.approx(want, abs=1e-11, rel=1e-11), (text, eps, x)


def test_pv_embedding_matches_brute_force_and_far_field(moll):
    u = embed_distribution("pv_inv", moll, DOM)
    rho = mp_kernel(moll)
    for eps in (0.3, 0.02):
        for x in (2.5 * eps, -1.0, 0.9):
            want = float(mp.quad(lambda y: rho(y) / (x - eps * y), [-1, 0, 1]))
            assert abs(u.eval(eps, x) - want) <= 1e-9 * abs(want)
        # away from the support the moment expansion gives 1/x plus an eps^6 tail
        x = 1.5
        assert abs(u.eval(eps, x) - 1 / x) <= 2 * abs(float(mp_moment6(rho))) * eps ** 6 / x ** 7


def mp_moment6(rho):
    return mp.quad(lambda y: y ** 6 * rho(y), [-1, 0, 1])


def test_pv_embedding_inside_support(moll):
    u = embed_distribution("pv_inv", moll, DOM)
    eps = 0.1
    for x in (0.0, 0.04, -0.07):
        want = moll.pv(0, x / eps) / eps
        assert u.eval(eps, x) == pytest.approx(want, rel=1e-13, abs=1e-13)


def test_smooth_embedding_against_convolution(moll):
    u = embed_distribution("smooth((* (sin x) (exp (* 0.3 x))))", moll, DOM)
    rho = mp_kernel(moll)
    f = lambda x: mp.sin(x) * mp.exp(0.3 * x)
    for eps in (0.5, 0.2, 0.05, 0.01):
        for x in (-1.3, 0.0, 0.8):
            want = mp_convolve(f, rho, eps, x)
            assert u.eval(eps, x) == pytest.approx(want, abs=1e-13)


def test_sigma_embedding_preserves_products():
    f = E.sin(E.var(0))
    g = E.add(E.ONE, E.power(E.var(0), 2))
    sf, sg = embed_smooth(f, DOM), embed_smooth(g, DOM)
    prod = embed_smooth(E.mul(f, g), DOM)
    xs = np.linspace(-3, 3, 31)[:, None]
    for eps in (0.5, 1e-4):
        assert np.array_equal((sf * sg).eval_many(eps, xs), prod.eval_many(eps, xs))
        assert embed_smooth(f, DOM).eval(eps, math.pi / 2) == 1.0
    with pytest.raises(ValueError):
        embed_smooth(E.mul(E.EPS, f), DOM)


def test_iota_of_polynomial_is_itself_for_high_moment_kernel(moll):
    u = embed_distribution("pp[(-inf,inf): 1 - 2*x + x^3]", moll, DOM)
    xs = np.linspace(-2, 2, 11)
    for eps in (0.5, 0.01):
        assert np.allclose(u.eval_many(eps, xs[:, None]), 1 - 2 * xs + xs ** 3, atol=1e-13)


def test_singular_points_and_margin(moll):
    assert sorted(singular_points(parse_distribution("delta@0.5 + H@-1 + abs"))) == [-1.0, 0.0, 0.5]
    with pytest.raises(UnsupportedDistributionError):
        embed_distribution("delta@3.8", moll, DOM, eps_max=0.5)
    with pytest.raises(UnsupportedDistributionError):
        parse_distribution("delta * H")


@pytest.mark.parametrize("bad", ["", "delta@", "pp[(1,0): x]", "foo", "H^", "(H"])
def test_distribution_parse_errors(bad):
    with pytest.raises((ParseError, UnsupportedDistributionError)):
        parse_distribution(bad)
