import mpmath as mp
import numpy as np
import pytest
from scipy import integrate

from colombeau.errors import ConstructionError
from colombeau.mollifier import bare_bump, make_mollifier

mp.mp.dps = 30


def mp_kernel(m):
    """The kernel rebuilt in multiprecision from its correction coefficients."""
    cs = [mp.mpf(c) for c in m.coeffs]
    R = mp.mpf(m.radius)

    def rho(y):
        s = mp.mpf(y) / R
        if abs(s) >= 1:
            return mp.mpf(0)
        return sum(c * s ** k for k, c in enumerate(cs)) * mp.exp(-1 / (1 - s * s))

    return rho


def mp_moment(rho, k, R):
    return mp.quad(lambda y: y ** k * rho(y), [-R, 0, R])


@pytest.mark.parametrize("q", range(0, 9))
def test_unit_integral_and_vanishing_moments(q):
    m = make_mollifier(q, 1.0)
    rho = mp_kernel(m)
    assert abs(mp_moment(rho, 0, 1) - 1) <= 1e-10
    for k in range(1, q + 1):
        assert abs(mp_moment(rho, k, 1)) <= 1e-10
    assert m.is_even


def test_construction_agrees_with_independent_moment_solve():
    # solve the even-coefficient moment system in multiprecision
    q = 4
    bump_mom = [mp.quad(lambda s: s ** (2 * k) * mp.exp(-1 / (1 - s * s)), [-1, 0, 1]) for k in range(6)]
    gram = mp.matrix([[bump_mom[i + j] for j in range(3)] for i in range(3)])
    a = mp.lu_solve(gram, mp.matrix([1, 0, 0]))
    m = make_mollifier(q, 1.0)
    assert np.allclose(m.coeffs[0::2], [float(v) for v in a], rtol=1e-11, atol=0)


def test_radius_scaling_and_support():
    m = make_mollifier(4, 0.5)
    rho = mp_kernel(m)
    assert abs(mp_moment(rho, 0, 0.5) - 1) <= 1e-10
    assert abs(mp_moment(rho, 2, 0.5)) <= 1e-10
    assert np.all(m.value(np.array([-0.5, 0.5, 0.7, -3.0])) == 0.0)


def test_scaled_kernel_integrates_to_one_at_small_eps():
    m = make_mollifier()
    eps = 1e-3
    val, _ = integrate.quad(lambda x: m.value(np.array([x / eps]))[0] / eps, -eps, eps,
                            points=[0.0], epsabs=1e-13, limit=200)
    assert abs(val - 1.0) <= 1e-8


def test_q_zero_is_normalized_bump():
    m = make_mollifier(0)
    assert m.nonnegative
    b = bare_bump()
    ys = np.linspace(-0.9, 0.9, 7)
    ratio = m.value(ys) / b.value(ys)
    assert np.allclose(ratio, ratio[0], rtol=1e-14)
    assert abs(mp_moment(mp_kernel(m), 0, 1) - 1) <= 1e-12


@pytest.mark.parametrize("d", [0, 1, 2, 3])
def test_profile_derivatives_against_mpmath(d):
    m = make_mollifier()
    rho = mp_kernel(m)
    for y in (-0.83, -0.4, 0.0, 0.21, 0.77):
        want = mp.diff(rho, y, d)
        got = m.value(np.array([y]), d)[0]
        assert abs(got - float(want)) <= 1e-9 * max(1.0, abs(float(want)))


@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_partial_moments_against_mpmath(k):
    m = make_mollifier()
    rho = mp_kernel(m)
    ys = np.array([-1.5, -0.99, -0.5, -0.013, 0.0, 0.3, 0.91, 1.0, 2.0])
    got = m.partial_moment(k, ys)
    for y, g in zip(ys, got):
        upper = min(max(y, -1.0), 1.0)
        want = mp.quad(lambda z: z ** k * rho(z), [-1, upper]) if upper > -1 else 0
        assert abs(g - float(want)) <= 1e-12


def mp_pv(rho, d, t, R=1.0):
    f = (lambda z: mp.diff(rho, z, d)) if d else rho
    L = abs(t) + R
    # pair t - u with t + u: the integrand is smooth at u = 0
    return mp.quad(lambda u: (f(t - u) - f(t + u)) / u, [0, abs(abs(t) - R), L])


@pytest.mark.parametrize("d", [0, 1])
def test_principal_value_against_mpmath(d):
    m = make_mollifier()
    rho = mp_kernel(m)
    ts = np.array([-1.7, -0.6, -1e-3, 0.0, 0.25, 0.999, 1.0, 2.0])
    got = m.pv_values(d, ts)
    for t, g in zip(ts, got):
        want = float(mp_pv(rho, d, mp.mpf(t)))
        assert abs(g - want) <= 1e-9 * max(1.0, abs(want)), (t, g, want)


def test_principal_value_is_odd_for_even_kernel():
    m = make_mollifier()
    ts = np.linspace(0.05, 1.8, 23)
    assert np.allclose(m.pv_values(0, ts), -m.pv_values(0, -ts), atol=1e-14)


def test_sup_abs_matches_dense_sampling():
    m = make_mollifier()
    ys = np.linspace(-1, 1, 400001)
    for d in (0, 1, 2):
        dense = np.max(np.abs(m.value(ys, d)))
        assert m.sup_abs(d) >= dense - 1e-12
        assert m.sup_abs(d) <= dense * (1 + 1e-6)


def test_curated_range():
    with pytest.raises(ConstructionError):
        make_mollifier(9)
    with pytest.raises(ConstructionError):
        make_mollifier(2, 0.0)
