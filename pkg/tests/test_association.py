import mpmath as mp
import numpy as np
import pytest

from colombeau import expr as E
from colombeau.association import (TestFunction, associated_limit, battery, ck_associated,
                                   is_associated, limit_from_values, pair, pairing_sequence,
                                   product_obstruction)
from colombeau.asymptotics import Tri
from colombeau.embedding import embed_distribution, embed_smooth
from colombeau.errors import DomainError
from colombeau.nets import ChartDomain, EpsilonGrid, Representative

from test_mollifier import mp_kernel

X = E.var(0)
DOM = ChartDomain.interval(-4.0, 4.0)
PHI = TestFunction(0.1, 0.6)


def mp_phi(phi):
    def f(x):
        s = (x - phi.center) / phi.width
        return phi.amp * mp.exp(-1 / (1 - s * s)) if abs(s) < 1 else mp.mpf(0)
    return f


def test_battery_covers_box_with_twelve_bumps():
    tests = battery((-1.0, 1.0))
    assert len(tests) == 12
    assert len({(t.center, t.width) for t in tests}) == 12
    assert all(-1.1 <= t.support[0] and t.support[1] <= 1.1 for t in tests)


def test_pairing_smooth_net_is_eps_independent():
    u = embed_smooth(E.sin(X), DOM)
    f = mp_phi(PHI)
    want = float(mp.quad(lambda x: mp.sin(x) * f(x), [PHI.center - PHI.width, PHI.center + PHI.width]))
    vals = pairing_sequence(u, PHI, EpsilonGrid(0.5, 0.7, 8))
    assert np.allclose(vals, want, rtol=0, atol=1e-12)


def test_pairing_of_x_delta_by_substitution(moll):
    u = Representative.scalar(E.mul(X, E.Kernel(moll, 0, X, E.EPS)), DOM)
    rho, f = mp_kernel(moll), mp_phi(PHI)
    for eps in (0.4, 0.05, 0.002):
        want = eps * mp.quad(lambda y: y * rho(y) * f(eps * y), [-1, 0, 1])
        assert pair(u, PHI, eps) == pytest.approx(float(want), abs=1e-13, rel=1e-9)


def test_limits(moll, grid):
    delta = embed_distribution("delta", moll, DOM)
    H = embed_distribution("H", moll, DOM)
    phi0 = float(PHI.value(np.array([0.0]))[0])
    lim = associated_limit(delta, PHI, grid)
    assert lim.converged and lim.limit == pytest.approx(phi0, abs=1e-9)
    lim = associated_limit(Representative.scalar(X, DOM) * delta, PHI, grid)
    assert lim.converged and abs(lim.limit) <= 1e-6
    for m in (2, 3):
        lim = associated_limit(H ** m - H, PHI, grid)
        assert lim.converged and abs(lim.limit) <= 1e-6


def test_limit_acceleration_on_geometric_tail():
    g = EpsilonGrid()
    vals = 2.0 + 0.3 * g.values
    est = limit_from_values(vals)
    assert est.converged and est.accelerated and est.limit == pytest.approx(2.0, abs=1e-9)
    assert not limit_from_values(np.log(g.values)).converged


def test_is_associated_examples(moll, grid):
    H = embed_distribution("H", moll, DOM)
    delta = embed_distribution("delta", moll, DOM)
    zero = Representative.constant(0.0, DOM)
    assert is_associated(H, H, grid=grid).answer is Tri.YES
    assert is_associated(H * H, H, grid=grid).answer is Tri.YES
    v = is_associated(delta, zero, grid=grid)
    assert v.answer is Tri.NO
    assert any(abs(lim) > 1e-3 for lim, _ in v.limits.values())


def test_ck_association(moll, grid):
    K = ((-1.0, 1.0),)
    s = embed_smooth(E.sin(X), DOM)
    i = embed_distribution("smooth((sin x))", moll, DOM)
    H = embed_distribution("H", moll, DOM)
    half = Representative.constant(0.5, DOM)
    for k in (0, 1, 2):
        assert ck_associated(H, H, k, K, grid).answer is Tri.YES
    assert ck_associated(i, s, 2, K, grid).answer is Tri.YES
    assert ck_associated(H, half, 0, K, grid).answer is Tri.NO
    # C^0 fails for H squared against H: the sup of the defect stays 1/4-ish
    assert ck_associated(H * H, H, 0, K, grid).answer is Tri.NO


def test_pairing_support_must_be_inside_chart(moll):
    small = ChartDomain.interval(-0.5, 0.5)
    u = Representative.scalar(X, small)
    with pytest.raises(DomainError):
        pair(u, PHI, 0.1)


def test_product_bracketings(moll, grid):
    res = product_obstruction(moll, PHI, grid)
    phi0 = res["phi0"]
    assert res["converged"] and res["same_net"]
    assert res["distributional_left"] == 0.0
    assert res["distributional_right"] == pytest.approx(phi0, abs=1e-6)
    # oracle: int y rho(y) (vp * rho)(y) dy = 1/2 by symmetrizing the double integral
    rho = mp_kernel(moll)
    inner = mp.quad(lambda y: y * rho(y) * moll.pv(0, float(y)), [-1, -0.5, 0, 0.5, 1])
    assert float(inner) == pytest.approx(0.5, abs=1e-9)
    assert res["generalized_left"] == pytest.approx(0.5 * phi0, abs=1e-6)
    assert res["generalized_right"] == res["generalized_left"]
