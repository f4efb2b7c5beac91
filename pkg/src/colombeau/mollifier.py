"""Compactly supported smoothing kernels with vanishing moments.

A kernel is ``rho(y) = A(y/R) * phi(y/R)`` with ``phi(s) = exp(-1/(1-s^2))`` on
``|s| < 1`` and ``A`` an even polynomial whose coefficients are fixed by the
moment conditions

    int rho = 1,   int y^k rho(y) dy = 0   for 1 <= k <= q.

Derivatives are exact: ``phi^(d)(s) = Q_d(s) (1-s^2)^(-2d) phi(s)`` with the
recursion ``Q_{d+1} = Q_d' (1-s^2)^2 + (4 d s (1-s^2) - 2 s) Q_d``.  All
integrals over the kernel use one composite Gauss-Legendre rule (32 panels of
20 nodes), which is accurate to round-off for bump moments.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np
from numpy.polynomial import Polynomial

from .errors import ConstructionError

GL_ORDER = 20
N_PANELS = 32
GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)
PANEL_EDGES = np.linspace(-1.0, 1.0, N_PANELS + 1)
MAX_MOMENT_ORDER = 8


def _composite_rule():
    half = 0.5 * np.diff(PANEL_EDGES)
    mid = 0.5 * (PANEL_EDGES[:-1] + PANEL_EDGES[1:])
    nodes = mid[:, None] + half[:, None] * GL_NODES
    weights = half[:, None] * GL_WEIGHTS
    return nodes, weights


PANEL_NODES, PANEL_WEIGHTS = _composite_rule()


def bump(s):
    """Unit bump ``exp(-1/(1-s^2))`` on (-1, 1), zero outside."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(-1.0 / (1.0 - si * si))
    return out


@lru_cache(maxsize=None)
def _bump_derivative_polys(dmax):
    one_minus = Polynomial([1.0, 0.0, -1.0])
    s = Polynomial([0.0, 1.0])
    polys = [Polynomial([1.0])]
    for d in range(dmax):
        q = polys[-1]
        polys.append(q.deriv() * one_minus**2 + (4 * d * s * one_minus - 2 * s) * q)
    return tuple(polys)


class Mollifier:
    """Kernel profile ``rho`` with support ``[-R, R]``.

    Instances are immutable and shared; build them with :func:`make_mollifier`
    (normalized, ``q`` vanishing moments) or :func:`bare_bump` (the plain bump,
    used for test functions).
    """

    def __init__(self, q, radius, coeffs, label):
        self.q = q
        self.radius = float(radius)
        self.coeffs = tuple(float(c) for c in coeffs)
        self.label = label
        self._profile_cache = {}
        self._cumulative_cache = {}

    def __repr__(self):
        return f"Mollifier({self.label})"

    def __reduce__(self):
        if self.q is None:
            return (bare_bump, ())
        return (make_mollifier, (self.q, self.radius))

    @property
    def normalized(self):
        return self.q is not None

    @property
    def is_even(self):
        return all(c == 0.0 for c in self.coeffs[1::2])

    @property
    def nonnegative(self):
        """True when ``A`` is a positive constant, so ``rho >= 0``."""
        return len(self.coeffs) == 1 and self.coeffs[0] > 0

    def profile_poly(self, d):
        """Coefficients (ascending, in ``s = y/R``) of ``T_d`` with
        ``rho^(d)(y) = T_d(s) (1-s^2)^(-2d) phi(s)``."""
        cached = self._profile_cache.get(d)
        if cached is not None:
            return cached
        a = Polynomial(self.coeffs)
        qs = _bump_derivative_polys(d)
        one_minus = Polynomial([1.0, 0.0, -1.0])
        total = Polynomial([0.0])
        for k in range(d + 1):
            total = total + comb(d, k) * a.deriv(d - k) * qs[k] * one_minus ** (2 * (d - k))
        coef = np.array(total.coef, dtype=float) * self.radius ** (-d)
        coef.setflags(write=False)
        self._profile_cache[d] = coef
        return coef

    def value(self, y, d=0):
        """``rho^(d)(y)``, vectorized."""
        y = np.asarray(y, dtype=float)
        s = y / self.radius
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        si = s[inside]
        gap = 1.0 - si * si
        poly = np.polynomial.polynomial.polyval(si, self.profile_poly(d))
        out[inside] = poly * np.exp(-1.0 / gap - 2 * d * np.log(gap))
        return out

    def moment_poly(self, k):
        """Coefficients of ``s^k A(s)``."""
        return np.concatenate([np.zeros(k), np.asarray(self.coeffs)])

    def moment(self, k):
        """Full moment ``int y^k rho(y) dy``; exact zeros where the construction imposes them."""
        if self.normalized:
            if k == 0:
                return 1.0
            if k <= self.q or (k % 2 == 1 and self.is_even):
                return 0.0
        vals = np.polynomial.polynomial.polyval(PANEL_NODES, self.moment_poly(k)) * bump(PANEL_NODES)
        return float(self.radius ** (k + 1) * np.sum(PANEL_WEIGHTS * vals))

    def cumulative_table(self, k):
        """``R^{k+1} int_{-1}^{e_j} s^k A(s) phi(s) ds`` at the panel edges ``e_j``."""
        cached = self._cumulative_cache.get(k)
        if cached is not None:
            return cached
        vals = np.polynomial.polynomial.polyval(PANEL_NODES, self.moment_poly(k)) * bump(PANEL_NODES)
        per_panel = np.sum(PANEL_WEIGHTS * vals, axis=1) * self.radius ** (k + 1)
        cum = np.concatenate([[0.0], np.cumsum(per_panel)])
        cum.setflags(write=False)
        self._cumulative_cache[k] = cum
        return cum

    def partial_moment(self, k, y):
        """``m_k(y) = int_{-inf}^{y} z^k rho(z) dz``, vectorized."""
        y = np.asarray(y, dtype=float)
        s = y / self.radius
        out = np.zeros_like(s)
        out[s >= 1.0] = self.moment(k)
        inside = np.abs(s) < 1.0
        if np.any(inside):
            si = s[inside]
            cum = self.cumulative_table(k)
            h = 2.0 / N_PANELS
            j = np.minimum(np.floor((si + 1.0) / h).astype(int), N_PANELS - 1)
            left = PANEL_EDGES[j]
            half = 0.5 * (si - left)
            nodes = left[:, None] + half[:, None] * (GL_NODES + 1.0)
            vals = np.polynomial.polynomial.polyval(nodes, self.moment_poly(k)) * bump(nodes)
            part = half * np.sum(GL_WEIGHTS * vals, axis=1) * self.radius ** (k + 1)
            out[inside] = cum[j] + part
        return out

    def pv(self, d, t):
        """``Pi_d(t) = PV int rho^(d)(z) / (t - z) dz``."""
        return float(self.pv_values(d, np.array([float(t)]))[0])

    def pv_values(self, d, t, chunk=4096):
        """Vectorized principal value by singularity subtraction.

        Inside the support, ``rho^(d)(t)`` is subtracted so the remaining
        integrand is smooth and the composite rule applies; the subtracted
        part integrates to ``rho^(d)(t) log((R + t)/(R - t))``.
        """
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = np.empty_like(flat)
        R = self.radius
        z = (R * PANEL_NODES).ravel()
        w = (R * PANEL_WEIGHTS).ravel()
        rz = self.value(z, d)
        for i in range(0, len(flat), chunk):
            tc = flat[i:i + chunk]
            inside = np.abs(tc) < R
            rt = np.where(inside, self.value(tc, d), 0.0)
            slope = np.where(inside, self.value(tc, d + 1), 0.0)
            diff = tc[:, None] - z[None, :]
            near = np.abs(diff) < 1e-9 * R
            safe = np.where(near, 1.0, diff)
            integrand = np.where(near, -slope[:, None], (rz[None, :] - rt[:, None]) / safe)
            val = integrand @ w
            with np.errstate(divide="ignore", invalid="ignore"):
                logs = np.where(inside, np.log(np.abs((R + tc) / np.where(inside, R - tc, 1.0))), 0.0)
            out[i:i + chunk] = val + rt * logs
        return out.reshape(t.shape)

    def sup_abs(self, d=0):
        """``sup |rho^(d)|`` by dense sampling plus bounded refinement."""
        R = self.radius
        ys = np.linspace(-R, R, 20001)
        vals = np.abs(self.value(ys, d))
        i = int(np.argmax(vals))
        lo, hi = ys[max(i - 1, 0)], ys[min(i + 1, len(ys) - 1)]
        from scipy.optimize import minimize_scalar

        res = minimize_scalar(lambda y: -abs(float(self.value(np.array([y]), d)[0])),
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
        return max(float(vals[i]), -float(res.fun))


@lru_cache(maxsize=None)
def make_mollifier(q=4, radius=1.0):
    """Normalized kernel on ``[-radius, radius]`` with moments 1..q vanishing.

    The correction polynomial is even, so odd moments vanish by symmetry and
    ``q`` and ``q+1`` give the same kernel when ``q`` is even.
    """
    q = int(q)
    if q < 0 or q > MAX_MOMENT_ORDER:
        raise ConstructionError(f"moment order q={q} outside curated range 0..{MAX_MOMENT_ORDER}")
    if not radius > 0:
        raise ConstructionError(f"support radius must be positive, got {radius}")
    radius = float(radius)
    n_even = q // 2 + 1
    # bump moments in s-units; odd ones vanish
    mom = [float(np.sum(PANEL_WEIGHTS * PANEL_NODES ** (2 * k) * bump(PANEL_NODES)))
           for k in range(2 * n_even)]
    gram = np.array([[mom[i + j] for j in range(n_even)] for i in range(n_even)])
    rhs = np.zeros(n_even)
    rhs[0] = 1.0 / radius
    try:
        a = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise ConstructionError(f"moment system singular for q={q}") from exc
    coeffs = np.zeros(2 * n_even - 1)
    coeffs[0::2] = a
    return Mollifier(q, radius, coeffs, f"q={q},R={radius!r}")


@lru_cache(maxsize=None)
def bare_bump():
    """The unnormalized bump ``exp(-1/(1-y^2))`` as a profile (test functions)."""
    return Mollifier(None, 1.0, (1.0,), "bump")
