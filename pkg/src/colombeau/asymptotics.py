"""Sup-norm estimation along an epsilon grid, power-law fits and classification.

Verdicts are three-valued (:class:`Tri`): asymptotic statements cannot be
decided from finitely many grid values, so a classifier answers ``YES``,
``NO`` or ``INCONCLUSIVE``, and a :class:`Tri` refuses to act as a boolean.
"""

from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import expr as E
from . import tape
from .errors import DomainError, ParameterError
from .nets import EpsilonGrid, check_eps

ZERO_FLOOR = 1e-300


@dataclass(frozen=True)
class Tolerances:
    slope: float = 0.25
    residual: float = 0.15
    assoc: float = 1e-6
    ode_rtol: float = 1e-10


DEFAULT_TOL = Tolerances()


class Tri(enum.Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"

    def __bool__(self):
        raise TypeError("three-valued verdict used as a boolean; compare with Tri.YES/NO explicitly")

    @property
    def exit_code(self):
        return {"yes": 0, "no": 1, "inconclusive": 2}[self.value]


@dataclass
class OrderEstimate:
    """Least-squares fit ``log sup = slope * log eps + intercept`` over the grid tail."""

    slope: float
    intercept: float
    residual: float
    n_used: int
    zero_clamped: bool = False
    all_zero: bool = False
    verdict: str = "inconclusive"

    @property
    def usable(self):
        return self.n_used >= 4 and (self.all_zero or (math.isfinite(self.slope) and math.isfinite(self.residual)))

    def good(self, tol=DEFAULT_TOL):
        return self.usable and (self.all_zero or self.residual <= tol.residual)

    def to_dict(self):
        return asdict(self)


@dataclass
class Verdict:
    answer: Tri
    kind: str
    order: int | None = None
    estimates: dict = field(default_factory=dict)
    eps: list = field(default_factory=list)
    values: dict = field(default_factory=dict)
    message: str = ""
    limits: dict = field(default_factory=dict)

    @property
    def label(self):
        if self.answer is Tri.YES and self.order is not None:
            return f"{self.kind}({self.order})"
        if self.answer is Tri.NO:
            return f"not {self.kind}"
        if self.answer is Tri.YES:
            return self.kind
        return "inconclusive"

    def to_dict(self):
        return {
            "answer": self.answer.value,
            "kind": self.kind,
            "label": self.label,
            "order": self.order,
            "message": self.message,
            "estimates": {k: v.to_dict() for k, v in self.estimates.items()},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(repr(o))


# ---------------------------------------------------------------------------
# sup sampling
# ---------------------------------------------------------------------------

def _points_per_axis(ndim):
    if ndim == 1:
        return 513
    if ndim == 2:
        return 97
    return max(8, min(64, int(round((2 ** 18) ** (1.0 / ndim)))))


def _mesh(axes):
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def eps_value(e, eps, ndim=1):
    """Value of an eps-only expression."""
    return float(tape.evaluate((e,), eps, np.zeros((1, max(ndim, 1))), max(ndim, 1))[0, 0])


def _check_box(rep, K):
    K = tuple((float(a), float(b)) for a, b in K)
    if len(K) != rep.domain.ndim:
        raise DomainError(f"box has dimension {len(K)}, chart has {rep.domain.ndim}")
    for a, b in K:
        if not a <= b:
            raise DomainError(f"empty box side [{a}, {b}]")
    if not rep.domain.contains_box(K):
        raise DomainError(f"box {K} is not strictly inside the chart domain")
    return K


def _abs_max(rep, eps, X):
    vals = rep.eval_many(eps, X, check=False)
    vals = np.abs(vals.reshape(len(X), -1))
    with np.errstate(invalid="ignore"):
        return np.nanmax(vals, axis=1) if vals.size else np.zeros(len(X))


def _window_points(rep, eps, K, coarse_axes):
    ndim = rep.domain.ndim
    sets = []
    seen = set()
    for comp in rep.components:
        for axis, center, half in E.kernel_windows(comp, ndim):
            c = eps_value(center, eps, ndim)
            h = abs(eps_value(half, eps, ndim))
            lo, hi = max(c - h, K[axis][0]), min(c + h, K[axis][1])
            if not lo <= hi:
                continue
            key = (axis, round(lo, 15), round(hi, 15))
            if key in seen:
                continue
            seen.add(key)
            axes = list(coarse_axes)
            axes[axis] = np.linspace(lo, hi, 129)
            sets.append((_mesh(axes), max((hi - lo) / 128, 1e-300)))
    return sets


def sup_at(rep, K, eps, refine_rounds=2):
    """Sampled ``sup_K |rep(eps, .)|`` (a lower bound of the true sup)."""
    ndim = rep.domain.ndim
    n = _points_per_axis(ndim)
    axes = [np.linspace(a, b, n) for a, b in K]
    spacing = np.array([(b - a) / (n - 1) if b > a else 0.0 for a, b in K])
    coarse = [np.linspace(a, b, 17 if ndim > 1 else n) for a, b in K]
    candidates = [(_mesh(axes), spacing)]
    for pts, h in _window_points(rep, eps, K, coarse):
        s = spacing.copy()
        candidates.append((pts, np.minimum(s, h)))
    best, best_x, best_h = -np.inf, None, None
    for pts, h in candidates:
        vals = _abs_max(rep, eps, pts)
        if not np.all(np.isfinite(vals)):
            return math.inf
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_x, best_h = float(vals[i]), pts[i], h
    lo = np.array([a for a, _ in K])
    hi = np.array([b for _, b in K])
    for _ in range(refine_rounds):
        local = [np.clip(np.linspace(best_x[d] - best_h[d], best_x[d] + best_h[d], 9), lo[d], hi[d])
                 for d in range(ndim)]
        pts = _mesh(local)
        vals = _abs_max(rep, eps, pts)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_x = float(vals[i]), pts[i]
        best_h = best_h / 4.0
    return best


def sup_on_compact(rep, K, alpha=None, grid=None, refine_rounds=2):
    """``sup_K |d^alpha u_eps|`` for every grid eps (array, grid order)."""
    grid = grid or EpsilonGrid()
    K = _check_box(rep, K)
    if alpha is not None and any(alpha):
        rep = rep.derive(alpha)
    ceiling = rep.eps_ceiling
    if grid.eps_max > ceiling:
        raise ParameterError(f"grid eps_max={grid.eps_max} exceeds certificate ceiling {ceiling}")
    return np.array([sup_at(rep, K, eps, refine_rounds) for eps in grid])


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

def fit_order(values, grid=None, tol=DEFAULT_TOL):
    """Power-law fit over the smallest half of the grid.

    Zeros are clamped to ``1e-300`` and flagged; if the whole tail is zero the
    estimate is marked ``all_zero`` (slope ``+inf``).
    """
    grid = grid or EpsilonGrid()
    eps = grid.values
    values = np.abs(np.asarray(values, dtype=float))
    if len(values) != len(eps):
        raise ValueError("values and grid differ in length")
    tail = slice(len(eps) - len(eps) // 2, None)
    v, e = values[tail], eps[tail]
    finite = np.isfinite(v)
    n_used = int(np.sum(finite))
    if n_used < 4:
        return OrderEstimate(math.nan, math.nan, math.nan, n_used)
    v, e = v[finite], e[finite]
    zero = v <= ZERO_FLOOR
    if np.all(zero):
        return OrderEstimate(math.inf, -math.inf, 0.0, n_used, True, True, "negligible(any)")
    lv = np.log(np.maximum(v, ZERO_FLOOR))
    le = np.log(e)
    A = np.vstack([le, np.ones_like(le)]).T
    coef, *_ = np.linalg.lstsq(A, lv, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    resid = lv - A @ coef
    rms = float(np.sqrt(np.mean(resid ** 2)))
    est = OrderEstimate(slope, intercept, rms, n_used, bool(np.any(zero)), False)
    if est.good(tol):
        est.verdict = f"moderate({max(0, math.ceil(-slope - tol.slope))})"
    return est


def _local_slopes(values, eps):
    v = np.log(np.maximum(np.abs(values), ZERO_FLOOR))
    return np.diff(v) / np.diff(np.log(eps))


def _diverging(values, grid, sign):
    """Local slopes monotone in the direction ``sign`` over the tail (super-polynomial behaviour)."""
    eps = grid.values
    tail = slice(len(eps) - len(eps) // 2, None)
    s = _local_slopes(np.asarray(values)[tail], eps[tail])
    if len(s) < 3 or not np.all(np.isfinite(s)):
        return False
    steps = np.diff(s) * sign
    return bool(np.all(steps > 0) and abs(s[-1] - s[0]) > 1.0)


def _steps_decay(values, grid, order):
    """Every step of the grid tail shrinks at least like ``eps^order``; zeros stay zero.

    Used when a super-polynomial decay (or underflow to exact zeros) spoils
    the power-law fit while still proving the order directly.
    """
    eps = grid.values
    tail = slice(len(eps) - len(eps) // 2, None)
    v, e = np.abs(np.asarray(values, dtype=float)[tail]), eps[tail]
    if len(v) < 4 or not np.all(np.isfinite(v)) or v[0] == 0.0:
        return False
    for j in range(len(v) - 1):
        if v[j + 1] == 0.0:
            continue
        if v[j] == 0.0:
            return False
        if math.log(v[j + 1] / v[j]) / math.log(e[j + 1] / e[j]) < order:
            return False
    return True


def multi_indices(ndim, order):
    for total in range(order + 1):
        for alpha in itertools.product(range(total + 1), repeat=ndim):
            if sum(alpha) == total:
                yield alpha


def _alpha_key(alpha):
    return "alpha=" + ",".join(str(a) for a in alpha)


def classify_moderate(rep, K, alpha_max=0, grid=None, tol=DEFAULT_TOL):
    """Moderate iff every ``|alpha| <= alpha_max`` sup fits a power law; ``order`` is ``N_est``."""
    grid = grid or EpsilonGrid()
    estimates, values = {}, {}
    worst = math.inf
    answer = Tri.YES
    for alpha in multi_indices(rep.domain.ndim, alpha_max):
        sups = sup_on_compact(rep, K, alpha, grid)
        est = fit_order(sups, grid, tol)
        key = _alpha_key(alpha)
        estimates[key], values[key] = est, sups.tolist()
        if not np.all(np.isfinite(sups)) or _diverging(sups, grid, -1):
            answer = Tri.NO
            continue
        if not est.good(tol):
            if answer is Tri.YES:
                answer = Tri.INCONCLUSIVE
            continue
        if not est.all_zero:
            worst = min(worst, est.slope)
    order = None
    if answer is Tri.YES:
        order = 0 if worst == math.inf else max(0, math.ceil(-worst - tol.slope))
        for est in estimates.values():
            est.verdict = f"moderate({order})"
    return Verdict(answer, "moderate", order, estimates, grid.values.tolist(), values)


def classify_negligible(rep, K, m_max=4, grid=None, assume_moderate=True, alpha_max=2, tol=DEFAULT_TOL):
    """Negligible up to order ``m_max``.

    With ``assume_moderate`` only ``alpha = 0`` is tested (for moderate nets
    the zeroth-order estimate controls all derivatives); otherwise every
    ``|alpha| <= alpha_max`` must pass.
    """
    if m_max > 8:
        raise ValueError("m_max is limited to 8")
    grid = grid or EpsilonGrid()
    estimates, values = {}, {}
    answers = []
    order = 0 if assume_moderate else alpha_max
    for alpha in multi_indices(rep.domain.ndim, order):
        sups = sup_on_compact(rep, K, alpha, grid)
        est = fit_order(sups, grid, tol)
        key = _alpha_key(alpha)
        estimates[key], values[key] = est, sups.tolist()
        if est.all_zero:
            answers.append(Tri.YES)
            est.verdict = f"negligible({m_max})"
        elif not est.good(tol):
            if _steps_decay(sups, grid, m_max - tol.slope):
                answers.append(Tri.YES)
                est.verdict = f"negligible({m_max})"
            else:
                answers.append(Tri.NO if _diverging(sups, grid, -1) else Tri.INCONCLUSIVE)
        elif est.slope >= m_max - tol.slope:
            answers.append(Tri.YES)
            est.verdict = f"negligible({m_max})"
        else:
            answers.append(Tri.NO)
    if Tri.NO in answers:
        answer = Tri.NO
    elif Tri.INCONCLUSIVE in answers:
        answer = Tri.INCONCLUSIVE
    else:
        answer = Tri.YES
    return Verdict(answer, "negligible", m_max if answer is Tri.YES else None, estimates,
                   grid.values.tolist(), values)


# ---------------------------------------------------------------------------
# generalized numbers and points
# ---------------------------------------------------------------------------

class GeneralizedNumber:
    """A net of scalars given by an eps-only expression."""

    def __init__(self, net):
        net = E.as_expr(net)
        if net.free_vars:
            raise ValueError(f"generalized number depends on coordinates: {net.key}")
        self.net = net

    def __repr__(self):
        return f"GeneralizedNumber({self.net.key})"

    def __eq__(self, other):
        return isinstance(other, GeneralizedNumber) and self.net == other.net

    def __hash__(self):
        return hash(self.net)

    def value(self, eps):
        check_eps(eps, self.net.eps_ceiling)
        return eps_value(self.net, eps)

    def values(self, grid=None):
        grid = grid or EpsilonGrid()
        t = tape.compile_exprs((self.net,), 1)
        zero = np.zeros((1, 1))
        return np.array([tape.run(t, e, zero)[0, 0] for e in grid])

    def __mul__(self, other):
        return GeneralizedNumber(E.mul(self.net, other.net if isinstance(other, GeneralizedNumber) else other))

    def __add__(self, other):
        return GeneralizedNumber(E.add(self.net, other.net if isinstance(other, GeneralizedNumber) else other))

    def __sub__(self, other):
        return GeneralizedNumber(E.sub(self.net, other.net if isinstance(other, GeneralizedNumber) else other))


class GeneralizedPoint:
    """A net of points with support box ``K`` (``net(eps) in K`` on the grid)."""

    def __init__(self, net, K, grid=None):
        net = tuple(E.as_expr(c) for c in net)
        if any(c.free_vars for c in net):
            raise ValueError("generalized point components must depend on eps only")
        K = tuple((float(a), float(b)) for a, b in K)
        if len(K) != len(net):
            raise ValueError("support box dimension differs from point dimension")
        self.net = net
        self.K = K
        grid = grid or EpsilonGrid()
        for eps in grid:
            p = [eps_value(c, eps) for c in net]
            for (a, b), pi in zip(K, p):
                if not a <= pi <= b:
                    raise DomainError(f"generalized point leaves its support box at eps={eps}: {p}")

    @classmethod
    def classical(cls, p, grid=None):
        p = np.atleast_1d(np.asarray(p, dtype=float))
        return cls(tuple(E.Const(float(v)) for v in p), tuple((v, v) for v in p), grid)

    def __repr__(self):
        return f"GeneralizedPoint({[c.key for c in self.net]}, K={self.K})"


def point_eval(rep, p):
    """``rep(p)``: substitute the point's components for the coordinates."""
    if len(p.net) != rep.domain.ndim:
        raise DomainError("point dimension differs from chart dimension")
    if not rep.domain.contains_box(p.K):
        raise DomainError(f"support box {p.K} is not inside the chart domain")
    if rep.shape:
        raise ValueError("point evaluation is defined for scalar representatives")
    return GeneralizedNumber(rep.expr.subs(dict(enumerate(p.net))))


def classify_number_negligible(r, m_max=4, grid=None, tol=DEFAULT_TOL):
    grid = grid or EpsilonGrid()
    vals = np.abs(r.values(grid))
    est = fit_order(vals, grid, tol)
    if est.all_zero:
        ans = Tri.YES
    elif not est.good(tol):
        ans = Tri.YES if _steps_decay(vals, grid, m_max - tol.slope) else Tri.INCONCLUSIVE
    else:
        ans = Tri.YES if est.slope >= m_max - tol.slope else Tri.NO
    if ans is Tri.YES:
        est.verdict = f"negligible({m_max})"
    return Verdict(ans, "negligible", m_max if ans is Tri.YES else None, {"value": est},
                   grid.values.tolist(), {"value": vals.tolist()})


def invertibility_from_values(vals, grid, tol=DEFAULT_TOL):
    vals = np.abs(np.asarray(vals, dtype=float))
    est = fit_order(vals, grid, tol)
    if not np.all(np.isfinite(vals)):
        return Verdict(Tri.INCONCLUSIVE, "invertible", None, {"value": est}, grid.values.tolist(),
                       {"value": vals.tolist()}, "non-finite values on grid")
    if np.min(vals) <= 0.0:
        return Verdict(Tri.NO, "invertible", None, {"value": est}, grid.values.tolist(),
                       {"value": vals.tolist()}, "zero on the grid")
    if _diverging(vals, grid, +1):
        return Verdict(Tri.NO, "invertible", None, {"value": est}, grid.values.tolist(),
                       {"value": vals.tolist()}, "decay faster than any power")
    if not est.good(tol):
        return Verdict(Tri.INCONCLUSIVE, "invertible", None, {"value": est}, grid.values.tolist(),
                       {"value": vals.tolist()}, "power-law fit failed")
    order = max(0, math.ceil(est.slope - tol.slope))
    return Verdict(Tri.YES, "invertible", order, {"value": est}, grid.values.tolist(), {"value": vals.tolist()})


def is_invertible_number(r, grid=None, tol=DEFAULT_TOL):
    """``|r_eps| >= c eps^N`` on the grid, ``order = N``."""
    grid = grid or EpsilonGrid()
    return invertibility_from_values(r.values(grid), grid, tol)
