"""Chart domains, epsilon grids and representatives of generalized functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as E
from . import tape
from .errors import CompositionError, DomainError, ParameterError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ChartDomain:
    """Open box ``prod (lower_i, upper_i)`` or the flat torus chart ``[0, 2 pi)^n``."""

    names: tuple
    lower: tuple
    upper: tuple
    periodic: bool = False

    def __post_init__(self):
        if not (len(self.names) == len(self.lower) == len(self.upper)):
            raise ValueError("names and bounds must have equal length")
        for a, b in zip(self.lower, self.upper):
            if not a < b:
                raise ValueError(f"empty interval ({a}, {b})")

    @classmethod
    def box(cls, bounds, names=None):
        bounds = [tuple(map(float, b)) for b in bounds]
        if names is None:
            names = ("x",) if len(bounds) == 1 else tuple(f"x{i}" for i in range(len(bounds)))
        return cls(tuple(names), tuple(b[0] for b in bounds), tuple(b[1] for b in bounds))

    @classmethod
    def interval(cls, a, b, name="x"):
        return cls.box([(a, b)], (name,))

    @classmethod
    def torus(cls, names=("alpha", "beta")):
        n = len(names)
        return cls(tuple(names), (0.0,) * n, (TWO_PI,) * n, periodic=True)

    @property
    def ndim(self):
        return len(self.names)

    def contains(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.periodic:
            return np.all(np.isfinite(X), axis=1)
        lo, hi = np.array(self.lower), np.array(self.upper)
        return np.all((X > lo) & (X < hi), axis=1)

    def contains_box(self, K):
        if self.periodic:
            return True
        return all(self.lower[i] < K[i][0] and K[i][1] < self.upper[i] for i in range(self.ndim))

    def wrap(self, X):
        """Torus coordinates mapped into ``[-pi, pi)`` (the form used for evaluation)."""
        X = np.asarray(X, dtype=float)
        if not self.periodic:
            return X
        return np.mod(X + math.pi, TWO_PI) - math.pi

    def report_angles(self, X):
        """Torus coordinates mapped into ``[0, 2 pi)``."""
        X = np.asarray(X, dtype=float)
        return np.mod(X, TWO_PI) if self.periodic else X

    def distance(self, X, Y):
        D = np.asarray(X, dtype=float) - np.asarray(Y, dtype=float)
        if self.periodic:
            D = np.mod(D + math.pi, TWO_PI) - math.pi
        return np.sqrt(np.sum(np.atleast_2d(D) ** 2, axis=-1))

    def default_compact(self, shrink=0.1):
        """Closed box inside the domain, each side pulled in by ``shrink`` of its width."""
        if self.periodic:
            return tuple((-math.pi, math.pi) for _ in range(self.ndim))
        return tuple((a + shrink * (b - a), b - shrink * (b - a)) for a, b in zip(self.lower, self.upper))


@dataclass(frozen=True)
class EpsilonGrid:
    """``eps_j = eps_max * ratio**j`` for ``j = 0 .. count-1``."""

    eps_max: float = 0.5
    ratio: float = 0.7
    count: int = 24

    def __post_init__(self):
        if not 0 < self.eps_max <= 1:
            raise ParameterError(f"eps_max must lie in (0, 1], got {self.eps_max}")
        if not 0 < self.ratio < 1:
            raise ParameterError(f"ratio must lie in (0, 1), got {self.ratio}")
        if self.count < 8:
            raise ParameterError(f"grid needs at least 8 points, got {self.count}")

    @property
    def values(self):
        return self.eps_max * self.ratio ** np.arange(self.count)

    @property
    def smallest(self):
        return float(self.values[-1])

    def __iter__(self):
        return iter(self.values.tolist())

    def __len__(self):
        return self.count

    @classmethod
    def parse(cls, text):
        """``"eps_max,ratio,count"``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ParameterError(f"grid must be 'eps_max,ratio,count', got {text!r}")
        try:
            return cls(float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise ParameterError(f"cannot read grid {text!r}: {exc}") from exc


def check_eps(eps, ceiling=1.0):
    eps = float(eps)
    if not 0.0 < eps <= 1.0:
        raise ParameterError(f"eps must lie in (0, 1], got {eps}")
    if eps > ceiling:
        raise ParameterError(f"eps={eps} exceeds the certificate ceiling {ceiling}")
    return eps


class Representative:
    """One net ``(u_eps)`` given by expressions over a chart domain.

    ``shape`` is ``()`` for scalars, ``(m,)`` for vectors and ``(n, n)`` for
    matrices; ``components`` lists the expressions in row-major order.
    """

    __slots__ = ("components", "shape", "domain", "_tape")

    def __init__(self, components, shape, domain):
        comps = tuple(E.as_expr(c) for c in components)
        size = int(np.prod(shape)) if shape else 1
        if len(comps) != size:
            raise ValueError(f"{len(comps)} components do not fill shape {shape}")
        for c in comps:
            bad = [i for i in c.free_vars if i >= domain.ndim]
            if bad:
                raise ValueError(f"expression uses coordinate x{bad[0]} outside a {domain.ndim}-d chart")
        self.components = comps
        self.shape = tuple(shape)
        self.domain = domain
        self._tape = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def scalar(cls, e, domain):
        return cls((e,), (), domain)

    @classmethod
    def vector(cls, exprs, domain):
        return cls(tuple(exprs), (len(exprs),), domain)

    @classmethod
    def matrix(cls, rows, domain):
        rows = [list(r) for r in rows]
        n = len(rows)
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged matrix")
        return cls(tuple(c for r in rows for c in r), (n, len(rows[0])), domain)

    @classmethod
    def constant(cls, value, domain):
        return cls.scalar(E.Const(float(value)), domain)

    # -- access ---------------------------------------------------------------
    @property
    def expr(self):
        if self.shape:
            raise ValueError("expr is only defined for scalar representatives")
        return self.components[0]

    def __getitem__(self, idx):
        if not self.shape:
            raise IndexError("scalar representative")
        flat = np.ravel_multi_index(idx if isinstance(idx, tuple) else (idx,), self.shape)
        return Representative.scalar(self.components[flat], self.domain)

    def component(self, *idx):
        if not idx:
            return self.components[0]
        return self.components[np.ravel_multi_index(idx, self.shape)]

    @property
    def eps_ceiling(self):
        return min(c.eps_ceiling for c in self.components)

    @property
    def eps_dependent(self):
        return any(c.has_eps for c in self.components)

    def render(self):
        names = list(self.domain.names)
        return [c.render(names) for c in self.components]

    def __repr__(self):
        body = ", ".join(self.render())
        return f"Representative(shape={self.shape}, [{body}])"

    # -- evaluation ---------------------------------------------------------
    def compiled(self):
        if self._tape is None:
            self._tape = tape.compile_exprs(self.components, self.domain.ndim)
        return self._tape

    def eval_many(self, eps, X, check=True):
        """Values at points ``X`` (shape ``(npts, n)``); result shape ``(npts,) + shape``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.domain.ndim:
            if self.domain.ndim == 1 and X.shape[0] == 1:
                X = X.T
            else:
                raise DomainError(f"points have dimension {X.shape[1]}, chart has {self.domain.ndim}")
        if check:
            eps = check_eps(eps, self.eps_ceiling)
            inside = self.domain.contains(X)
            if not np.all(inside):
                bad = X[np.argmin(inside)]
                raise DomainError(f"point {bad.tolist()} outside chart domain")
        X = np.ascontiguousarray(self.domain.wrap(X))
        vals = tape.run(self.compiled(), float(eps), X)
        return vals.T.reshape((X.shape[0],) + self.shape)

    def eval(self, eps, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = self.eval_many(eps, x[None, :])[0]
        return float(out) if not self.shape else out

    __call__ = eval

    # -- calculus -------------------------------------------------------------
    def derive(self, alpha):
        alpha = tuple(alpha) if not isinstance(alpha, int) else (alpha,)
        if len(alpha) > self.domain.ndim:
            raise ValueError(f"multi-index {alpha} longer than chart dimension")
        return Representative(tuple(E.derive(c, alpha) for c in self.components), self.shape, self.domain)

    def partial(self, i):
        alpha = [0] * self.domain.ndim
        alpha[i] = 1
        return self.derive(tuple(alpha))

    # -- algebra --------------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, Representative):
            if other.domain != self.domain:
                raise ValueError("representatives live on different chart domains")
            return other
        return Representative.scalar(E.as_expr(other), self.domain)

    def _zip(self, other, fn):
        other = self._lift(other)
        if self.shape == other.shape:
            comps = tuple(fn(a, b) for a, b in zip(self.components, other.components))
            return Representative(comps, self.shape, self.domain)
        if not other.shape:
            b = other.components[0]
            return Representative(tuple(fn(a, b) for a in self.components), self.shape, self.domain)
        if not self.shape:
            a = self.components[0]
            return Representative(tuple(fn(a, b) for b in other.components), other.shape, self.domain)
        raise ValueError(f"incompatible shapes {self.shape} and {other.shape}")

    def add(self, other):
        return self._zip(other, E.add)

    def sub(self, other):
        return self._zip(other, E.sub)

    def mul(self, other):
        return self._zip(other, E.mul)

    def div(self, other):
        return self._zip(other, E.div)

    def scale(self, c):
        return self._zip(c, E.mul)

    def power(self, n):
        return Representative(tuple(E.power(c, n) for c in self.components), self.shape, self.domain)

    def map(self, fn):
        return Representative(tuple(fn(c) for c in self.components), self.shape, self.domain)

    __add__ = add
    __sub__ = sub
    __mul__ = mul
    __truediv__ = div
    __pow__ = power

    def __radd__(self, other):
        return self._lift(other).add(self)

    def __rsub__(self, other):
        return self._lift(other).sub(self)

    def __rmul__(self, other):
        return self._lift(other).mul(self)

    def __rtruediv__(self, other):
        return self._lift(other).div(self)

    def __neg__(self):
        return self.map(E.neg)

    def same_as(self, other):
        """Structural equality of the component trees."""
        return (isinstance(other, Representative) and self.shape == other.shape
                and self.domain == other.domain and self.components == other.components)

    # -- composition --------------------------------------------------------
    def components_as_map(self):
        """Component expressions of a map-valued net (scalar counts as length 1)."""
        return self.components

    def compose(self, outer, K=None, grid=None):
        """``outer o self``: substitute this map's components into ``outer``.

        The range of ``self`` over ``K`` (default: a box inside the chart)
        along ``grid`` must land inside ``outer``'s domain.
        """
        comps = self.components_as_map()
        if len(comps) != outer.domain.ndim:
            raise CompositionError(f"map has {len(comps)} components, outer chart has dimension {outer.domain.ndim}")
        from .flows import c_bounded

        verdict = c_bounded(self, K if K is not None else self.domain.default_compact(0.05),
                            grid if grid is not None else EpsilonGrid())
        if not verdict.bounded:
            raise CompositionError(f"range of inner map is not c-bounded (witness {verdict.witness})")
        if not outer.domain.periodic:
            for i, (a, b) in enumerate(verdict.hull):
                if not (outer.domain.lower[i] < a and b < outer.domain.upper[i]):
                    raise CompositionError(
                        f"range [{a:.6g}, {b:.6g}] in coordinate {i} escapes the outer domain "
                        f"({outer.domain.lower[i]}, {outer.domain.upper[i]})")
        mapping = dict(enumerate(comps))
        return Representative(tuple(c.subs(mapping) for c in outer.components), outer.shape, self.domain)


def coords(domain):
    """Coordinate expressions of a chart, in order."""
    return tuple(E.var(i) for i in range(domain.ndim))


def sigma(f, domain):
    """Diagonal (eps-independent) embedding of a smooth expression."""
    f = E.as_expr(f)
    if f.has_eps:
        raise ValueError("sigma expects an eps-independent expression")
    return Representative.scalar(f, domain)
