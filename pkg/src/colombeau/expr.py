"""Immutable expression trees in chart coordinates and the parameter ``eps``.

Every node supports an exact symbolic partial derivative (:meth:`Expr.diff`)
within the same node vocabulary, substitution of coordinates
(:meth:`Expr.subs`) and a canonical text key used for equality, hashing and
ordering.  Build trees through the smart constructors (:func:`add`,
:func:`mul`, :func:`power`, :func:`div`, ...) or the operator overloads; they
apply a light normalization (flattening, constant folding, collecting like
terms and powers, sorted arguments) so that algebraically equal results of
the library's own operations compare equal structurally.

Quotients and negative powers need a nonvanishing certificate for the
denominator, derived syntactically by :func:`certify`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import CertificateError
from .mollifier import Mollifier

LOG_EPS_CEILING = 0.5


@dataclass(frozen=True)
class Certificate:
    """``|den| >= floor * eps**eps_power`` with sign ``sign``, valid for ``eps <= eps_ceiling``."""

    eps_power: float
    floor: float
    sign: int = 1
    eps_ceiling: float = 1.0

    def __mul__(self, other):
        return Certificate(self.eps_power + other.eps_power, self.floor * other.floor,
                           self.sign * other.sign, min(self.eps_ceiling, other.eps_ceiling))

    def __pow__(self, n):
        return Certificate(self.eps_power * n, self.floor ** n, self.sign ** n, self.eps_ceiling)


def _fmt(v):
    return repr(float(v))


class Expr:
    """Base node.  Subclasses are frozen dataclasses with ``eq=False``."""

    __array_priority__ = 1000

    # -- identity ---------------------------------------------------------
    @cached_property
    def key(self):
        return self._render(None)

    def __eq__(self, other):
        return isinstance(other, Expr) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"<{type(self).__name__} {self.key}>"

    def render(self, names=None):
        """Prefix-DSL text using ``names`` for coordinates (``x0, x1, ...`` by default)."""
        return self._render(names)

    # -- structure --------------------------------------------------------
    def children(self):
        return ()

    @cached_property
    def free_vars(self):
        out = frozenset()
        for c in self.children():
            out |= c.free_vars
        return out

    @cached_property
    def has_eps(self):
        return any(c.has_eps for c in self.children())

    @cached_property
    def eps_ceiling(self):
        """Largest eps at which every certificate in the tree is valid."""
        vals = [c.eps_ceiling for c in self.children()]
        return min(vals, default=1.0)

    def walk(self):
        yield self
        for c in self.children():
            yield from c.walk()

    def expand(self):
        """Resolve partial-derivative markers."""
        return self._rebuild([c.expand() for c in self.children()])

    def _rebuild(self, kids):
        return self

    # -- calculus ---------------------------------------------------------
    def diff(self, i):
        raise NotImplementedError

    def subs(self, mapping):
        """Replace coordinate ``Var(i)`` by ``mapping[i]``; other vars stay."""
        return self._rebuild([c.subs(mapping) for c in self.children()])

    # -- operators --------------------------------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, n):
        return power(self, n)

    def __neg__(self):
        return neg(self)


# ---------------------------------------------------------------------------
# leaves
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: float

    def _render(self, names):
        return _fmt(self.value)

    def diff(self, i):
        return ZERO


@dataclass(frozen=True, eq=False)
class Var(Expr):
    index: int

    def _render(self, names):
        if names is None:
            return f"x{self.index}"
        return names[self.index]

    @cached_property
    def free_vars(self):
        return frozenset([self.index])

    def diff(self, i):
        return ONE if i == self.index else ZERO

    def subs(self, mapping):
        return mapping.get(self.index, self)


@dataclass(frozen=True, eq=False)
class Eps(Expr):
    def _render(self, names):
        return "eps"

    @cached_property
    def has_eps(self):
        return True

    def diff(self, i):
        return ZERO


ZERO = Const(0.0)
ONE = Const(1.0)
EPS = Eps()


def as_expr(v):
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, float, np.integer, np.floating)):
        return Const(float(v))
    raise TypeError(f"cannot convert {v!r} to an expression")


def var(i):
    return Var(int(i))


# ---------------------------------------------------------------------------
# algebra
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Add(Expr):
    terms: tuple

    def children(self):
        return self.terms

    def _render(self, names):
        return "(+ " + " ".join(t._render(names) for t in self.terms) + ")"

    def _rebuild(self, kids):
        return add(*kids)

    def diff(self, i):
        return add(*(t.diff(i) for t in self.terms))


@dataclass(frozen=True, eq=False)
class Mul(Expr):
    factors: tuple

    def children(self):
        return self.factors

    def _render(self, names):
        return "(* " + " ".join(f._render(names) for f in self.factors) + ")"

    def _rebuild(self, kids):
        return mul(*kids)

    def diff(self, i):
        parts = []
        for k, f in enumerate(self.factors):
            if i not in f.free_vars:
                continue
            others = self.factors[:k] + self.factors[k + 1:]
            parts.append(mul(f.diff(i), *others))
        return add(*parts)


@dataclass(frozen=True, eq=False)
class Pow(Expr):
    base: Expr
    exponent: float

    def children(self):
        return (self.base,)

    def _render(self, names):
        return f"(^ {self.base._render(names)} {_fmt(self.exponent)})"

    def _rebuild(self, kids):
        return power(kids[0], self.exponent)

    @cached_property
    def eps_ceiling(self):
        own = certify(self.base).eps_ceiling if self.exponent < 0 and not isinstance(self.base, Eps) else 1.0
        return min(own, self.base.eps_ceiling)

    def diff(self, i):
        if i not in self.base.free_vars:
            return ZERO
        return mul(Const(self.exponent), power(self.base, self.exponent - 1), self.base.diff(i))


@dataclass(frozen=True, eq=False)
class Div(Expr):
    num: Expr
    den: Expr
    cert: Certificate

    def children(self):
        return (self.num, self.den)

    def _render(self, names):
        return f"(/ {self.num._render(names)} {self.den._render(names)})"

    def _rebuild(self, kids):
        return div(kids[0], kids[1])

    @cached_property
    def eps_ceiling(self):
        return min(self.cert.eps_ceiling, self.num.eps_ceiling, self.den.eps_ceiling)

    def diff(self, i):
        dn = self.num.diff(i)
        dd = self.den.diff(i)
        first = div(dn, self.den)
        if dd == ZERO:
            return first
        return add(first, neg(div(mul(self.num, dd), power(self.den, 2))))


# ---------------------------------------------------------------------------
# smooth primitives
# ---------------------------------------------------------------------------

FUNCS = ("sin", "cos", "exp", "log")


@dataclass(frozen=True, eq=False)
class Func(Expr):
    name: str
    arg: Expr

    def children(self):
        return (self.arg,)

    def _render(self, names):
        return f"({self.name} {self.arg._render(names)})"

    def _rebuild(self, kids):
        return func(self.name, kids[0])

    @cached_property
    def eps_ceiling(self):
        own = certify(self.arg).eps_ceiling if self.name == "log" else 1.0
        return min(own, self.arg.eps_ceiling)

    def diff(self, i):
        if i not in self.arg.free_vars:
            return ZERO
        a = self.arg
        da = a.diff(i)
        if self.name == "sin":
            return mul(func("cos", a), da)
        if self.name == "cos":
            return mul(Const(-1.0), func("sin", a), da)
        if self.name == "exp":
            return mul(self, da)
        return div(da, a)


@dataclass(frozen=True, eq=False)
class Poly(Expr):
    """``sum_k coeffs[k] * arg**k``."""

    coeffs: tuple
    arg: Expr

    def children(self):
        return (self.arg,)

    def _render(self, names):
        cs = " ".join(_fmt(c) for c in self.coeffs)
        return f"(poly {self.arg._render(names)} {cs})"

    def _rebuild(self, kids):
        return poly(self.coeffs, kids[0])

    def diff(self, i):
        if i not in self.arg.free_vars:
            return ZERO
        dc = tuple(k * c for k, c in enumerate(self.coeffs))[1:]
        return mul(poly(dc, self.arg), self.arg.diff(i))


@dataclass(frozen=True, eq=False)
class Bump(Expr):
    """``d``-th derivative of the unit bump ``exp(-1/(1-s^2))`` at ``arg``."""

    order: int
    arg: Expr

    def children(self):
        return (self.arg,)

    def _render(self, names):
        return f"(bump {self.order} {self.arg._render(names)})"

    def _rebuild(self, kids):
        return Bump(self.order, kids[0])

    def diff(self, i):
        if i not in self.arg.free_vars:
            return ZERO
        return mul(Bump(self.order + 1, self.arg), self.arg.diff(i))


def _check_scale(scale):
    if scale.free_vars:
        raise CertificateError(f"kernel scale must not depend on coordinates: {scale.key}")
    cert = certify(scale)
    if cert.sign < 0:
        raise CertificateError(f"kernel scale must be positive: {scale.key}")
    return cert


@dataclass(frozen=True, eq=False)
class Kernel(Expr):
    """Scaled kernel derivative ``scale^(-1-d) * rho^(d)(arg/scale)``."""

    moll: Mollifier
    order: int
    arg: Expr
    scale: Expr

    def __post_init__(self):
        _check_scale(self.scale)

    def children(self):
        return (self.arg, self.scale)

    def _render(self, names):
        m = self.moll
        return (f"(kernel {m.q} {_fmt(m.radius)} {self.order} "
                f"{self.arg._render(names)} {self.scale._render(names)})")

    def _rebuild(self, kids):
        return Kernel(self.moll, self.order, kids[0], kids[1])

    def diff(self, i):
        if i not in self.arg.free_vars:
            return ZERO
        return mul(Kernel(self.moll, self.order + 1, self.arg, self.scale), self.arg.diff(i))


@dataclass(frozen=True, eq=False)
class KMom(Expr):
    """Scaled partial moment ``scale^k * m_k(arg/scale)``, ``m_k(t) = int_{-inf}^t z^k rho(z) dz``.

    ``k = 0`` is the regularized Heaviside function.
    """

    moll: Mollifier
    k: int
    arg: Expr
    scale: Expr

    def __post_init__(self):
        _check_scale(self.scale)

    def children(self):
        return (self.arg, self.scale)

    def _render(self, names):
        m = self.moll
        return (f"(kmom {m.q} {_fmt(m.radius)} {self.k} "
                f"{self.arg._render(names)} {self.scale._render(names)})")

    def _rebuild(self, kids):
        return KMom(self.moll, self.k, kids[0], kids[1])

    def diff(self, i):
        if i not in self.arg.free_vars:
            return ZERO
        return mul(power(self.arg, self.k), Kernel(self.moll, 0, self.arg, self.scale), self.arg.diff(i))


@dataclass(frozen=True, eq=False)
class PVConv(Expr):
    """``scale^(-1-d) * Pi_d(arg/scale)`` with ``Pi_d = vp(1/t) * rho^(d)``; quadrature-backed."""

    moll: Mollifier
    order: int
    arg: Expr
    scale: Expr

    def __post_init__(self):
        _check_scale(self.scale)

    def children(self):
        return (self.arg, self.scale)

    def _render(self, names):
        m = self.moll
        return (f"(pvconv {m.q} {_fmt(m.radius)} {self.order} "
                f"{self.arg._render(names)} {self.scale._render(names)})")

    def _rebuild(self, kids):
        return PVConv(self.moll, self.order, kids[0], kids[1])

    def diff(self, i):
        if i not in self.arg.free_vars:
            return ZERO
        return mul(PVConv(self.moll, self.order + 1, self.arg, self.scale), self.arg.diff(i))


@dataclass(frozen=True, eq=False)
class ConvDefect(Expr):
    """``int (f(a - scale*z*e_axis) - f(a)) rho(z) dz`` evaluated at the point ``a = args``.

    ``f`` is an expression in its own coordinates ``0..len(args)-1``; this is
    ``f * rho_scale - f`` for smooth ``f``.
    """

    f: Expr
    moll: Mollifier
    axis: int
    scale: Expr
    args: tuple

    def __post_init__(self):
        _check_scale(self.scale)

    def children(self):
        return (self.scale,) + self.args

    @cached_property
    def has_eps(self):
        return True

    def _render(self, names):
        m = self.moll
        inner = self.f._render([f"${j}" for j in range(len(self.args))])
        args = " ".join(a._render(names) for a in self.args)
        return (f"(convdefect {m.q} {_fmt(m.radius)} {self.axis} "
                f"{self.scale._render(names)} {inner} {args})")

    def _rebuild(self, kids):
        return ConvDefect(self.f, self.moll, self.axis, kids[0], tuple(kids[1:]))

    def diff(self, i):
        parts = []
        for j, a in enumerate(self.args):
            if i not in a.free_vars:
                continue
            fj = self.f.diff(j)
            if fj == ZERO:
                continue
            parts.append(mul(ConvDefect(fj, self.moll, self.axis, self.scale, self.args), a.diff(i)))
        return add(*parts)


@dataclass(frozen=True, eq=False)
class Partial(Expr):
    """Unevaluated marker ``d/dx_index`` applied to ``child``; see :meth:`Expr.expand`."""

    index: int
    child: Expr

    def children(self):
        return (self.child,)

    def _render(self, names):
        label = f"x{self.index}" if names is None else names[self.index]
        return f"(d {label} {self.child._render(names)})"

    def _rebuild(self, kids):
        return Partial(self.index, kids[0])

    def expand(self):
        return self.child.expand().diff(self.index)

    def diff(self, i):
        return self.expand().diff(i)


# ---------------------------------------------------------------------------
# smart constructors
# ---------------------------------------------------------------------------

def _split_coeff(t):
    if isinstance(t, Const):
        return t.value, ONE
    if isinstance(t, Mul) and isinstance(t.factors[0], Const):
        rest = t.factors[1:]
        return t.factors[0].value, rest[0] if len(rest) == 1 else Mul(rest)
    return 1.0, t


def add(*args):
    flat = []
    for a in args:
        a = as_expr(a)
        if isinstance(a, Add):
            flat.extend(a.terms)
        else:
            flat.append(a)
    const = 0.0
    groups = {}
    order = []
    for t in flat:
        if isinstance(t, Const):
            const += t.value
            continue
        c, rest = _split_coeff(t)
        k = rest.key
        if k in groups:
            groups[k][0] += c
        else:
            groups[k] = [c, rest]
            order.append(k)
    terms = []
    for k in order:
        c, rest = groups[k]
        if c == 0.0:
            continue
        terms.append(rest if c == 1.0 else mul(Const(c), rest))
    terms.sort(key=lambda e: e.key)
    if const != 0.0:
        terms.insert(0, Const(const))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Add(tuple(terms))


def _is_int(e):
    return float(e).is_integer()


def mul(*args):
    flat = []
    for a in args:
        a = as_expr(a)
        if isinstance(a, Mul):
            flat.extend(a.factors)
        else:
            flat.append(a)
    const = 1.0
    groups = {}
    order = []
    for f in flat:
        if isinstance(f, Const):
            const *= f.value
            continue
        if isinstance(f, Pow):
            base, e = f.base, f.exponent
        else:
            base, e = f, 1.0
        k = base.key
        if k in groups and (isinstance(base, Eps) or (_is_int(e) and _is_int(groups[k][1]))):
            groups[k][1] += e
        else:
            if k in groups:
                k = k + f"#{len(order)}"
            groups[k] = [base, e]
            order.append(k)
    if const == 0.0:
        return ZERO
    factors = []
    for k in order:
        base, e = groups[k]
        if e == 0.0:
            continue
        factors.append(power(base, e))
    # powers may have folded to constants
    rest = []
    for f in factors:
        if isinstance(f, Const):
            const *= f.value
        elif isinstance(f, Mul):
            rest.extend(f.factors)
        else:
            rest.append(f)
    if const == 0.0:
        return ZERO
    rest.sort(key=lambda e: e.key)
    if const != 1.0 or not rest:
        rest.insert(0, Const(const))
    if len(rest) == 1:
        return rest[0]
    return Mul(tuple(rest))


def neg(a):
    return mul(Const(-1.0), a)


def sub(a, b):
    return add(a, neg(b))


def power(base, exponent):
    base = as_expr(base)
    e = float(exponent)
    if e == 0.0:
        return ONE
    if e == 1.0:
        return base
    if isinstance(base, Const):
        v = base.value
        if v == 0.0 and e < 0:
            raise CertificateError("zero raised to a negative power")
        if v < 0 and not _is_int(e):
            raise CertificateError("negative constant raised to a fractional power")
        return Const(v ** e)
    if isinstance(base, Pow) and (_is_int(e) and _is_int(base.exponent) or isinstance(base.base, Eps)):
        return power(base.base, base.exponent * e)
    if isinstance(base, Mul) and _is_int(e):
        return mul(*(power(f, e) for f in base.factors))
    if isinstance(base, Eps):
        return Pow(base, e)
    if e < 0 or not _is_int(e):
        cert = certify(base)
        if not _is_int(e) and cert.sign < 0:
            raise CertificateError(f"fractional power of a negative expression: {base.key}")
        if e < 0:
            return Div(ONE, power(base, -e), certify(power(base, -e)))
    return Pow(base, e)


def div(num, den):
    num = as_expr(num)
    den = as_expr(den)
    if isinstance(den, Const):
        if den.value == 0.0:
            raise CertificateError("division by the zero constant")
        return mul(num, Const(1.0 / den.value))
    if isinstance(den, Eps) or (isinstance(den, Pow) and isinstance(den.base, Eps)):
        return mul(num, power(den, -1))
    if isinstance(num, Const) and num.value == 0.0:
        return ZERO
    cert = certify(den)
    # pull eps powers and constants out of the denominator
    if isinstance(den, Mul):
        monomial = [f for f in den.factors
                    if isinstance(f, Const) or isinstance(f, Eps)
                    or (isinstance(f, Pow) and isinstance(f.base, Eps))]
        if monomial:
            rest = [f for f in den.factors if f not in monomial]
            inv = mul(*(power(f, -1) for f in monomial))
            return mul(inv, div(num, mul(*rest)))
    return Div(num, den, cert)


def func(name, arg):
    arg = as_expr(arg)
    if name not in FUNCS:
        raise ValueError(f"unknown primitive {name!r}")
    if isinstance(arg, Const):
        v = arg.value
        if name == "log":
            if v <= 0:
                raise CertificateError("log of a nonpositive constant")
            return Const(math.log(v))
        return Const(getattr(math, name)(v))
    if name == "log":
        cert = certify(arg)
        if cert.sign < 0:
            raise CertificateError(f"log of a negative expression: {arg.key}")
    return Func(name, arg)


def sin(a):
    return func("sin", a)


def cos(a):
    return func("cos", a)


def exp(a):
    return func("exp", a)


def log(a):
    return func("log", a)


def poly(coeffs, arg):
    cs = [float(c) + 0.0 for c in coeffs]
    while cs and cs[-1] == 0.0:
        cs.pop()
    if not cs:
        return ZERO
    if len(cs) == 1:
        return Const(cs[0])
    arg = as_expr(arg)
    if isinstance(arg, Const):
        return Const(float(np.polynomial.polynomial.polyval(arg.value, cs)))
    return Poly(tuple(cs), arg)


def partial(i, e):
    return Partial(int(i), as_expr(e))


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

def lower_bound(e):
    """A syntactically guaranteed lower bound of ``e`` over all points and eps, or None."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, (Eps,)):
        return 0.0
    if isinstance(e, Pow):
        if isinstance(e.base, Eps):
            return 0.0
        if _is_int(e.exponent) and int(e.exponent) % 2 == 0 and e.exponent > 0:
            lb = lower_bound(e.base)
            return lb ** e.exponent if lb is not None and lb > 0 else 0.0
        lb = lower_bound(e.base)
        if lb is not None and lb >= 0 and e.exponent > 0:
            return lb ** e.exponent
        return None
    if isinstance(e, Func) and e.name == "exp":
        return 0.0
    if isinstance(e, Bump) and e.order == 0:
        return 0.0
    if isinstance(e, Kernel) and e.order == 0 and e.moll.nonnegative:
        return 0.0
    if isinstance(e, KMom) and e.k == 0 and e.moll.nonnegative:
        return 0.0
    if isinstance(e, Add):
        total = 0.0
        for t in e.terms:
            lb = lower_bound(t)
            if lb is None:
                return None
            total += lb
        return total
    if isinstance(e, Mul):
        total = 1.0
        for f in e.factors:
            lb = lower_bound(f)
            if lb is None or lb < 0:
                return None
            total *= lb
        return total
    return None


def _upper_bound(e):
    lb = lower_bound(neg(e))
    return None if lb is None else -lb


def certify(den):
    """Nonvanishing certificate for ``den`` or :class:`CertificateError`.

    Accepted forms: nonzero constants, eps powers, ``c + (nonnegative)`` with
    ``c > 0`` (or its negative), ``-log(eps)`` for ``eps <= 1/2``, and
    products/integer powers of these.
    """
    den = as_expr(den)
    if isinstance(den, Const):
        if den.value == 0.0:
            raise CertificateError("zero denominator")
        return Certificate(0.0, abs(den.value), 1 if den.value > 0 else -1)
    if isinstance(den, Eps):
        return Certificate(1.0, 1.0, 1)
    if isinstance(den, Pow):
        if isinstance(den.base, Eps):
            return Certificate(den.exponent, 1.0, 1)
        if _is_int(den.exponent):
            return certify(den.base) ** int(den.exponent)
        base = certify(den.base)
        if base.sign > 0:
            return base ** den.exponent
    if isinstance(den, Func) and den.name == "log" and isinstance(den.arg, Eps):
        return Certificate(0.0, math.log(1.0 / LOG_EPS_CEILING), -1, LOG_EPS_CEILING)
    if (isinstance(den, Div) and isinstance(den.num, Const) and den.num.value != 0.0
            and isinstance(den.den, Func) and den.den.name == "log" and isinstance(den.den.arg, Eps)):
        # eps |log eps| <= 1/e, so |c / log eps| >= |c| eps
        return Certificate(1.0, abs(den.num.value), -1 if den.num.value > 0 else 1, LOG_EPS_CEILING)
    if isinstance(den, Func) and den.name == "exp" and not den.arg.free_vars:
        lb = lower_bound(den.arg)
        if lb is not None:
            return Certificate(0.0, math.exp(lb), 1)
    if isinstance(den, Mul):
        try:
            cert = Certificate(0.0, 1.0, 1)
            for f in den.factors:
                cert = cert * certify(f)
            return cert
        except CertificateError:
            pass
    lb = lower_bound(den)
    if lb is not None and lb > 0:
        return Certificate(0.0, lb, 1)
    ub = _upper_bound(den)
    if ub is not None and ub < 0:
        return Certificate(0.0, -ub, -1)
    raise CertificateError(f"no nonvanishing certificate for denominator {den.key}")


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def derive(e, alpha):
    """``d^alpha e`` for a multi-index ``alpha`` (tuple of per-coordinate orders)."""
    out = e.expand()
    for i, n in enumerate(alpha):
        for _ in range(int(n)):
            out = out.diff(i)
    return out


def eps_only(e):
    return not e.free_vars


def kernel_windows(e, ndim):
    """Support windows of kernel-type nodes whose argument is affine in one coordinate.

    Returns a list of ``(axis, center_expr, halfwidth_expr)`` with the center
    and halfwidth as eps-only expressions (the window is
    ``|x_axis - center| <= halfwidth``).
    """
    out = []
    seen = set()
    for node in e.walk():
        if isinstance(node, (Kernel, KMom, PVConv)):
            arg, scale, radius = node.arg, node.scale, node.moll.radius
        elif isinstance(node, Bump):
            arg, scale, radius = node.arg, ONE, 1.0
        else:
            continue
        fv = arg.free_vars
        if len(fv) != 1:
            continue
        (axis,) = fv
        slope = arg.diff(axis)
        if slope.free_vars or slope == ZERO:
            continue
        at0 = arg.subs({axis: ZERO})
        center = neg(div(at0, slope)) if not isinstance(slope, Const) else mul(Const(-1.0 / slope.value), at0)
        if isinstance(slope, Const):
            half = mul(Const(radius / abs(slope.value)), scale)
        else:
            half = mul(Const(radius), div(scale, slope))
        sig = (axis, center.key, half.key)
        if sig in seen:
            continue
        seen.add(sig)
        out.append((axis, center, half))
    return out
