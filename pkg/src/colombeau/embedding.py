"""Distribution specifications and their embeddings into nets.

``iota(w)`` is the net ``w * rho_eps``; ``sigma(f)`` is the constant net ``f``.
Closed forms are used throughout:

* ``delta^(d)_a * rho_eps = rho_eps^(d)(x - a)``  (a :class:`~colombeau.expr.Kernel` node);
* a piece ``g(x) 1_[a, b)`` convolves to
  ``sum_k (-1)^k g^(k)(x)/k! * eps^k [m_k((x-a)/eps) - m_k((x-b)/eps)]`` with the
  partial moments ``m_k`` (exact for polynomial ``g``);
* ``vp(1/(x-a)) * rho_eps`` is a principal-value node evaluated by quadrature;
* a smooth ``f`` convolves to ``f + (f * rho_eps - f)``, the second term a
  :class:`~colombeau.expr.ConvDefect` node.

Text grammar (``x`` is the variable; ``-`` may be written as U+2212)::

    dist    := sum
    sum     := product (("+" | "-") product)*
    product := unary ("*" unary)*
    unary   := "-" unary | power
    power   := primary ("^" INT)?
    primary := NUMBER | "x" | "(" sum ")" | atom
    atom    := "delta" "'"* ["@" NUMBER] | "delta^(" INT ")" ["@" NUMBER]
             | ("heaviside" | "H" | "sign" | "abs" | "pv_inv") ["@" NUMBER]
             | "pp[" piece (";" piece)* "]"       piece := "(" A "," B "):" polynomial in x
             | "smooth(" prefix-expression in x ")"

``A`` and ``B`` may be ``inf``/``-inf``.  Products may contain at most one
singular factor.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import expr as E
from .errors import ParseError, UnsupportedDistributionError
from .mollifier import make_mollifier
from .nets import Representative

TAYLOR_ORDER = 12


# ---------------------------------------------------------------------------
# specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dirac:
    order: int = 0
    at: float = 0.0


@dataclass(frozen=True)
class Heaviside:
    at: float = 0.0


@dataclass(frozen=True)
class Sign:
    at: float = 0.0


@dataclass(frozen=True)
class AbsoluteValue:
    at: float = 0.0


@dataclass(frozen=True)
class PrincipalValueReciprocal:
    at: float = 0.0


@dataclass(frozen=True)
class PiecewisePolynomial:
    """``sum_i P_i(x) 1_[a_i, b_i)(x)`` with ``pieces = ((a_i, b_i, coeffs_i), ...)``."""

    pieces: tuple

    def __post_init__(self):
        prev = -math.inf
        for a, b, cs in self.pieces:
            if not a < b:
                raise ValueError(f"empty piece ({a}, {b})")
            if a < prev:
                raise ValueError("pieces must be ordered and non-overlapping")
            if not all(math.isfinite(c) for c in cs):
                raise ValueError("piece coefficients must be finite")
            prev = b


@dataclass(frozen=True)
class SmoothLiteral:
    """A smooth function given as an expression in coordinate 0."""

    f: E.Expr


@dataclass(frozen=True)
class Combination:
    terms: tuple  # ((coef, spec), ...)

    def __post_init__(self):
        if not all(math.isfinite(c) for c, _ in self.terms):
            raise ValueError("combination coefficients must be finite")


@dataclass(frozen=True)
class Times:
    """Smooth multiplier ``f`` (expression in coordinate 0) times a distribution."""

    f: E.Expr
    w: object = field(default=None)


def _is_singular(w):
    return not isinstance(w, SmoothLiteral)


def singular_points(w):
    if isinstance(w, (Dirac, Heaviside, Sign, AbsoluteValue, PrincipalValueReciprocal)):
        return [w.at]
    if isinstance(w, PiecewisePolynomial):
        pts = []
        for a, b, _ in w.pieces:
            pts += [p for p in (a, b) if math.isfinite(p)]
        return pts
    if isinstance(w, Combination):
        return [p for _, t in w.terms for p in singular_points(t)]
    if isinstance(w, Times):
        return singular_points(w.w)
    return []


# ---------------------------------------------------------------------------
# embedding
# ---------------------------------------------------------------------------

def _taylor_pieces(g, a, b, moll, x, scale):
    """``(g 1_[a,b)) * rho_scale`` as an expression (``g`` in coordinate 0, placed at ``x``)."""
    terms = []
    deriv = g
    for k in range(TAYLOR_ORDER + 1):
        if deriv == E.ZERO:
            break
        dk = deriv.subs({0: x})
        coef = (-1.0) ** k / math.factorial(k)
        if math.isfinite(a):
            upper = E.KMom(moll, k, E.sub(x, E.Const(a)), scale)
        else:
            mu = moll.moment(k)
            upper = E.mul(E.Const(mu), E.power(scale, k)) if mu != 0.0 else E.ZERO
        lower = E.KMom(moll, k, E.sub(x, E.Const(b)), scale) if math.isfinite(b) else E.ZERO
        window = E.sub(upper, lower)
        if window != E.ZERO:
            terms.append(E.mul(E.Const(coef), dk, window))
        deriv = deriv.diff(0)
    return E.add(*terms)


def _multiply(f, w):
    """Rewrite ``f * w`` (``f`` smooth in coordinate 0) into directly embeddable specs."""
    x0 = E.var(0)
    if isinstance(w, SmoothLiteral):
        return SmoothLiteral(E.mul(f, w.f))
    if isinstance(w, Combination):
        return Combination(tuple((c, _multiply(f, t)) for c, t in w.terms))
    if isinstance(w, Times):
        return _multiply(E.mul(f, w.f), w.w)
    if isinstance(w, Dirac):
        terms = []
        deriv = f
        for j in range(w.order + 1):
            val = deriv.subs({0: E.Const(w.at)})
            if not isinstance(val, E.Const):
                raise UnsupportedDistributionError("multiplier must be eps-independent")
            c = (-1) ** j * math.comb(w.order, j) * val.value
            if c != 0.0:
                terms.append((c, Dirac(w.order - j, w.at)))
            deriv = deriv.diff(0)
        return Combination(tuple(terms))
    if isinstance(w, Heaviside):
        return Times(f, PiecewisePolynomial(((w.at, math.inf, (1.0,)),)))
    if isinstance(w, Sign):
        return Times(f, PiecewisePolynomial(((-math.inf, w.at, (-1.0,)), (w.at, math.inf, (1.0,)))))
    if isinstance(w, AbsoluteValue):
        a = w.at
        return Times(f, PiecewisePolynomial(((-math.inf, a, (a, -1.0)), (a, math.inf, (-a, 1.0)))))
    if isinstance(w, PiecewisePolynomial):
        return Times(f, w)
    if isinstance(w, PrincipalValueReciprocal):
        # f vp(1/(x-a)) = f(a) vp(1/(x-a)) + (f(x) - f(a))/(x - a), polynomial f only
        fe = f.expand()
        if not (fe.free_vars <= {0}) or not _is_polynomial(fe):
            raise UnsupportedDistributionError("only polynomial multipliers of vp(1/x) are supported")
        coeffs = _poly_coeffs(fe)
        fa = float(np.polynomial.polynomial.polyval(w.at, coeffs))
        quotient = _synthetic_division(coeffs, w.at)
        parts = [(1.0, SmoothLiteral(E.poly(quotient, x0)))] if quotient else []
        if fa != 0.0:
            parts.append((fa, w))
        return Combination(tuple(parts))
    raise UnsupportedDistributionError(f"cannot multiply {type(w).__name__} by a smooth function")


def _is_polynomial(e):
    for node in e.walk():
        if isinstance(node, (E.Func, E.Div, E.Bump, E.Kernel, E.KMom, E.PVConv, E.ConvDefect, E.Eps)):
            return False
        if isinstance(node, E.Pow) and (node.exponent < 0 or not float(node.exponent).is_integer()):
            return False
        if isinstance(node, E.Poly) and node.arg.free_vars and not isinstance(node.arg, E.Var):
            return False
    return True


def _poly_coeffs(e, limit=64):
    """Coefficients of a polynomial expression in coordinate 0 by exact differentiation at 0."""
    out = []
    d = e
    for k in range(limit):
        v = d.subs({0: E.ZERO})
        out.append(v.value / math.factorial(k))
        d = d.diff(0)
        if d == E.ZERO:
            break
    while out and out[-1] == 0.0:
        out.pop()
    return out


def _synthetic_division(coeffs, a):
    """Coefficients of ``(p(x) - p(a)) / (x - a)``."""
    n = len(coeffs) - 1
    if n < 1:
        return []
    q = [0.0] * n
    acc = 0.0
    for k in range(n, 0, -1):
        acc = acc * a + coeffs[k]
        q[k - 1] = acc
    return q


def embed_expr(w, mollifier=None, axis=0, scale=E.EPS):
    """``w * rho_scale`` as an expression in coordinate ``axis``."""
    m = mollifier if mollifier is not None else make_mollifier()
    x = E.var(axis)
    if isinstance(w, Dirac):
        return E.Kernel(m, w.order, E.sub(x, E.Const(w.at)), scale)
    if isinstance(w, Heaviside):
        return E.KMom(m, 0, E.sub(x, E.Const(w.at)), scale)
    if isinstance(w, Sign):
        return E.sub(E.mul(E.Const(2.0), E.KMom(m, 0, E.sub(x, E.Const(w.at)), scale)), E.ONE)
    if isinstance(w, AbsoluteValue):
        a = w.at
        pp = PiecewisePolynomial(((-math.inf, a, (a, -1.0)), (a, math.inf, (-a, 1.0))))
        return embed_expr(pp, m, axis, scale)
    if isinstance(w, PrincipalValueReciprocal):
        return E.PVConv(m, 0, E.sub(x, E.Const(w.at)), scale)
    if isinstance(w, PiecewisePolynomial):
        return E.add(*(_taylor_pieces(E.poly(cs, E.var(0)), a, b, m, x, scale) for a, b, cs in w.pieces))
    if isinstance(w, SmoothLiteral):
        f = w.f
        if not f.free_vars <= {0} or f.has_eps:
            raise UnsupportedDistributionError("smooth literal must depend on x only")
        if m.normalized and _is_polynomial(f) and len(_poly_coeffs(f)) - 1 <= m.q:
            # vanishing moments reproduce low-degree polynomials exactly
            return f.subs({0: x})
        return E.add(f.subs({0: x}), E.ConvDefect(f, m, 0, scale, (x,)))
    if isinstance(w, Combination):
        return E.add(*(E.mul(E.Const(c), embed_expr(t, m, axis, scale)) for c, t in w.terms))
    if isinstance(w, Times):
        inner = _multiply(w.f, w.w)
        if isinstance(inner, Times):
            pp = inner.w
            return E.add(*(_taylor_pieces(E.mul(inner.f, E.poly(cs, E.var(0))), a, b, m, x, scale)
                           for a, b, cs in pp.pieces))
        return embed_expr(inner, m, axis, scale)
    raise UnsupportedDistributionError(f"no embedding for {type(w).__name__}")


def embed_distribution(w, mollifier=None, domain=None, axis=0, eps_max=1.0):
    """``iota(w)`` as a :class:`Representative` on ``domain`` (default ``(-4, 4)``).

    Singular points of ``w`` must lie inside the domain with margin ``eps_max * R``.
    """
    from .nets import ChartDomain

    if isinstance(w, str):
        w = parse_distribution(w)
    m = mollifier if mollifier is not None else make_mollifier()
    if domain is None:
        domain = ChartDomain.interval(-4.0, 4.0)
    margin = eps_max * m.radius
    lo, hi = domain.lower[axis], domain.upper[axis]
    for p in singular_points(w):
        if not domain.periodic and not (lo + margin <= p <= hi - margin):
            raise UnsupportedDistributionError(
                f"singular point {p} closer than eps_max*R={margin} to the domain boundary")
    return Representative.scalar(embed_expr(w, m, axis), domain)


def embed_smooth(f, domain):
    """``sigma(f)``: the eps-independent net."""
    f = E.as_expr(f)
    if f.has_eps:
        raise ValueError("sigma expects an eps-independent expression")
    return Representative.scalar(f, domain)


def scale_kernel(mollifier, n, scale=E.EPS):
    """Tensor-product scaled kernel ``prod_i scale^-1 rho(x_i/scale)`` in ``n`` coordinates."""
    return E.mul(*(E.Kernel(mollifier, 0, E.var(i), scale) for i in range(n)))


# ---------------------------------------------------------------------------
# text form
# ---------------------------------------------------------------------------

_DIST_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)"
    r"|(?P<name>[A-Za-z_]+)|(?P<op>[-+*^()\[\];:,@']))"
)


class _DistParser:
    def __init__(self, text):
        self.text = text.replace("−", "-").replace("×", "*")
        self.pos = 0

    def error(self, msg):
        raise ParseError(f"{msg} at offset {self.pos} in {self.text!r}")

    def peek(self):
        m = _DIST_TOKEN.match(self.text, self.pos)
        if not m or m.end() == self.pos:
            if self.text[self.pos:].strip():
                self.error("unexpected character")
            return None
        return m.group("num") or m.group("name") or m.group("op")

    def take(self, expect=None):
        m = _DIST_TOKEN.match(self.text, self.pos)
        if not m or m.end() == self.pos:
            self.error("unexpected end of input" if expect else "unexpected character")
        tok = m.group("num") or m.group("name") or m.group("op")
        if expect is not None and tok != expect:
            self.error(f"expected {expect!r}, found {tok!r}")
        self.pos = m.end()
        return tok

    def number(self):
        sign = 1.0
        if self.peek() == "-":
            self.take()
            sign = -1.0
        elif self.peek() == "+":
            self.take()
        tok = self.take()
        if tok == "inf":
            return sign * math.inf
        try:
            return sign * float(tok)
        except ValueError:
            self.error(f"expected a number, found {tok!r}")

    def parse(self):
        v = self.sum()
        if self.peek() is not None:
            self.error("trailing input")
        return _finish(v)

    def sum(self):
        v = self.product()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.product()
            v = _add(v, _scale(-1.0, rhs) if op == "-" else rhs)
        return v

    def product(self):
        v = self.unary()
        while self.peek() == "*":
            self.take()
            v = _mul(v, self.unary())
        return v

    def unary(self):
        if self.peek() == "-":
            self.take()
            return _scale(-1.0, self.unary())
        return self.power()

    def power(self):
        v = self.primary()
        if self.peek() == "^":
            self.take()
            n = self.number()
            if not float(n).is_integer() or n < 0:
                self.error("exponent must be a nonnegative integer")
            if not isinstance(v, np.polynomial.Polynomial):
                self.error("only polynomial factors may be raised to a power")
            v = v ** int(n)
        return v

    def location(self):
        if self.peek() == "@":
            self.take()
            return self.number()
        return 0.0

    def primary(self):
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of input")
        if tok == "(":
            self.take()
            v = self.sum()
            self.take(")")
            return v
        if tok[0].isdigit() or tok[0] == ".":
            return np.polynomial.Polynomial([float(self.take())])
        tok = self.take()
        if tok == "x":
            return np.polynomial.Polynomial([0.0, 1.0])
        if tok == "delta":
            order = 0
            if self.peek() == "^":
                self.take()
                self.take("(")
                n = self.number()
                self.take(")")
                order = int(n)
            while self.peek() == "'":
                self.take()
                order += 1
            return Dirac(order, self.location())
        if tok in ("heaviside", "H"):
            return Heaviside(self.location())
        if tok == "sign":
            return Sign(self.location())
        if tok == "abs":
            return AbsoluteValue(self.location())
        if tok == "pv_inv":
            return PrincipalValueReciprocal(self.location())
        if tok == "pp":
            return self.pieces()
        if tok == "smooth":
            return self.smooth()
        self.error(f"unknown distribution {tok!r}")

    def pieces(self):
        self.take("[")
        out = []
        while True:
            self.take("(")
            a = self.number()
            self.take(",")
            b = self.number()
            self.take(")")
            self.take(":")
            p = self.sum()
            if not isinstance(p, np.polynomial.Polynomial):
                self.error("piece must be a polynomial in x")
            out.append((a, b, tuple(float(c) for c in p.coef)))
            if self.peek() == ";":
                self.take()
                continue
            self.take("]")
            break
        try:
            return PiecewisePolynomial(tuple(out))
        except ValueError as exc:
            raise ParseError(str(exc)) from exc

    def smooth(self):
        from .dsl import parse

        if self.text[self.pos:self.pos + 1] != "(":
            self.error("expected '(' after smooth")
        depth = 0
        start = self.pos + 1
        for j in range(self.pos, len(self.text)):
            if self.text[j] == "(":
                depth += 1
            elif self.text[j] == ")":
                depth -= 1
                if depth == 0:
                    body = self.text[start:j]
                    self.pos = j + 1
                    return SmoothLiteral(parse(body, ("x",)))
        self.error("unbalanced parentheses in smooth(...)")


def _as_spec(v):
    if isinstance(v, np.polynomial.Polynomial):
        return SmoothLiteral(E.poly(v.coef, E.var(0)))
    return v


def _scale(c, v):
    if isinstance(v, np.polynomial.Polynomial):
        return v * c
    return Combination(((c, v),))


def _add(u, v):
    if isinstance(u, np.polynomial.Polynomial) and isinstance(v, np.polynomial.Polynomial):
        return u + v
    terms = []
    for w in (u, v):
        w = _as_spec(w)
        if isinstance(w, Combination):
            terms.extend(w.terms)
        else:
            terms.append((1.0, w))
    return Combination(tuple(terms))


def _const_of(p):
    if isinstance(p, np.polynomial.Polynomial) and len(p.trim().coef) == 1:
        return float(p.coef[0])
    return None


def _mul(u, v):
    P = np.polynomial.Polynomial
    if isinstance(u, P) and isinstance(v, P):
        return u * v
    if not isinstance(u, P):
        u, v = v, u
    if isinstance(u, P):
        c = _const_of(u)
        if c is not None:
            return _scale(c, v)
        return Times(E.poly(u.coef, E.var(0)), v)
    if isinstance(u, SmoothLiteral):
        return Times(u.f, v)
    if isinstance(v, SmoothLiteral):
        return Times(v.f, u)
    raise UnsupportedDistributionError("product of two singular distributions has no embedding here")


def _finish(v):
    return _as_spec(v)


def parse_distribution(text):
    """Parse the textual distribution form into a specification."""
    return _DistParser(text).parse()
