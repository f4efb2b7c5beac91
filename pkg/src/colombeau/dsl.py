"""Prefix text syntax and JSON documents for expressions.

Grammar (whitespace separated, parenthesized prefix forms)::

    expr   := NUMBER | NAME | "eps" | "pi" | "(" head expr* ")"
    head   := + | - | * | / | ^ | sin | cos | exp | log
            | poly      ARG c0 c1 ...             sum c_k ARG^k
            | bump      D ARG                     D-th derivative of exp(-1/(1-s^2))
            | kernel    Q R D ARG SCALE           SCALE^(-1-D) rho^(D)(ARG/SCALE)
            | kmom      Q R K ARG SCALE           SCALE^K m_K(ARG/SCALE)
            | pvconv    Q R D ARG SCALE           principal-value convolution
            | convdefect Q R AXIS SCALE F ARG...  f*rho_SCALE - f  (F uses $0, $1, ...)
            | d NAME    EXPR                      partial derivative marker
            | iota "DIST" NAME                    convolution embedding of a distribution
            | sigma EXPR                          diagonal embedding (identity on trees)
            | rho NAME                            rho_eps in that coordinate

``NAME`` is one of the chart's coordinate names.  ``Q`` is the moment order
of a normalized kernel, or ``None`` for the bare bump.  Serializing a tree
with :func:`to_text` and parsing it back gives an equal tree.
"""

from __future__ import annotations

import json
import math
import re

from . import expr as E
from .errors import CertificateError, ParseError
from .mollifier import bare_bump, make_mollifier

_TOKEN = re.compile(r'\s*(?:(\()|(\))|("[^"]*")|([^\s()"]+))')


def tokenize(text):
    pos = 0
    out = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at offset {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        out.append(next(g for g in m.groups() if g is not None))
    return out


def _read(tokens, i):
    if i >= len(tokens):
        raise ParseError("unexpected end of input")
    t = tokens[i]
    if t == "(":
        items = []
        i += 1
        while True:
            if i >= len(tokens):
                raise ParseError("missing closing parenthesis")
            if tokens[i] == ")":
                return items, i + 1
            item, i = _read(tokens, i)
            items.append(item)
    if t == ")":
        raise ParseError("unbalanced closing parenthesis")
    return t, i + 1


def read_sexpr(text):
    tokens = tokenize(text)
    if not tokens:
        raise ParseError("empty expression")
    tree, end = _read(tokens, 0)
    if end != len(tokens):
        raise ParseError(f"trailing tokens after expression: {' '.join(tokens[end:])}")
    return tree


def _number(tok):
    try:
        return float(tok)
    except (TypeError, ValueError):
        return None


def _int(tok, what):
    v = _number(tok)
    if v is None or not float(v).is_integer():
        raise ParseError(f"{what} must be an integer, got {tok!r}")
    return int(v)


def _moll(q_tok, r_tok):
    if q_tok == "None":
        return bare_bump()
    q = _int(q_tok, "moment order")
    r = _number(r_tok)
    if r is None:
        raise ParseError(f"support radius must be a number, got {r_tok!r}")
    return make_mollifier(q, r)


class _Parser:
    def __init__(self, names, mollifier):
        self.names = list(names)
        self.mollifier = mollifier

    def coord(self, tok):
        if isinstance(tok, str):
            if tok in self.names:
                return self.names.index(tok)
            if tok.startswith("$") and tok[1:].isdigit():
                return int(tok[1:])
        raise ParseError(f"unknown coordinate {tok!r} (chart has {self.names})")

    def build(self, t):
        if isinstance(t, list):
            if not t:
                raise ParseError("empty form ()")
            try:
                return self.form(t[0], t[1:])
            except CertificateError as exc:
                raise ParseError(f"rejected form ({t[0]} ...): {exc}") from exc
        v = _number(t)
        if v is not None:
            return E.Const(v)
        if t == "eps":
            return E.EPS
        if t == "pi":
            return E.Const(math.pi)
        return E.var(self.coord(t))

    def form(self, head, args):
        b = self.build
        if head == "+":
            return E.add(*(b(a) for a in args))
        if head == "*":
            return E.mul(*(b(a) for a in args))
        if head == "-":
            if len(args) == 1:
                return E.neg(b(args[0]))
            self._arity(head, args, 2)
            return E.sub(b(args[0]), b(args[1]))
        if head == "/":
            self._arity(head, args, 2)
            return E.div(b(args[0]), b(args[1]))
        if head == "^":
            self._arity(head, args, 2)
            ex = _number(args[1])
            if ex is None:
                raise ParseError("exponent must be a number")
            return E.power(b(args[0]), ex)
        if head in E.FUNCS:
            self._arity(head, args, 1)
            return E.func(head, b(args[0]))
        if head == "poly":
            if len(args) < 2:
                raise ParseError("poly needs an argument and coefficients")
            cs = [_number(c) for c in args[1:]]
            if any(c is None for c in cs):
                raise ParseError("poly coefficients must be numbers")
            return E.poly(cs, b(args[0]))
        if head == "bump":
            self._arity(head, args, 2)
            return E.Bump(_int(args[0], "order"), b(args[1]))
        if head in ("kernel", "kmom", "pvconv"):
            self._arity(head, args, 5)
            m = _moll(args[0], args[1])
            n = _int(args[2], "order")
            cls = {"kernel": E.Kernel, "kmom": E.KMom, "pvconv": E.PVConv}[head]
            return cls(m, n, b(args[3]), b(args[4]))
        if head == "convdefect":
            if len(args) < 6:
                raise ParseError("convdefect needs Q R AXIS SCALE F ARG...")
            m = _moll(args[0], args[1])
            axis = _int(args[2], "axis")
            inner = _Parser([], self.mollifier).build(args[4])
            return E.ConvDefect(inner, m, axis, b(args[3]), tuple(b(a) for a in args[5:]))
        if head == "d":
            self._arity(head, args, 2)
            return E.partial(self.coord(args[0]), b(args[1]))
        if head == "sigma":
            self._arity(head, args, 1)
            return b(args[0])
        if head == "rho":
            self._arity(head, args, 1)
            return E.Kernel(self.mollifier, 0, E.var(self.coord(args[0])), E.EPS)
        if head == "iota":
            self._arity(head, args, 2)
            spec = args[0]
            if not (isinstance(spec, str) and spec.startswith('"')):
                raise ParseError('iota expects a quoted distribution, e.g. (iota "delta" x)')
            from .embedding import embed_expr, parse_distribution

            dist = parse_distribution(spec[1:-1])
            return embed_expr(dist, self.mollifier, axis=self.coord(args[1]))
        raise ParseError(f"unknown form {head!r}")

    @staticmethod
    def _arity(head, args, n):
        if len(args) != n:
            raise ParseError(f"({head} ...) takes {n} argument(s), got {len(args)}")


def parse(text, names=("x",), mollifier=None):
    """Parse prefix text into an expression over coordinates ``names``."""
    if mollifier is None:
        mollifier = make_mollifier()
    return _Parser(names, mollifier).build(read_sexpr(text))


def to_text(e, names=None):
    return e.render(list(names) if names is not None else None)


# ---------------------------------------------------------------------------
# structured documents
# ---------------------------------------------------------------------------

def _moll_doc(m):
    return {"q": m.q, "radius": m.radius}


def _doc_moll(d):
    if d["q"] is None:
        return bare_bump()
    return make_mollifier(int(d["q"]), float(d["radius"]))


def to_doc(e, names=None):
    """Field-for-field dictionary form of an expression tree."""
    nm = list(names) if names is not None else None

    def vname(i):
        return nm[i] if nm is not None else f"x{i}"

    def go(n, inner=False):
        if isinstance(n, E.Const):
            return {"kind": "const", "value": n.value}
        if isinstance(n, E.Var):
            return {"kind": "var", "name": f"${n.index}" if inner else vname(n.index)}
        if isinstance(n, E.Eps):
            return {"kind": "eps"}
        if isinstance(n, E.Add):
            return {"kind": "add", "terms": [go(t, inner) for t in n.terms]}
        if isinstance(n, E.Mul):
            return {"kind": "mul", "factors": [go(f, inner) for f in n.factors]}
        if isinstance(n, E.Pow):
            return {"kind": "pow", "base": go(n.base, inner), "exponent": n.exponent}
        if isinstance(n, E.Div):
            return {"kind": "div", "num": go(n.num, inner), "den": go(n.den, inner)}
        if isinstance(n, E.Func):
            return {"kind": n.name, "arg": go(n.arg, inner)}
        if isinstance(n, E.Poly):
            return {"kind": "poly", "coeffs": list(n.coeffs), "arg": go(n.arg, inner)}
        if isinstance(n, E.Bump):
            return {"kind": "bump", "order": n.order, "arg": go(n.arg, inner)}
        if isinstance(n, (E.Kernel, E.PVConv)):
            kind = "kernel" if isinstance(n, E.Kernel) else "pvconv"
            return {"kind": kind, "mollifier": _moll_doc(n.moll), "order": n.order,
                    "arg": go(n.arg, inner), "scale": go(n.scale, inner)}
        if isinstance(n, E.KMom):
            return {"kind": "kmom", "mollifier": _moll_doc(n.moll), "k": n.k,
                    "arg": go(n.arg, inner), "scale": go(n.scale, inner)}
        if isinstance(n, E.ConvDefect):
            return {"kind": "convdefect", "mollifier": _moll_doc(n.moll), "axis": n.axis,
                    "scale": go(n.scale, inner), "f": go(n.f, True),
                    "args": [go(a, inner) for a in n.args]}
        if isinstance(n, E.Partial):
            return {"kind": "partial", "var": vname(n.index), "child": go(n.child, inner)}
        raise TypeError(f"no document form for {type(n).__name__}")

    return go(e)


def from_doc(doc, names=("x",)):
    p = _Parser(names, None)

    def go(d):
        try:
            kind = d["kind"]
            if kind == "const":
                return E.Const(float(d["value"]))
            if kind == "var":
                return E.var(p.coord(d["name"]))
            if kind == "eps":
                return E.EPS
            if kind == "add":
                return E.add(*(go(t) for t in d["terms"]))
            if kind == "mul":
                return E.mul(*(go(f) for f in d["factors"]))
            if kind == "pow":
                return E.power(go(d["base"]), float(d["exponent"]))
            if kind == "div":
                return E.div(go(d["num"]), go(d["den"]))
            if kind in E.FUNCS:
                return E.func(kind, go(d["arg"]))
            if kind == "poly":
                return E.poly(d["coeffs"], go(d["arg"]))
            if kind == "bump":
                return E.Bump(int(d["order"]), go(d["arg"]))
            if kind in ("kernel", "pvconv"):
                cls = E.Kernel if kind == "kernel" else E.PVConv
                return cls(_doc_moll(d["mollifier"]), int(d["order"]), go(d["arg"]), go(d["scale"]))
            if kind == "kmom":
                return E.KMom(_doc_moll(d["mollifier"]), int(d["k"]), go(d["arg"]), go(d["scale"]))
            if kind == "convdefect":
                inner = from_doc(d["f"], ())
                return E.ConvDefect(inner, _doc_moll(d["mollifier"]), int(d["axis"]),
                                    go(d["scale"]), tuple(go(a) for a in d["args"]))
            if kind == "partial":
                return E.partial(p.coord(d["var"]), go(d["child"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed expression document: {exc}") from exc
        except CertificateError as exc:
            raise ParseError(f"rejected expression document: {exc}") from exc
        raise ParseError(f"unknown expression kind {d.get('kind')!r}")

    return go(doc)


def dumps(e, names=None):
    return json.dumps(to_doc(e, names), sort_keys=True)


def loads(text, names=("x",)):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return from_doc(doc, names)
