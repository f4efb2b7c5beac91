"""Compile expression trees to flat instruction tapes and evaluate them.

A tape is a list of SSA instructions (each writes its own slot) with common
subexpressions shared, plus numeric side tables for kernel profiles and
partial-moment tables.  Two evaluators execute the same tape:

* ``colombeau._ctape`` -- compiled Cython loop over points (default when built);
* ``colombeau._pytape`` -- numpy, one vector operation per instruction.

Tapes containing quadrature-backed nodes (principal value, smooth-literal
convolution) carry Python callbacks and always run on the numpy evaluator.
Set ``COLOMBEAU_PURE=1`` to disable the compiled core.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _pytape
from .expr import (Add, Bump, Const, ConvDefect, Div, Eps, Func, Kernel, KMom, Mul, Partial,
                   Poly, Pow, PVConv, Var)
from .mollifier import (GL_NODES, GL_WEIGHTS, N_PANELS, bare_bump)

try:
    if os.environ.get("COLOMBEAU_PURE"):
        raise ImportError("compiled core disabled by COLOMBEAU_PURE")
    from . import _ctape
except ImportError:  # pragma: no cover - depends on build
    _ctape = None

(CONST, VAR, EPS, ADD, SUB, MUL, DIV, NEG, POWI, POWR, SIN, COS, EXP, LOG,
 PROFILE, PMOM, POLY, CALL) = range(18)

_FUNC_OPS = {"sin": SIN, "cos": COS, "exp": EXP, "log": LOG}

_backend = "cython" if _ctape is not None else "python"


def available_backends():
    return ("cython", "python") if _ctape is not None else ("python",)


def get_backend():
    return _backend


def set_backend(name):
    """Select ``"cython"`` or ``"python"``; returns the previous backend."""
    global _backend
    if name not in available_backends():
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    prev, _backend = _backend, name
    return prev


@dataclass
class Tape:
    ndim: int
    op: np.ndarray
    a: np.ndarray
    b: np.ndarray
    ia: np.ndarray
    ib: np.ndarray
    fv: np.ndarray
    outputs: np.ndarray
    pool: np.ndarray
    prof_off: np.ndarray
    prof_len: np.ndarray
    prof_R: np.ndarray
    prof_d: np.ndarray
    pm_off: np.ndarray
    pm_len: np.ndarray
    pm_cum: np.ndarray
    pm_R: np.ndarray
    pm_scale: np.ndarray
    pm_total: np.ndarray
    call_args: np.ndarray
    callbacks: list = field(default_factory=list)

    @property
    def size(self):
        return len(self.op)

    @property
    def has_callbacks(self):
        return bool(self.callbacks)


class _Builder:
    def __init__(self, ndim):
        self.ndim = ndim
        self.rows = []
        self.memo = {}
        self.node_slot = {}
        self.pool = []
        self.profiles = {}
        self.prof = []
        self.pmoms = {}
        self.pm = []
        self.call_args = []
        self.callbacks = []

    def emit(self, op, a=-1, b=-1, ia=0, ib=0, fv=0.0, dedupe=True):
        key = (op, a, b, ia, ib, fv)
        if dedupe and key in self.memo:
            return self.memo[key]
        self.rows.append(key)
        slot = len(self.rows) - 1
        if dedupe:
            self.memo[key] = slot
        return slot

    def _pool_add(self, arr):
        off = len(self.pool)
        self.pool.extend(float(v) for v in arr)
        return off, len(arr)

    def profile_entry(self, moll, d):
        key = (id(moll), d)
        if key not in self.profiles:
            off, n = self._pool_add(moll.profile_poly(d))
            self.prof.append((off, n, moll.radius, d))
            self.profiles[key] = len(self.prof) - 1
        return self.profiles[key]

    def pmom_entry(self, moll, k):
        key = (id(moll), k)
        if key not in self.pmoms:
            off, n = self._pool_add(moll.moment_poly(k))
            cum, _ = self._pool_add(moll.cumulative_table(k))
            self.pm.append((off, n, cum, moll.radius, moll.radius ** (k + 1), moll.moment(k)))
            self.pmoms[key] = len(self.pm) - 1
        return self.pmoms[key]

    def call(self, fn, slots):
        off = len(self.call_args)
        self.call_args.extend(slots)
        self.callbacks.append(fn)
        return self.emit(CALL, ia=len(self.callbacks) - 1, b=off, ib=len(slots), dedupe=False)

    def powi(self, slot, n):
        if n == 1:
            return slot
        return self.emit(POWI, slot, ia=n)

    def compile(self, e):
        k = e.key
        hit = self.node_slot.get(k)
        if hit is not None:
            return hit
        slot = self._compile(e)
        self.node_slot[k] = slot
        return slot

    def _compile(self, e):
        if isinstance(e, Const):
            return self.emit(CONST, fv=e.value)
        if isinstance(e, Var):
            if e.index >= self.ndim:
                raise ValueError(f"coordinate x{e.index} outside a {self.ndim}-dimensional chart")
            return self.emit(VAR, ia=e.index)
        if isinstance(e, Eps):
            return self.emit(EPS)
        if isinstance(e, Add):
            slots = [self.compile(t) for t in e.terms]
            acc = slots[0]
            for s in slots[1:]:
                acc = self.emit(ADD, acc, s)
            return acc
        if isinstance(e, Mul):
            slots = [self.compile(f) for f in e.factors]
            acc = slots[0]
            for s in slots[1:]:
                acc = self.emit(MUL, acc, s)
            return acc
        if isinstance(e, Pow):
            base = self.compile(e.base)
            if float(e.exponent).is_integer():
                return self.emit(POWI, base, ia=int(e.exponent))
            return self.emit(POWR, base, fv=e.exponent)
        if isinstance(e, Div):
            return self.emit(DIV, self.compile(e.num), self.compile(e.den))
        if isinstance(e, Func):
            return self.emit(_FUNC_OPS[e.name], self.compile(e.arg))
        if isinstance(e, Poly):
            off, n = self._pool_add(e.coeffs)
            return self.emit(POLY, self.compile(e.arg), ia=off, ib=n)
        if isinstance(e, Bump):
            entry = self.profile_entry(bare_bump(), e.order)
            return self.emit(PROFILE, self.compile(e.arg), ia=entry)
        if isinstance(e, (Kernel, KMom, PVConv)):
            s = self.compile(e.scale)
            y = self.emit(DIV, self.compile(e.arg), s)
            if isinstance(e, Kernel):
                val = self.emit(PROFILE, y, ia=self.profile_entry(e.moll, e.order))
                return self.emit(MUL, val, self.powi(s, -1 - e.order))
            if isinstance(e, KMom):
                val = self.emit(PMOM, y, ia=self.pmom_entry(e.moll, e.k))
                if e.k == 0:
                    return val
                return self.emit(MUL, val, self.powi(s, e.k))
            moll, d = e.moll, e.order
            val = self.call(_PVCallback(moll, d), [y])
            return self.emit(MUL, val, self.powi(s, -1 - d))
        if isinstance(e, ConvDefect):
            slots = [self.compile(e.scale)] + [self.compile(a) for a in e.args]
            return self.call(_ConvDefectCallback(e.f, e.moll, e.axis, len(e.args)), slots)
        if isinstance(e, Partial):
            return self.compile(e.expand())
        raise TypeError(f"cannot compile node {type(e).__name__}")

    def finish(self, outputs):
        rows = self.rows
        i32 = lambda seq: np.ascontiguousarray(seq, dtype=np.int32)  # noqa: E731
        f64 = lambda seq: np.ascontiguousarray(seq, dtype=np.float64)  # noqa: E731
        prof = self.prof or [(0, 0, 1.0, 0)]
        pm = self.pm or [(0, 0, 0, 1.0, 1.0, 0.0)]
        return Tape(
            ndim=self.ndim,
            op=i32([r[0] for r in rows]), a=i32([r[1] for r in rows]), b=i32([r[2] for r in rows]),
            ia=i32([r[3] for r in rows]), ib=i32([r[4] for r in rows]), fv=f64([r[5] for r in rows]),
            outputs=i32(outputs), pool=f64(self.pool or [0.0]),
            prof_off=i32([p[0] for p in prof]), prof_len=i32([p[1] for p in prof]),
            prof_R=f64([p[2] for p in prof]), prof_d=i32([p[3] for p in prof]),
            pm_off=i32([p[0] for p in pm]), pm_len=i32([p[1] for p in pm]),
            pm_cum=i32([p[2] for p in pm]), pm_R=f64([p[3] for p in pm]),
            pm_scale=f64([p[4] for p in pm]), pm_total=f64([p[5] for p in pm]),
            call_args=i32(self.call_args or [0]), callbacks=self.callbacks,
        )


@lru_cache(maxsize=512)
def compile_exprs(exprs, ndim):
    """Compile a tuple of expressions into one tape with one output per expression."""
    b = _Builder(ndim)
    outs = [b.compile(e.expand()) for e in exprs]
    return b.finish(outs)


def evaluate(exprs, eps, X, ndim=None):
    """Evaluate expressions at ``eps`` and points ``X`` (shape ``(npts, ndim)``).

    Returns an array of shape ``(len(exprs), npts)``.
    """
    X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    if ndim is None:
        ndim = X.shape[1]
    tape = compile_exprs(tuple(exprs), ndim)
    return run(tape, float(eps), X)


def run(tape, eps, X):
    if _backend == "cython" and not tape.has_callbacks:
        return _ctape.eval_tape(tape, eps, X, GL_NODES, GL_WEIGHTS, N_PANELS)
    return _pytape.eval_tape(tape, eps, X, GL_NODES, GL_WEIGHTS, N_PANELS)


class _PVCallback:
    def __init__(self, moll, d):
        self.moll = moll
        self.d = d

    def __call__(self, eps, args):
        return self.moll.pv_values(self.d, args[0])


class _ConvDefectCallback:
    """Evaluates ``f * rho_s - f`` for smooth ``f``.

    For ``s R <= 0.1`` the Taylor series in ``s`` is summed with the moments
    that the construction sets to zero omitted (so cancellation never limits
    the result); otherwise the convolution is done by quadrature on the
    kernel's composite rule.
    """

    TAYLOR_LIMIT = 0.1
    TAYLOR_TERMS = 16

    def __init__(self, f, moll, axis, nargs):
        self.f = f
        self.moll = moll
        self.axis = axis
        self.nargs = nargs
        self._derivs = None

    def _derivative_exprs(self):
        if self._derivs is None:
            q = self.moll.q if self.moll.q is not None else 0
            top = q + self.TAYLOR_TERMS
            ds = [self.f.expand()]
            for _ in range(top):
                ds.append(ds[-1].diff(self.axis))
            self._derivs = ds
        return self._derivs

    def __call__(self, eps, args):
        from .mollifier import PANEL_NODES, PANEL_WEIGHTS

        scale = float(args[0][0])
        P = np.stack(args[1:], axis=1) if self.nargs else np.zeros((len(args[0]), 0))
        R = self.moll.radius
        if scale * R <= self.TAYLOR_LIMIT:
            ds = self._derivative_exprs()
            ks = [k for k in range(1, len(ds)) if self.moll.moment(k) != 0.0]
            if not ks:
                return np.zeros(P.shape[0])
            vals = evaluate(tuple(ds[k] for k in ks), eps, P, self.nargs)
            out = np.zeros(P.shape[0])
            for row, k in zip(vals, ks):
                out += (-scale) ** k * self.moll.moment(k) / math.factorial(k) * row
            return out
        z = (PANEL_NODES * R).ravel()
        w = (PANEL_WEIGHTS * R).ravel() * self.moll.value(z)
        base = evaluate((self.f,), eps, P, self.nargs)[0]
        shifted = np.repeat(P, len(z), axis=0)
        shifted[:, self.axis] -= np.tile(scale * z, P.shape[0])
        vals = evaluate((self.f,), eps, shifted, self.nargs)[0].reshape(P.shape[0], len(z))
        return (vals - base[:, None]) @ w
