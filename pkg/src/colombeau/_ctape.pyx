# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluator for expression tapes.

Mirrors ``_pytape.eval_tape`` instruction for instruction, but loops over
points in C with one scratch register file per point.  Tapes with Python
callbacks are never sent here.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, exp, log, pow, floor, fabs, NAN

cnp.import_array()

DEF CONST = 0
DEF VAR = 1
DEF EPS = 2
DEF ADD = 3
DEF SUB = 4
DEF MUL = 5
DEF DIV = 6
DEF NEG = 7
DEF POWI = 8
DEF POWR = 9
DEF SIN = 10
DEF COS = 11
DEF EXP = 12
DEF LOG = 13
DEF PROFILE = 14
DEF PMOM = 15
DEF POLY = 16


cdef inline double horner(const double* c, int n, double x) nogil:
    cdef double out = c[n - 1]
    cdef int k
    for k in range(n - 2, -1, -1):
        out = out * x + c[k]
    return out


cdef inline double powi(double x, int n) nogil:
    cdef double out = 1.0
    cdef int m = n if n >= 0 else -n
    while m:
        if m & 1:
            out *= x
        x *= x
        m >>= 1
    return out if n >= 0 else 1.0 / out


def eval_tape(tape, double eps, double[:, ::1] X, double[::1] gl_nodes,
              double[::1] gl_weights, int n_panels):
    cdef int[::1] op = tape.op
    cdef int[::1] a = tape.a
    cdef int[::1] b = tape.b
    cdef int[::1] ia = tape.ia
    cdef int[::1] ib = tape.ib
    cdef double[::1] fv = tape.fv
    cdef int[::1] outputs = tape.outputs
    cdef double[::1] pool = tape.pool
    cdef int[::1] prof_off = tape.prof_off
    cdef int[::1] prof_len = tape.prof_len
    cdef double[::1] prof_R = tape.prof_R
    cdef int[::1] prof_d = tape.prof_d
    cdef int[::1] pm_off = tape.pm_off
    cdef int[::1] pm_len = tape.pm_len
    cdef int[::1] pm_cum = tape.pm_cum
    cdef double[::1] pm_R = tape.pm_R
    cdef double[::1] pm_scale = tape.pm_scale
    cdef double[::1] pm_total = tape.pm_total

    cdef int ninstr = op.shape[0]
    cdef int nout = outputs.shape[0]
    cdef Py_ssize_t npts = X.shape[0]
    cdef int ngl = gl_nodes.shape[0]
    cdef cnp.ndarray[double, ndim=2] result = np.empty((nout, npts))
    cdef double[:, ::1] res = result
    cdef double[::1] reg = np.empty(max(ninstr, 1))
    cdef const double* pp = &pool[0]

    cdef Py_ssize_t p
    cdef int i, e, j, g, o
    cdef double s, gap, h, left, half, acc, node, v

    with nogil:
        for p in range(npts):
            for i in range(ninstr):
                o = op[i]
                if o == CONST:
                    v = fv[i]
                elif o == VAR:
                    v = X[p, ia[i]]
                elif o == EPS:
                    v = eps
                elif o == ADD:
                    v = reg[a[i]] + reg[b[i]]
                elif o == SUB:
                    v = reg[a[i]] - reg[b[i]]
                elif o == MUL:
                    v = reg[a[i]] * reg[b[i]]
                elif o == DIV:
                    v = reg[a[i]] / reg[b[i]]
                elif o == NEG:
                    v = -reg[a[i]]
                elif o == POWI:
                    v = powi(reg[a[i]], ia[i])
                elif o == POWR:
                    v = pow(reg[a[i]], fv[i])
                elif o == SIN:
                    v = sin(reg[a[i]])
                elif o == COS:
                    v = cos(reg[a[i]])
                elif o == EXP:
                    v = exp(reg[a[i]])
                elif o == LOG:
                    v = log(reg[a[i]])
                elif o == POLY:
                    v = horner(pp + ia[i], ib[i], reg[a[i]])
                elif o == PROFILE:
                    e = ia[i]
                    s = reg[a[i]] / prof_R[e]
                    if fabs(s) < 1.0:
                        gap = 1.0 - s * s
                        v = horner(pp + prof_off[e], prof_len[e], s) * exp(-1.0 / gap) / powi(gap, 2 * prof_d[e])
                    else:
                        v = 0.0
                elif o == PMOM:
                    e = ia[i]
                    s = reg[a[i]] / pm_R[e]
                    if s <= -1.0:
                        v = 0.0
                    elif s >= 1.0:
                        v = pm_total[e]
                    else:
                        h = 2.0 / n_panels
                        j = <int>floor((s + 1.0) / h)
                        if j > n_panels - 1:
                            j = n_panels - 1
                        left = -1.0 + j * h
                        half = 0.5 * (s - left)
                        acc = 0.0
                        for g in range(ngl):
                            node = left + half * (gl_nodes[g] + 1.0)
                            if fabs(node) < 1.0:
                                acc += gl_weights[g] * horner(pp + pm_off[e], pm_len[e], node) * exp(-1.0 / (1.0 - node * node))
                        v = pp[pm_cum[e] + j] + half * acc * pm_scale[e]
                else:
                    v = NAN
                reg[i] = v
            for j in range(nout):
                res[j, p] = reg[outputs[j]]
    return result
