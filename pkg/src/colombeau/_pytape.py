"""Numpy evaluator for compiled tapes (fallback for the Cython core)."""

import numpy as np

(CONST, VAR, EPS, ADD, SUB, MUL, DIV, NEG, POWI, POWR, SIN, COS, EXP, LOG,
 PROFILE, PMOM, POLY, CALL) = range(18)


def _horner(coef, x):
    out = np.full_like(x, coef[-1])
    for c in coef[-2::-1]:
        out = out * x + c
    return out


def _bump(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(-1.0 / (1.0 - si * si))
    return out


def eval_tape(tape, eps, X, gl_nodes, gl_weights, n_panels):
    npts = X.shape[0]
    pool = tape.pool
    slots = []
    op, a, b, ia, ib, fv = tape.op, tape.a, tape.b, tape.ia, tape.ib, tape.fv
    with np.errstate(all="ignore"):
        for i in range(len(op)):
            o = op[i]
            if o == CONST:
                v = np.full(npts, fv[i])
            elif o == VAR:
                v = X[:, ia[i]].copy()
            elif o == EPS:
                v = np.full(npts, eps)
            elif o == ADD:
                v = slots[a[i]] + slots[b[i]]
            elif o == SUB:
                v = slots[a[i]] - slots[b[i]]
            elif o == MUL:
                v = slots[a[i]] * slots[b[i]]
            elif o == DIV:
                v = slots[a[i]] / slots[b[i]]
            elif o == NEG:
                v = -slots[a[i]]
            elif o == POWI:
                n = int(ia[i])
                base = slots[a[i]]
                v = base ** n if n >= 0 else 1.0 / base ** (-n)
            elif o == POWR:
                v = slots[a[i]] ** fv[i]
            elif o == SIN:
                v = np.sin(slots[a[i]])
            elif o == COS:
                v = np.cos(slots[a[i]])
            elif o == EXP:
                v = np.exp(slots[a[i]])
            elif o == LOG:
                v = np.log(slots[a[i]])
            elif o == POLY:
                v = _horner(pool[ia[i]:ia[i] + ib[i]], slots[a[i]])
            elif o == PROFILE:
                e = ia[i]
                s = slots[a[i]] / tape.prof_R[e]
                coef = pool[tape.prof_off[e]:tape.prof_off[e] + tape.prof_len[e]]
                d = tape.prof_d[e]
                v = np.zeros(npts)
                inside = np.abs(s) < 1.0
                si = s[inside]
                gap = 1.0 - si * si
                v[inside] = _horner(coef, si) * np.exp(-1.0 / gap - 2 * d * np.log(gap))
            elif o == PMOM:
                e = ia[i]
                s = slots[a[i]] / tape.pm_R[e]
                coef = pool[tape.pm_off[e]:tape.pm_off[e] + tape.pm_len[e]]
                cum = pool[tape.pm_cum[e]:tape.pm_cum[e] + n_panels + 1]
                v = np.zeros(npts)
                v[s >= 1.0] = tape.pm_total[e]
                inside = np.abs(s) < 1.0
                if np.any(inside):
                    si = s[inside]
                    h = 2.0 / n_panels
                    j = np.minimum(np.floor((si + 1.0) / h).astype(int), n_panels - 1)
                    left = -1.0 + j * h
                    half = 0.5 * (si - left)
                    nodes = left[:, None] + half[:, None] * (gl_nodes + 1.0)
                    vals = _horner(coef, nodes) * _bump(nodes)
                    v[inside] = cum[j] + half * (vals @ gl_weights) * tape.pm_scale[e]
            elif o == CALL:
                args = [slots[k] for k in tape.call_args[b[i]:b[i] + ib[i]]]
                v = np.asarray(tape.callbacks[ia[i]](eps, args), dtype=float)
            else:  # pragma: no cover
                raise ValueError(f"bad opcode {o}")
            slots.append(v)
    return np.array([slots[k] for k in tape.outputs]).reshape(len(tape.outputs), npts)
