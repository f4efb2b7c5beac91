"""Adaptive ODE integration with refinement inside kernel windows.

Right-hand sides built from regularized distributions vary on the scale of
the kernel support.  The integration is split into segments: outside every
window the step size is free; once a trajectory enters a window (``|s| < 2``
in units of the half width) the maximal step is capped until it leaves again
(``|s| > 3``).  The two thresholds differ so segment boundaries cannot
chatter.  Leaving the chart ends the integration with a truncation flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

ENTER = 2.0
LEAVE = 3.0
MAX_SEGMENTS = 10_000


@dataclass(frozen=True)
class Window:
    """Band ``|y[index] - center| < half`` of the state (wrapped to ``[-pi, pi)`` if periodic)."""

    index: int
    center: float
    half: float
    periodic: bool = False
    max_step: float | None = None

    def signed(self, y):
        d = y[self.index] - self.center
        if self.periodic:
            d = (d + math.pi) % (2.0 * math.pi) - math.pi
        return d / self.half

    def offset(self, y):
        return abs(self.signed(y))

    @property
    def step(self):
        return self.max_step if self.max_step is not None else self.half / 10.0


@dataclass
class OdeResult:
    """Piecewise dense solution on ``[t0, t_end]``."""

    t0: float
    t_end: float
    t: np.ndarray
    y: np.ndarray
    truncated: bool = False
    message: str = ""
    nfev: int = 0
    segments: list = field(default_factory=list, repr=False)

    def __call__(self, t):
        """State at time(s) ``t`` (shape ``(n,)`` for scalar ``t``, else ``(n, len(t))``)."""
        scalar = np.ndim(t) == 0
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = sorted((self.t0, self.t_end))
        if np.any(ts < lo - 1e-12) or np.any(ts > hi + 1e-12):
            raise ValueError(f"time outside the solved interval [{lo}, {hi}]")
        out = np.empty((self.y.shape[0], len(ts)))
        starts = np.array([s[0] for s in self.segments])
        forward = self.t_end >= self.t0
        for k, tk in enumerate(ts):
            if forward:
                j = int(np.searchsorted(starts, tk, side="right")) - 1
            else:
                j = int(np.searchsorted(-starts, -tk, side="right")) - 1
            j = min(max(j, 0), len(self.segments) - 1)
            out[:, k] = self.segments[j][2](tk)
        return out[:, 0] if scalar else out


def _band_events(windows, level):
    """Terminal events at ``s = +-level`` for every window.

    Signed offsets change sign even when one step jumps across a whole
    window, so no crossing is missed.  Periodic windows use
    ``sin(y - center -+ level*half)``, which has no wrap discontinuity; its
    extra zeros at the antipode only start a new segment, since the mode is
    re-evaluated after every stop.
    """
    events = []
    for w in windows:
        for sign in (1.0, -1.0):
            if w.periodic:
                def ev(t, y, w=w, sign=sign):
                    return math.sin(y[w.index] - w.center - sign * level * w.half)
            else:
                def ev(t, y, w=w, sign=sign):
                    return w.signed(y) - sign * level
            ev.terminal = True
            events.append(ev)
    return events


def integrate(rhs, t_span, y0, windows=(), rtol=1e-10, atol=1e-12, in_chart=None):
    """Integrate ``y' = rhs(t, y)`` over ``t_span`` with DOP853.

    ``windows`` is a sequence of :class:`Window`; ``in_chart(y)`` returns a
    signed margin (positive inside the chart), and a zero crossing ends the
    integration with ``truncated=True``.
    """
    t0, t1 = map(float, t_span)
    y = np.asarray(y0, dtype=float).copy()
    direction = 1.0 if t1 >= t0 else -1.0
    windows = tuple(windows)
    ts, ys, segments = [t0], [y.copy()], []
    nfev = 0
    t = t0
    truncated, message = False, "completed"
    near = _band_events(windows, ENTER)
    far = _band_events(windows, LEAVE)

    def exit_event(tt, yy):
        return in_chart(yy)

    exit_event.terminal, exit_event.direction = True, -1
    slack = 1e-6
    # periodic event functions only detect crossings within half a period
    outside_step = 1.0 if any(w.periodic for w in windows) else np.inf
    inside = any(w.offset(y) < ENTER for w in windows)
    for _ in range(MAX_SEGMENTS):
        if (t1 - t) * direction <= 0:
            break
        # an event sitting at its zero at the segment start would stop it at once
        events = [ev for ev in (far if inside else near) if abs(ev(t, y)) > 1e-9]
        max_step = min(w.step for w in windows) if inside else outside_step
        if in_chart is not None:
            events.append(exit_event)
        sol = solve_ivp(rhs, (t, t1), y, method="DOP853", rtol=rtol, atol=atol,
                        dense_output=True, events=events or None, max_step=max_step)
        nfev += sol.nfev
        left = sol.status == 1 and in_chart is not None and len(sol.t_events[-1]) > 0
        if sol.status == 1 and not inside:
            # the step that found the event may have sampled the window already,
            # which spoils its interpolant; redo the approach ending at the event
            t_ev = float(sol.t[-1])
            if (t_ev - t) * direction > 0:
                sol = solve_ivp(rhs, (t, t_ev), y, method="DOP853", rtol=rtol, atol=atol,
                                dense_output=True, events=events or None,
                                max_step=min(max_step, abs(t_ev - t) / 4))
                nfev += sol.nfev
                if sol.status == 0:
                    sol.status = 1
                else:
                    left = in_chart is not None and len(sol.t_events[-1]) > 0
        if sol.status == -1:
            truncated, message = True, f"integrator failure: {sol.message}"
            break
        t_new = float(sol.t[-1])
        segments.append((t, t_new, sol.sol))
        ts.extend(sol.t[1:].tolist())
        ys.extend(sol.y[:, 1:].T)
        t, y = t_new, sol.y[:, -1].copy()
        if sol.status != 1:
            continue
        if left:
            truncated, message = True, f"trajectory left the chart at t={t_new:.17g}"
            break
        if inside:
            inside = any(w.offset(y) < LEAVE - slack for w in windows)
        else:
            inside = any(w.offset(y) < ENTER + slack for w in windows)
    else:
        truncated, message = True, "segment limit reached"
    return OdeResult(t0, t, np.array(ts), np.array(ys).T, truncated, message, nfev, segments)
