"""Time steppers: Dormand-Prince 5(4) with PI control and implicit midpoint.

The steppers operate on complex arrays of any shape.  :func:`solve` runs a
single (possibly stacked) system with one shared step size and supports
terminal events refined by bisection.  :func:`solve_batch` advances many
independent systems with individual step sizes; every member's arithmetic
is elementwise, so its result does not depend on which other members share
the batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

_SAFE = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0


@dataclass
class IntegratorOptions:
    """Settings shared by all integration entry points.

    Attributes
    ----------
    method : str
        ``"dopri54"`` (adaptive) or ``"implicit_midpoint"`` (fixed step).
    rtol, atol : float
        Error tolerances of the adaptive method.
    delta_stop : float
        Collision threshold on the minimal separation.
    step : float
        Step size of the implicit midpoint rule.
    h0 : float or None
        Initial step of the adaptive method; chosen automatically if None.
    h_min : float
        Step sizes below ``h_min * max(1, |t|)`` end the run (stiffness).
    max_steps : int
        Hard cap on accepted plus rejected steps.
    event_tol : float
        Width of the bracketing interval at which event bisection stops.
    """

    method: str = "dopri54"
    rtol: float = 1e-10
    atol: float = 1e-12
    delta_stop: float = 1e-4
    step: float = 1e-3
    h0: float | None = None
    h_min: float = 1e-14
    max_steps: int = 5_000_000
    event_tol: float = 1e-10

    def to_dict(self):
        return dict(self.__dict__)


def dp_step(f, y, h, k1):
    """One Dormand-Prince step.

    ``h`` is a scalar or an array broadcastable against ``y``.  Returns the
    fifth-order solution, the embedded error estimate and ``f`` at the new
    point (first-same-as-last).
    """
    ks = [k1]
    for i in range(1, 7):
        acc = y
        for j, a in enumerate(_A[i]):
            if a != 0.0:
                acc = acc + (h * a) * ks[j]
        ks.append(f(acc))
        if i == 6:
            y_new = acc
    err = sum((h * e) * k for e, k in zip(_E, ks) if e != 0.0)
    return y_new, err, ks[6]


def error_norm(err, y, y_new, rtol, atol, axis=None):
    scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
    r = np.abs(err) / scale
    return np.sqrt(np.mean(r * r, axis=axis))


def midpoint_step(f, y, h, tol=1e-14, max_iter=200):
    """Implicit midpoint step solved by fixed-point iteration.

    Returns ``(y_new, converged)``.
    """
    y_new = y + h * f(y)
    for _ in range(max_iter):
        nxt = y + h * f(0.5 * (y + y_new))
        delta = np.max(np.abs(nxt - y_new))
        y_new = nxt
        if delta <= tol * (1.0 + np.max(np.abs(y_new))):
            return y_new, True
    return y_new, False


def initial_step(f, y, f0, rtol, atol, order=5):
    """Starting step heuristic (Hairer, Norsett & Wanner)."""
    scale = atol + rtol * np.abs(y)
    d0 = np.sqrt(np.mean((np.abs(y) / scale) ** 2))
    d1 = np.sqrt(np.mean((np.abs(f0) / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = f(y + h0 * f0)
    d2 = np.sqrt(np.mean((np.abs(f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (order + 1))
    return min(100 * h0, h1)


@dataclass
class Event:
    """Terminal event: fires when ``fn(y) >= 0``.

    ``fn`` returns a float; the first event (in list order) among those
    crossing earliest is reported.
    """

    name: str
    fn: object


@dataclass
class SolveResult:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    status: str = "horizon_reached"
    event: str | None = None
    event_time: float | None = None
    steps: int = 0
    rejected: int = 0


def _events_fired(events, y):
    return [ev for ev in events if ev.fn(y) >= 0.0]


def _bisect_event(ev, advance, lo=0.0, hi=1.0, width=1.0, tol=1e-10):
    """Shrink ``[lo, hi]`` (fractions of a step of length ``width``) around
    the first crossing of ``ev``; ``advance(theta)`` returns the state."""
    while (hi - lo) * width > tol:
        mid = 0.5 * (lo + hi)
        if ev.fn(advance(mid)) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def solve(f, y0, t_end, opts: IntegratorOptions, events=(), record=None, t0=0.0):
    """Integrate ``y' = f(y)`` from ``t0`` to ``t_end`` (may be negative direction).

    Parameters
    ----------
    record : callable, optional
        ``record(t, y)`` is called at ``t0`` and after every accepted step
        (and at a terminal event).
    events : sequence of Event
        Terminal events; a crossing inside a step is located by bisection.

    Returns
    -------
    SolveResult
    """
    res = SolveResult()
    y = np.array(y0, dtype=np.complex128)
    t = float(t0)
    direction = 1.0 if t_end >= t0 else -1.0

    def keep(tt, yy):
        res.times.append(tt)
        res.states.append(yy)
        if record is not None:
            record(tt, yy)

    keep(t, y)
    fired = _events_fired(events, y)
    if fired:
        res.status, res.event, res.event_time = "event", fired[0].name, t
        return res
    if t_end == t0:
        return res

    method = opts.method
    if method not in ("dopri54", "implicit_midpoint"):
        raise ValueError(f"unknown integration method {method!r}")

    k1 = f(y)
    if method == "dopri54":
        h = opts.h0 if opts.h0 else initial_step(f, y, k1, opts.rtol, opts.atol)
    else:
        h = opts.step
    h = abs(h)
    facold = 1e-4
    n_steps = 0
    while direction * (t_end - t) > 0.0:
        if n_steps >= opts.max_steps:
            res.status, res.event, res.event_time = "event", "max_steps", t
            return res
        if h < opts.h_min * max(1.0, abs(t)):
            res.status, res.event, res.event_time = "event", "stiffness", t
            return res
        last = h >= direction * (t_end - t)
        hs = (t_end - t) if last else direction * h
        n_steps += 1
        if method == "dopri54":
            y_new, err, k7 = dp_step(f, y, hs, k1)
            en = error_norm(err, y, y_new, opts.rtol, opts.atol)
            if not np.isfinite(en):
                en = 1e10
            fac11 = en**_EXPO if en > 0 else 0.0
            if en > 1.0:
                res.rejected += 1
                h = abs(hs) / min(1.0 / _FAC_MIN, fac11 / _SAFE)
                continue
            fac = fac11 / facold**_BETA
            fac = max(1.0 / _FAC_MAX, min(1.0 / _FAC_MIN, fac / _SAFE))
            h_next = abs(hs) / fac
            facold = max(en, 1e-4)

            def advance(theta, y=y, k1=k1, hs=hs):
                return dp_step(f, y, theta * hs, k1)[0]

        else:
            y_new, ok = midpoint_step(f, y, hs)
            if not ok:
                res.status, res.event, res.event_time = "event", "stiffness", t
                return res
            k7 = None
            h_next = h

            def advance(theta, y=y, hs=hs):
                return midpoint_step(f, y, theta * hs)[0]

        fired = _events_fired(events, y_new)
        if fired:
            best = None
            for ev in fired:
                theta = _bisect_event(ev, advance, width=abs(hs), tol=opts.event_tol)
                if best is None or theta < best[0]:
                    best = (theta, ev)
            theta, ev = best
            t_ev = t + theta * hs
            y_ev = advance(theta)
            keep(t_ev, y_ev)
            res.steps = n_steps
            res.status, res.event, res.event_time = "event", ev.name, t_ev
            return res
        t = t_end if last else t + hs
        y = y_new
        if method == "dopri54":
            k1 = k7
        else:
            k1 = None
        keep(t, y)
        h = h_next
        if method == "implicit_midpoint":
            k1 = f(y)
    res.steps = n_steps
    return res


@dataclass
class BatchResult:
    """Per-member outcome of :func:`solve_batch`."""

    final: np.ndarray
    t_final: np.ndarray
    min_monitor: np.ndarray
    status: np.ndarray
    steps: np.ndarray


def solve_batch(f, y0, t_end, opts: IntegratorOptions, monitor, stop_below, max_steps=None):
    """Integrate independent systems ``y0[b]`` with individual step sizes.

    ``f`` maps arrays of shape ``(B, n)`` to the same shape and must act
    row by row.  ``monitor(y)`` returns one float per row; its running
    minimum over accepted steps is reported, and rows whose monitor falls
    below ``stop_below`` are halted.

    Status codes: 0 horizon reached, 1 monitor below threshold, 2 step-size
    underflow, 3 step cap reached.
    """
    y = np.array(y0, dtype=np.complex128)
    B = y.shape[0]
    max_steps = opts.max_steps if max_steps is None else max_steps
    t = np.zeros(B)
    mins = np.asarray(monitor(y), dtype=float).copy()
    status = np.full(B, -1, dtype=np.int8)
    steps = np.zeros(B, dtype=np.int64)
    status[mins < stop_below] = 1
    act = np.flatnonzero(status < 0)
    if act.size == 0:
        return BatchResult(y, t, mins, status, steps)
    k1 = f(y[act])
    h = np.empty(B)
    for i, b in enumerate(act):
        h[b] = opts.h0 or initial_step(f, y[b : b + 1], k1[i : i + 1], opts.rtol, opts.atol)
    facold = np.full(B, 1e-4)
    kbuf = np.zeros_like(y)
    kbuf[act] = k1
    while act.size:
        ya = y[act]
        hs = np.minimum(h[act], t_end - t[act])
        y_new, err, k7 = dp_step(f, ya, hs[:, None], kbuf[act])
        en = error_norm(err, ya, y_new, opts.rtol, opts.atol, axis=1)
        en = np.where(np.isfinite(en), en, 1e10)
        steps[act] += 1
        fac11 = np.where(en > 0, en, 0.0) ** _EXPO
        ok = en <= 1.0
        # rejected members shrink the step
        h_rej = hs / np.minimum(1.0 / _FAC_MIN, fac11 / _SAFE)
        fac = fac11 / facold[act] ** _BETA
        fac = np.clip(fac / _SAFE, 1.0 / _FAC_MAX, 1.0 / _FAC_MIN)
        h_acc = hs / fac
        acc = act[ok]
        if acc.size:
            y[acc] = y_new[ok]
            kbuf[acc] = k7[ok]
            last = hs[ok] >= t_end - t[acc]
            t[acc] = np.where(last, t_end, t[acc] + hs[ok])
            facold[acc] = np.maximum(en[ok], 1e-4)
            m = np.asarray(monitor(y_new[ok]), dtype=float)
            mins[acc] = np.minimum(mins[acc], m)
            status[acc[m < stop_below]] = 1
            done = (t[acc] >= t_end) & (status[acc] < 0)
            status[acc[done]] = 0
        h[act] = np.where(ok, h_acc, h_rej)
        tiny = (h[act] < opts.h_min * np.maximum(1.0, t[act])) & (status[act] < 0)
        status[act[tiny]] = 2
        capped = (steps[act] >= max_steps) & (status[act] < 0)
        status[act[capped]] = 3
        act = act[status[act] < 0]
    return BatchResult(y, t, mins, status, steps)
