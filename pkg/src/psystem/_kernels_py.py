"""Pure-Python kernels; reference implementation and fallback for ``_kernels``.

Both modules expose the same functions with the same arguments.  Fields are
passed as stacked frame arrays ``U[nt, nx]`` with their x-derivatives
``UX[nt, nx]``: cubic Hermite interpolation in x on the unit circle, linear in
time between frames.  ``d1`` and ``d2`` are sigma' and sigma'' given as either
coefficient arrays (``numpy.polyval`` order) or scalar callables.
"""
from __future__ import annotations

import math
from bisect import bisect_right

FIELD_EDGE = 0
BOUNDARY_HIT = 1
BLOW_UP = 2
STEP_FAILURE = 3

BACKEND = "python"


def _as_func(c):
    if callable(c):
        return lambda u: float(c(u))
    coeffs = [float(a) for a in c]

    def horner(u):
        acc = 0.0
        for a in coeffs:
            acc = acc * u + a
        return acc
    return horner


def _hermite_row(row, drow, n, x):
    s = x * n
    j = math.floor(s)
    th = s - j
    j0 = j % n
    j1 = (j0 + 1) % n
    h = 1.0 / n
    th2 = th * th
    th3 = th2 * th
    return ((2 * th3 - 3 * th2 + 1) * row[j0] + (th3 - 2 * th2 + th) * h * drow[j0]
            + (-2 * th3 + 3 * th2) * row[j1] + (th3 - th2) * h * drow[j1])


def _locate(times, t):
    nt = len(times)
    if nt == 1:
        return 0, 0.0
    i = bisect_right(times, t) - 1
    if i < 0:
        i = 0
    if i > nt - 2:
        i = nt - 2
    w = (t - times[i]) / (times[i + 1] - times[i])
    return i, w


def interp(times, U, UX, t, x):
    """Value of the interpolated field at ``(t, x)``."""
    n = len(U[0])
    i, w = _locate(times, t)
    a = _hermite_row(U[i], UX[i], n, x)
    if w == 0.0:
        return a
    b = _hermite_row(U[i + 1], UX[i + 1], n, x)
    return (1.0 - w) * a + w * b


def trace(times, U, UX, d1, d2, anchor, orient, sign, t0, x0, z0, dt,
          t_stop, eps_par, dt_min, eps_den, max_steps):
    """RK4 integration of a characteristic with its Riccati data.

    The augmented state is ``(x, K, Z)`` with ``x' = sign sqrt(-sigma'(u))``,
    ``K' = k(u)`` and ``Z' = -k(u) Z**2``.  ``dt`` carries the time direction.
    Returns ``(ts, xs, us, Ks, Zs, status, t_event)``.
    """
    times = [float(t) for t in times]
    U = [list(map(float, r)) for r in U]
    UX = [list(map(float, r)) for r in UX]
    f1 = _as_func(d1)
    f2 = _as_func(d2)
    n = len(U[0])

    def rhs(t, x, Z):
        i, w = _locate(times, t)
        u = _hermite_row(U[i], UX[i], n, x)
        if w != 0.0:
            u = (1.0 - w) * u + w * _hermite_row(U[i + 1], UX[i + 1], n, x)
        m = -f1(u)
        if m <= eps_par or orient * (u - anchor) <= 0.0:
            return None
        k = -f2(u) / (4.0 * m ** 1.25)
        return sign * math.sqrt(m), k, -k * Z * Z, u

    t, x, K, Z = float(t0), float(x0), 0.0, float(z0)
    first = rhs(t, x, Z)
    if first is None:
        return [t], [x], [math.nan], [0.0], [Z], BOUNDARY_HIT, t
    ts, xs, us, Ks, Zs = [t], [x], [first[3]], [K], [Z]
    direction = 1.0 if dt > 0 else -1.0
    nominal = abs(dt)
    h = nominal
    status = FIELD_EDGE
    t_event = t
    for _ in range(max_steps):
        remaining = direction * (t_stop - t)
        if remaining <= 1e-14 * max(1.0, abs(t_stop)):
            status, t_event = FIELD_EDGE, t
            break
        h = min(h, remaining)
        while True:
            s = direction * h
            k1 = rhs(t, x, Z)
            k2 = k1 and rhs(t + 0.5 * s, x + 0.5 * s * k1[0], Z + 0.5 * s * k1[2])
            k3 = k2 and rhs(t + 0.5 * s, x + 0.5 * s * k2[0], Z + 0.5 * s * k2[2])
            k4 = k3 and rhs(t + s, x + s * k3[0], Z + s * k3[2])
            end = k4 and rhs(t + s, x + s / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]), Z)
            if end is not None:
                break
            h *= 0.5
            if h < dt_min:
                break
        if end is None:
            status, t_event = BOUNDARY_HIT, t
            break
        xn = x + s / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        Kn = K + s / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        Zn = Z + s / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        tn = t + s
        if not (math.isfinite(xn) and math.isfinite(Kn)):
            status, t_event = STEP_FAILURE, t
            break
        if z0 != 0.0:
            Dp = 1.0 + z0 * K
            Dn = 1.0 + z0 * Kn
            if Dn <= eps_den:
                frac = (Dp - eps_den) / (Dp - Dn) if Dp != Dn else 1.0
                t_event = t + frac * s
                status = BLOW_UP
                t, x, K, Z = tn, xn, Kn, Zn
                ts.append(t); xs.append(x); us.append(end[3]); Ks.append(K); Zs.append(Z)
                break
        t, x, K, Z = tn, xn, Kn, Zn
        ts.append(t); xs.append(x); us.append(end[3]); Ks.append(K); Zs.append(Z)
        h = min(2.0 * h, nominal)
    else:
        status, t_event = STEP_FAILURE, t
    return ts, xs, us, Ks, Zs, status, t_event


def flow(times, G, GX, period, t0, x0, p0, dt, n_steps):
    """RK4 for ``x' = p, p' = -u_x`` over a gridded potential gradient.

    ``G`` holds the rows of ``u_x`` and ``GX`` those of ``u_xx`` (the Hermite
    slopes for ``G``).  ``period > 0`` wraps time into the frame span.
    Returns ``(ts, xs, ps, ok)``.
    """
    times = [float(t) for t in times]
    G = [list(map(float, r)) for r in G]
    GX = [list(map(float, r)) for r in GX]
    n = len(G[0])
    base = times[0]

    def force(t, x):
        if period > 0.0:
            t = base + (t - base) % period
        i, w = _locate(times, t)
        g = _hermite_row(G[i], GX[i], n, x)
        if w != 0.0:
            g = (1.0 - w) * g + w * _hermite_row(G[i + 1], GX[i + 1], n, x)
        return -g

    t, x, p = float(t0), float(x0), float(p0)
    ts, xs, ps = [t], [x], [p]
    for _ in range(n_steps):
        a1 = force(t, x)
        a2 = force(t + 0.5 * dt, x + 0.5 * dt * p)
        a3 = force(t + 0.5 * dt, x + 0.5 * dt * (p + 0.5 * dt * a1))
        a4 = force(t + dt, x + dt * (p + 0.5 * dt * a2))
        x = x + dt / 6.0 * (p + 2 * (p + 0.5 * dt * a1) + 2 * (p + 0.5 * dt * a2) + (p + dt * a3))
        p = p + dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        t = t0 + len(ts) * dt
        if not (math.isfinite(x) and math.isfinite(p)):
            return ts, xs, ps, False
        ts.append(t); xs.append(x); ps.append(p)
    return ts, xs, ps, True
