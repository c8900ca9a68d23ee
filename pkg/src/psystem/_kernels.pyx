# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: characteristic tracing and Hamiltonian flow on gridded fields.

Mirror of ``_kernels_py`` (same arguments, same algorithm); sigma' and sigma''
must be given as polynomial coefficient arrays here.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt, pow, fabs, isfinite, fmod, NAN

cnp.import_array()

cdef enum:
    C_FIELD_EDGE = 0
    C_BOUNDARY_HIT = 1
    C_BLOW_UP = 2
    C_STEP_FAILURE = 3

FIELD_EDGE = C_FIELD_EDGE
BOUNDARY_HIT = C_BOUNDARY_HIT
BLOW_UP = C_BLOW_UP
STEP_FAILURE = C_STEP_FAILURE

BACKEND = "cython"


cdef inline double _horner(const double[::1] c, double u) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(c.shape[0]):
        acc = acc * u + c[i]
    return acc


cdef inline double _hermite(const double[:, ::1] R, const double[:, ::1] D,
                            Py_ssize_t row, Py_ssize_t n, double x) noexcept nogil:
    cdef double s = x * n
    cdef double jf = floor(s)
    cdef double th = s - jf
    cdef long j0 = (<long>jf) % n
    if j0 < 0:
        j0 += n
    cdef long j1 = (j0 + 1) % n
    cdef double h = 1.0 / n
    cdef double th2 = th * th
    cdef double th3 = th2 * th
    return ((2 * th3 - 3 * th2 + 1) * R[row, j0] + (th3 - 2 * th2 + th) * h * D[row, j0]
            + (-2 * th3 + 3 * th2) * R[row, j1] + (th3 - th2) * h * D[row, j1])


cdef inline Py_ssize_t _locate(const double[::1] times, double t, double* w) noexcept nogil:
    cdef Py_ssize_t nt = times.shape[0]
    cdef Py_ssize_t lo, hi, mid
    if nt == 1:
        w[0] = 0.0
        return 0
    # bisect_right(times, t) - 1, clipped to [0, nt - 2]
    lo = 0
    hi = nt
    while lo < hi:
        mid = (lo + hi) // 2
        if t < times[mid]:
            hi = mid
        else:
            lo = mid + 1
    lo -= 1
    if lo < 0:
        lo = 0
    if lo > nt - 2:
        lo = nt - 2
    w[0] = (t - times[lo]) / (times[lo + 1] - times[lo])
    return lo


cdef inline double _sample(const double[::1] times, const double[:, ::1] U,
                           const double[:, ::1] UX, Py_ssize_t n,
                           double t, double x) noexcept nogil:
    cdef double w
    cdef Py_ssize_t i = _locate(times, t, &w)
    cdef double a = _hermite(U, UX, i, n, x)
    if w == 0.0:
        return a
    return (1.0 - w) * a + w * _hermite(U, UX, i + 1, n, x)


def interp(times, U, UX, double t, double x):
    cdef const double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef const double[:, ::1] Uv = np.ascontiguousarray(U, dtype=np.float64)
    cdef const double[:, ::1] UXv = np.ascontiguousarray(UX, dtype=np.float64)
    return _sample(tv, Uv, UXv, Uv.shape[1], t, x)


cdef struct Rhs:
    double dx
    double k
    double dz
    double u
    int ok


cdef inline Rhs _rhs(const double[::1] times, const double[:, ::1] U, const double[:, ::1] UX,
                     Py_ssize_t n, const double[::1] c1, const double[::1] c2,
                     double anchor, double orient, double sign, double eps_par,
                     double t, double x, double Z) noexcept nogil:
    cdef Rhs r
    cdef double u = _sample(times, U, UX, n, t, x)
    cdef double m = -_horner(c1, u)
    r.u = u
    if m <= eps_par or orient * (u - anchor) <= 0.0:
        r.ok = 0
        return r
    r.ok = 1
    r.k = -_horner(c2, u) / (4.0 * pow(m, 1.25))
    r.dx = sign * sqrt(m)
    r.dz = -r.k * Z * Z
    return r


def trace(times, U, UX, d1, d2, double anchor, double orient, double sign,
          double t0, double x0, double z0, double dt, double t_stop,
          double eps_par, double dt_min, double eps_den, long max_steps):
    cdef const double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef const double[:, ::1] Uv = np.ascontiguousarray(U, dtype=np.float64)
    cdef const double[:, ::1] UXv = np.ascontiguousarray(UX, dtype=np.float64)
    cdef const double[::1] c1 = np.ascontiguousarray(d1, dtype=np.float64)
    cdef const double[::1] c2 = np.ascontiguousarray(d2, dtype=np.float64)
    cdef Py_ssize_t n = Uv.shape[1]

    out = np.empty((5, max_steps + 1), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double t = t0, x = x0, K = 0.0, Z = z0
    cdef double direction = 1.0 if dt > 0 else -1.0
    cdef double nominal = fabs(dt), h = fabs(dt), s = 0.0, remaining
    cdef double xn, Kn, Zn, tn, Dp, Dn, frac
    cdef int status = C_FIELD_EDGE
    cdef double t_event = t0
    cdef long count = 1, step
    cdef Rhs k1, k2, k3, k4, end
    cdef bint done = False

    k1 = _rhs(tv, Uv, UXv, n, c1, c2, anchor, orient, sign, eps_par, t, x, Z)
    if not k1.ok:
        return [t], [x], [NAN], [0.0], [Z], C_BOUNDARY_HIT, t
    o[0, 0] = t; o[1, 0] = x; o[2, 0] = k1.u; o[3, 0] = K; o[4, 0] = Z

    with nogil:
        for step in range(max_steps):
            remaining = direction * (t_stop - t)
            if remaining <= 1e-14 * (fabs(t_stop) if fabs(t_stop) > 1.0 else 1.0):
                status = C_FIELD_EDGE
                t_event = t
                done = True
                break
            if remaining < h:
                h = remaining
            while True:
                s = direction * h
                end.ok = 0
                k1 = _rhs(tv, Uv, UXv, n, c1, c2, anchor, orient, sign, eps_par, t, x, Z)
                if k1.ok:
                    k2 = _rhs(tv, Uv, UXv, n, c1, c2, anchor, orient, sign, eps_par,
                              t + 0.5 * s, x + 0.5 * s * k1.dx, Z + 0.5 * s * k1.dz)
                    if k2.ok:
                        k3 = _rhs(tv, Uv, UXv, n, c1, c2, anchor, orient, sign, eps_par,
                                  t + 0.5 * s, x + 0.5 * s * k2.dx, Z + 0.5 * s * k2.dz)
                        if k3.ok:
                            k4 = _rhs(tv, Uv, UXv, n, c1, c2, anchor, orient, sign, eps_par,
                                      t + s, x + s * k3.dx, Z + s * k3.dz)
                            if k4.ok:
                                end = _rhs(tv, Uv, UXv, n, c1, c2, anchor, orient, sign,
                                           eps_par, t + s,
                                           x + s / 6.0 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx), Z)
                if end.ok:
                    break
                h *= 0.5
                if h < dt_min:
                    break
            if not end.ok:
                status = C_BOUNDARY_HIT
                t_event = t
                done = True
                break
            xn = x + s / 6.0 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx)
            Kn = K + s / 6.0 * (k1.k + 2 * k2.k + 2 * k3.k + k4.k)
            Zn = Z + s / 6.0 * (k1.dz + 2 * k2.dz + 2 * k3.dz + k4.dz)
            tn = t + s
            if not (isfinite(xn) and isfinite(Kn)):
                status = C_STEP_FAILURE
                t_event = t
                done = True
                break
            if z0 != 0.0:
                Dp = 1.0 + z0 * K
                Dn = 1.0 + z0 * Kn
                if Dn <= eps_den:
                    frac = (Dp - eps_den) / (Dp - Dn) if Dp != Dn else 1.0
                    t_event = t + frac * s
                    status = C_BLOW_UP
                    t = tn; x = xn; K = Kn; Z = Zn
                    o[0, count] = t; o[1, count] = x; o[2, count] = end.u
                    o[3, count] = K; o[4, count] = Z
                    count += 1
                    done = True
                    break
            t = tn; x = xn; K = Kn; Z = Zn
            o[0, count] = t; o[1, count] = x; o[2, count] = end.u
            o[3, count] = K; o[4, count] = Z
            count += 1
            h = 2.0 * h if 2.0 * h < nominal else nominal
    if not done:
        status = C_STEP_FAILURE
        t_event = t
    return (out[0, :count], out[1, :count], out[2, :count], out[3, :count],
            out[4, :count], status, t_event)


cdef inline double _force(const double[::1] times, const double[:, ::1] G,
                          const double[:, ::1] GX, Py_ssize_t n, double period,
                          double base, double t, double x) noexcept nogil:
    if period > 0.0:
        t = base + fmod(t - base, period)
        if t < base:
            t += period
    return -_sample(times, G, GX, n, t, x)


def flow(times, G, GX, double period, double t0, double x0, double p0,
         double dt, long n_steps):
    cdef const double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef const double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef const double[:, ::1] GXv = np.ascontiguousarray(GX, dtype=np.float64)
    cdef Py_ssize_t n = Gv.shape[1]
    cdef double base = tv[0]
    out = np.empty((3, n_steps + 1), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double t = t0, x = x0, p = p0, a1, a2, a3, a4
    cdef long i, count = 1
    cdef bint ok = True
    o[0, 0] = t; o[1, 0] = x; o[2, 0] = p
    with nogil:
        for i in range(n_steps):
            a1 = _force(tv, Gv, GXv, n, period, base, t, x)
            a2 = _force(tv, Gv, GXv, n, period, base, t + 0.5 * dt, x + 0.5 * dt * p)
            a3 = _force(tv, Gv, GXv, n, period, base, t + 0.5 * dt, x + 0.5 * dt * (p + 0.5 * dt * a1))
            a4 = _force(tv, Gv, GXv, n, period, base, t + dt, x + dt * (p + 0.5 * dt * a2))
            x = x + dt / 6.0 * (p + 2 * (p + 0.5 * dt * a1) + 2 * (p + 0.5 * dt * a2) + (p + dt * a3))
            p = p + dt / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
            t = t0 + count * dt
            if not (isfinite(x) and isfinite(p)):
                ok = False
                break
            o[0, count] = t; o[1, count] = x; o[2, count] = p
            count += 1
    return out[0, :count], out[1, :count], out[2, :count], ok
