# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: laser field, RK4 pusher, Filon far-field quadrature.

The pure-Python twins live in ``_pykernels.py``; both must agree to rounding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, exp, sqrt, isfinite

cnp.import_array()

DEF TAYLOR_THETA = 0.05
DEF GUARD_THETA = 1e-4


cdef inline void _field(int model, const double* prm, double x, double y, double z,
                        double t, double* e, double* b) noexcept nogil:
    cdef double a0 = prm[0], inv_tau2 = prm[1], w0 = prm[2], xr = prm[3], phc = prm[4]
    cdef double eta = t - x
    cdef double env = a0
    cdef double xi, qr, qi, den, rho2, m, psi, cr, ci, s, iw2
    if model != 0:
        env = a0 * exp(-eta * eta * inv_tau2)
    e[1] = 0.0
    b[2] = 0.0
    if model == 2:
        xi = x / xr
        den = 1.0 / (1.0 + xi * xi)
        qr = den
        qi = -xi * den
        rho2 = y * y + z * z
        iw2 = 1.0 / (w0 * w0)
        m = env * exp(-rho2 * qr * iw2)
        psi = -rho2 * qi * iw2 - (eta + phc)
        cr = m * (qr * cos(psi) - qi * sin(psi))
        ci = m * (qr * sin(psi) + qi * cos(psi))
        s = 2.0 * iw2 * (qr * ci + qi * cr)
        e[0] = z * s
        e[2] = cr
        b[0] = -y * s
        b[1] = -cr
    else:
        e[0] = 0.0
        e[2] = env * cos(eta + phc)
        b[0] = 0.0
        b[1] = -e[2]


def field_at(int model, const double[::1] params, double x, double y, double z, double t):
    """E and B at one point, as two tuples (testing hook)."""
    cdef double e[3]
    cdef double b[3]
    _field(model, &params[0], x, y, z, t, e, b)
    return (e[0], e[1], e[2]), (b[0], b[1], b[2])


cdef inline void _deriv(int model, const double* prm, const double* s, double t,
                        double* ds) noexcept nogil:
    # s = (x, y, z, px, py, pz); ds = d s / dt for charge -e
    cdef double e[3]
    cdef double b[3]
    cdef double g = sqrt(1.0 + s[3] * s[3] + s[4] * s[4] + s[5] * s[5])
    cdef double bx = s[3] / g, by = s[4] / g, bz = s[5] / g
    _field(model, prm, s[0], s[1], s[2], t, e, b)
    ds[0] = bx
    ds[1] = by
    ds[2] = bz
    ds[3] = -(e[0] + by * b[2] - bz * b[1])
    ds[4] = -(e[1] + bz * b[0] - bx * b[2])
    ds[5] = -(e[2] + bx * b[1] - by * b[0])


def push_rk4(int model, const double[::1] params, const double[::1] r0, const double[::1] p0,
             double t0, double dt, Py_ssize_t n_steps, double eta_stop,
             double[:, ::1] r_out, double[:, ::1] p_out):
    """Fixed-step RK4.  Writes samples 0..n into r_out/p_out (n <= n_steps).

    Stops early after the first sample with t - x >= eta_stop.  Returns
    (number of samples written, index of first non-finite sample or -1).
    """
    cdef double s[6]
    cdef double k1[6]
    cdef double k2[6]
    cdef double k3[6]
    cdef double k4[6]
    cdef double tmp[6]
    cdef const double* prm = &params[0]
    cdef Py_ssize_t i, k, written = 0, bad = -1
    cdef double t, h = dt, hh = 0.5 * dt
    for k in range(3):
        s[k] = r0[k]
        s[k + 3] = p0[k]
    with nogil:
        for k in range(3):
            r_out[0, k] = s[k]
            p_out[0, k] = s[k + 3]
        written = 1
        if t0 - s[0] < eta_stop:
            for i in range(n_steps):
                t = t0 + i * h
                _deriv(model, prm, s, t, k1)
                for k in range(6):
                    tmp[k] = s[k] + hh * k1[k]
                _deriv(model, prm, tmp, t + hh, k2)
                for k in range(6):
                    tmp[k] = s[k] + hh * k2[k]
                _deriv(model, prm, tmp, t + hh, k3)
                for k in range(6):
                    tmp[k] = s[k] + h * k3[k]
                _deriv(model, prm, tmp, t + h, k4)
                for k in range(6):
                    s[k] = s[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
                for k in range(3):
                    r_out[i + 1, k] = s[k]
                    p_out[i + 1, k] = s[k + 3]
                written = i + 2
                if not (isfinite(s[0]) and isfinite(s[1]) and isfinite(s[2]) and
                        isfinite(s[3]) and isfinite(s[4]) and isfinite(s[5])):
                    bad = i + 1
                    break
                if t0 + (i + 1) * h - s[0] >= eta_stop:
                    break
    return written, bad


cdef inline void _taylor(double th, double* e0r, double* e0i, double* e1r, double* e1i) noexcept nogil:
    # E0 = sum (i th)^k/(k+1)!, E1 = sum (i th)^k/(k! (k+2)), k = 0..6
    cdef double t2 = th * th
    cdef double t3 = t2 * th
    cdef double t4 = t2 * t2
    cdef double t5 = t4 * th
    cdef double t6 = t3 * t3
    e0r[0] = 1.0 - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0
    e0i[0] = th / 2.0 - t3 / 24.0 + t5 / 720.0
    e1r[0] = 0.5 - t2 / 8.0 + t4 / 144.0 - t6 / 5760.0
    e1i[0] = th / 3.0 - t3 / 30.0 + t5 / 840.0


def farfield(const double[::1] t, const double[:, ::1] r, const double[:, ::1] beta,
             const double[:, ::1] nvec, const double[::1] omegas, bint uniform, bint boundary,
             double[:, :, :, ::1] out):
    """Complex amplitudes A(n, omega) = int n x (n x beta) exp(i omega (t - n.r)) dt.

    Piecewise-linear (Filon) quadrature on the given samples; each segment is
    integrated exactly for linear phase and linear integrand.  With ``boundary``
    the uniform-motion extension beyond both ends is added analytically, so the
    result equals the acceleration-form integral.  ``out`` is a float view of a
    complex (D, M, 3) array, i.e. shape (D, M, 3, 2).
    """
    cdef Py_ssize_t n = t.shape[0], nd = nvec.shape[0], nm = omegas.shape[0]
    cdef Py_ssize_t d, j, m, c
    cdef double[::1] phi = np.empty(n)
    cdef double[:, ::1] f = np.empty((n, 3))
    cdef double[::1] dphi = np.empty(n)
    cdef double[::1] hseg = np.empty(n)
    cdef double[:, ::1] u = np.empty((n, 3))
    cdef double[:, ::1] v = np.empty((n, 3))
    cdef double[::1] pr = np.empty(n)
    cdef double[::1] pim = np.empty(n)
    cdef double[::1] qr = np.empty(n)
    cdef double[::1] qim = np.empty(n)
    cdef double nx, ny, nz, nb, w, dw, a_prev, a_cur, dphimin, th, inv, inv2
    cdef double sur[3]
    cdef double sui[3]
    cdef double svr[3]
    cdef double svi[3]
    cdef double e_prev[3]
    cdef double e_cur[3]
    cdef double accr[3]
    cdef double acci[3]
    cdef double fa, fb, df, xr, xi, yr, yi, e0r, e0i, e1r, e1i, cr, ci, tr, ti
    cdef double g0, g1, dn0, dn1
    if n < 2:
        raise ValueError("need at least two trajectory samples")
    with nogil:
        dw = omegas[1] - omegas[0] if nm > 1 else 0.0
        for d in range(nd):
            nx = nvec[d, 0]
            ny = nvec[d, 1]
            nz = nvec[d, 2]
            for j in range(n):
                phi[j] = t[j] - (nx * r[j, 0] + ny * r[j, 1] + nz * r[j, 2])
                nb = nx * beta[j, 0] + ny * beta[j, 1] + nz * beta[j, 2]
                f[j, 0] = nx * nb - beta[j, 0]
                f[j, 1] = ny * nb - beta[j, 1]
                f[j, 2] = nz * nb - beta[j, 2]
            dphimin = 1e300
            a_prev = 0.0
            for c in range(3):
                e_prev[c] = 0.0
            for j in range(n):
                if j < n - 1:
                    dphi[j] = phi[j + 1] - phi[j]
                    hseg[j] = t[j + 1] - t[j]
                    if dphi[j] < dphimin:
                        dphimin = dphi[j]
                    a_cur = hseg[j] / dphi[j]
                    for c in range(3):
                        e_cur[c] = hseg[j] * (f[j + 1, c] - f[j, c]) / (dphi[j] * dphi[j])
                else:
                    a_cur = 0.0
                    for c in range(3):
                        e_cur[c] = 0.0
                for c in range(3):
                    u[j, c] = f[j, c] * (a_prev - a_cur)
                    v[j, c] = e_prev[c] - e_cur[c]
                    e_prev[c] = e_cur[c]
                a_prev = a_cur
            if uniform:
                for j in range(n):
                    pr[j] = cos(omegas[0] * phi[j])
                    pim[j] = sin(omegas[0] * phi[j])
                    qr[j] = cos(dw * phi[j])
                    qim[j] = sin(dw * phi[j])
            for m in range(nm):
                w = omegas[m]
                if not uniform:
                    for j in range(n):
                        pr[j] = cos(w * phi[j])
                        pim[j] = sin(w * phi[j])
                if w * dphimin >= GUARD_THETA:
                    for c in range(3):
                        sur[c] = 0.0
                        sui[c] = 0.0
                        svr[c] = 0.0
                        svi[c] = 0.0
                    for j in range(n):
                        for c in range(3):
                            sur[c] += u[j, c] * pr[j]
                            sui[c] += u[j, c] * pim[j]
                            svr[c] += v[j, c] * pr[j]
                            svi[c] += v[j, c] * pim[j]
                    inv = 1.0 / w
                    inv2 = inv * inv
                    for c in range(3):
                        # -i S_u / w + S_v / w^2
                        accr[c] = sui[c] * inv + svr[c] * inv2
                        acci[c] = -sur[c] * inv + svi[c] * inv2
                else:
                    for c in range(3):
                        accr[c] = 0.0
                        acci[c] = 0.0
                    for j in range(n - 1):
                        th = w * dphi[j]
                        if th < TAYLOR_THETA:
                            _taylor(th, &e0r, &e0i, &e1r, &e1i)
                            for c in range(3):
                                fa = f[j, c]
                                df = f[j + 1, c] - fa
                                cr = hseg[j] * (fa * e0r + df * e1r)
                                ci = hseg[j] * (fa * e0i + df * e1i)
                                accr[c] += cr * pr[j] - ci * pim[j]
                                acci[c] += cr * pim[j] + ci * pr[j]
                        else:
                            inv = 1.0 / th
                            inv2 = inv * inv
                            for c in range(3):
                                fa = f[j, c]
                                fb = f[j + 1, c]
                                df = fb - fa
                                # (F_b - F_a) / (i th) + df (P_b - P_a) / th^2
                                xr = fb * pr[j + 1] - fa * pr[j]
                                xi = fb * pim[j + 1] - fa * pim[j]
                                yr = pr[j + 1] - pr[j]
                                yi = pim[j + 1] - pim[j]
                                accr[c] += hseg[j] * (xi * inv + df * yr * inv2)
                                acci[c] += hseg[j] * (-xr * inv + df * yi * inv2)
                if boundary:
                    dn0 = 1.0 - (nx * beta[0, 0] + ny * beta[0, 1] + nz * beta[0, 2])
                    dn1 = 1.0 - (nx * beta[n - 1, 0] + ny * beta[n - 1, 1] + nz * beta[n - 1, 2])
                    inv = 1.0 / w
                    for c in range(3):
                        g0 = f[0, c] / dn0
                        g1 = f[n - 1, c] / dn1
                        tr = g1 * pr[n - 1] - g0 * pr[0]
                        ti = g1 * pim[n - 1] - g0 * pim[0]
                        # + (i / w) * (tr + i ti)
                        accr[c] += -ti * inv
                        acci[c] += tr * inv
                for c in range(3):
                    out[d, m, c, 0] = accr[c]
                    out[d, m, c, 1] = acci[c]
                if uniform:
                    for j in range(n):
                        xr = pr[j] * qr[j] - pim[j] * qim[j]
                        pim[j] = pr[j] * qim[j] + pim[j] * qr[j]
                        pr[j] = xr
    return None
