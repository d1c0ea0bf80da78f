"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and conventions; selected automatically when the extension
is not built, or forced with THOMSONWP_PURE_PYTHON=1.
"""
import math

import numpy as np

TAYLOR_THETA = 0.05


def _field(model, prm, x, y, z, t):
    a0, inv_tau2, w0, xr, phc = prm
    eta = t - x
    env = a0 if model == 0 else a0 * math.exp(-eta * eta * inv_tau2)
    if model == 2:
        xi = x / xr
        den = 1.0 / (1.0 + xi * xi)
        qr, qi = den, -xi * den
        rho2 = y * y + z * z
        iw2 = 1.0 / (w0 * w0)
        m = env * math.exp(-rho2 * qr * iw2)
        psi = -rho2 * qi * iw2 - (eta + phc)
        cp, sp = math.cos(psi), math.sin(psi)
        cr = m * (qr * cp - qi * sp)
        ci = m * (qr * sp + qi * cp)
        s = 2.0 * iw2 * (qr * ci + qi * cr)
        return (z * s, 0.0, cr), (-y * s, -cr, 0.0)
    ez = env * math.cos(eta + phc)
    return (0.0, 0.0, ez), (0.0, -ez, 0.0)


def field_at(model, params, x, y, z, t):
    return _field(model, tuple(float(v) for v in params), x, y, z, t)


def _deriv(model, prm, s, t):
    x, y, z, px, py, pz = s
    g = math.sqrt(1.0 + px * px + py * py + pz * pz)
    bx, by, bz = px / g, py / g, pz / g
    (ex, ey, ez), (hx, hy, hz) = _field(model, prm, x, y, z, t)
    return (bx, by, bz,
            -(ex + by * hz - bz * hy),
            -(ey + bz * hx - bx * hz),
            -(ez + bx * hy - by * hx))


def push_rk4(model, params, r0, p0, t0, dt, n_steps, eta_stop, r_out, p_out):
    prm = tuple(float(v) for v in params)
    s = [float(v) for v in r0] + [float(v) for v in p0]
    r_out[0] = s[:3]
    p_out[0] = s[3:]
    written, bad = 1, -1
    if t0 - s[0] >= eta_stop:
        return written, bad
    h, hh = dt, 0.5 * dt
    for i in range(n_steps):
        t = t0 + i * h
        k1 = _deriv(model, prm, s, t)
        k2 = _deriv(model, prm, [a + hh * b for a, b in zip(s, k1)], t + hh)
        k3 = _deriv(model, prm, [a + hh * b for a, b in zip(s, k2)], t + hh)
        k4 = _deriv(model, prm, [a + h * b for a, b in zip(s, k3)], t + h)
        s = [a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
             for a, b1, b2, b3, b4 in zip(s, k1, k2, k3, k4)]
        r_out[i + 1] = s[:3]
        p_out[i + 1] = s[3:]
        written = i + 2
        if not all(math.isfinite(v) for v in s):
            bad = i + 1
            break
        if t0 + (i + 1) * h - s[0] >= eta_stop:
            break
    return written, bad


def _segment_weights(theta):
    """E0 = int_0^1 e^{i th s} ds and E1 = int_0^1 s e^{i th s} ds, stable for small theta."""
    small = theta < TAYLOR_THETA
    th = np.where(small, 1.0, theta)
    eit = np.exp(1j * th)
    e0 = (eit - 1.0) / (1j * th)
    e1 = eit / (1j * th) + (eit - 1.0) / th**2
    t2 = theta * theta
    t3, t4 = t2 * theta, t2 * t2
    t5, t6 = t4 * theta, t3 * t3
    e0s = (1.0 - t2 / 6.0 + t4 / 120.0 - t6 / 5040.0) + 1j * (theta / 2.0 - t3 / 24.0 + t5 / 720.0)
    e1s = (0.5 - t2 / 8.0 + t4 / 144.0 - t6 / 5760.0) + 1j * (theta / 3.0 - t3 / 30.0 + t5 / 840.0)
    return np.where(small, e0s, e0), np.where(small, e1s, e1)


def farfield(t, r, beta, nvec, omegas, uniform, boundary, out, chunk=16):
    t = np.asarray(t)
    n = t.size
    if n < 2:
        raise ValueError("need at least two trajectory samples")
    res = out.view(complex)[..., 0] if out.dtype != complex else out
    h = np.diff(t)
    omegas = np.asarray(omegas)
    for d, nv in enumerate(np.asarray(nvec)):
        phi = t - r @ nv
        f = nv[None, :] * (beta @ nv)[:, None] - beta
        dphi = np.diff(phi)
        df = np.diff(f, axis=0)
        dn0 = 1.0 - beta[0] @ nv
        dn1 = 1.0 - beta[-1] @ nv
        for lo in range(0, omegas.size, chunk):
            w = omegas[lo:lo + chunk, None]
            p = np.exp(1j * w * phi[None, :])
            e0, e1 = _segment_weights(w * dphi[None, :])
            base = (h[None, :] * p[:, :-1])
            acc = (np.einsum("ms,sc->mc", base * e0, f[:-1])
                   + np.einsum("ms,sc->mc", base * e1, df))
            if boundary:
                g0 = f[0] / dn0
                g1 = f[-1] / dn1
                acc = acc + (1j / w) * (g1[None, :] * p[:, -1:] - g0[None, :] * p[:, :1])
            res[d, lo:lo + chunk] = acc
    return None
