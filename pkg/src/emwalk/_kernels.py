"""Fused stepping kernels for trajectories with row-constant coin phases.

Both passes implement exactly the arithmetic of ``walk.step`` (same
operation order, no fused multiply-adds), so the compiled path and the
reference path agree bitwise.  A vectorised numpy fallback with the
same signature is used when numba is unavailable.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False


def _pass1_py(minus, plus, p1, cp, isp, out_m, out_p):
    """Shift along p and first coin; p1 holds e^{i xi1} per row."""
    np.multiply(p1[:, None], np.roll(minus, -1, 0), out=out_m)
    np.multiply(np.conj(p1)[:, None], np.roll(plus, 1, 0), out=out_p)
    x = out_m.copy()
    y = out_p.copy()
    np.multiply(cp, x, out=out_m)
    out_m += isp * y
    np.multiply(isp, x, out=out_p)
    out_p += cp * y


def _pass2_py(tm, tp, u, v, cm, ism, out_m, out_p):
    """Shift along q and second coin; u, v hold e^{i(alpha +/- xi2)} per row."""
    np.multiply(u[:, None], np.roll(tm, -1, 1), out=out_m)
    np.multiply(v[:, None], np.roll(tp, 1, 1), out=out_p)
    x = out_m.copy()
    y = out_p.copy()
    np.multiply(cm, x, out=out_m)
    out_m += ism * y
    np.multiply(ism, x, out=out_p)
    out_p += cm * y


def _marginals_py(minus, plus):
    """Density marginals along both axes in one sweep: (sum_q, sum_p)."""
    dens = (minus.real ** 2 + minus.imag ** 2) + (plus.real ** 2 + plus.imag ** 2)
    return dens.sum(axis=1), dens.sum(axis=0)


def _current_fields_py(minus, plus, tminus, tplus, rho, j1, j2):
    dm = minus.real ** 2 + minus.imag ** 2
    dp = plus.real ** 2 + plus.imag ** 2
    np.add(dm, dp, out=rho)
    np.subtract(dp, dm, out=j1)
    np.subtract(tplus.real ** 2 + tplus.imag ** 2,
                tminus.real ** 2 + tminus.imag ** 2, out=j2)


def _continuity_max_py(rho, j1, j2, rho_next, inv_eps):
    sig = 0.25 * (np.roll(np.roll(rho, -1, 0), -1, 1) + np.roll(np.roll(rho, 1, 0), -1, 1)
                  + np.roll(np.roll(rho, -1, 0), 1, 1) + np.roll(np.roll(rho, 1, 0), 1, 1))
    dj1 = 0.25 * (np.roll(np.roll(j1, -1, 0), -1, 1) + np.roll(np.roll(j1, -1, 0), 1, 1)
                  - np.roll(np.roll(j1, 1, 0), -1, 1) - np.roll(np.roll(j1, 1, 0), 1, 1))
    dj2 = 0.5 * (np.roll(j2, -1, 1) - np.roll(j2, 1, 1))
    return float(np.abs((rho_next - sig + dj1 + dj2) * inv_eps).max())


if _HAVE_NUMBA:

    @njit(cache=True)
    def _marginals_nb(minus, plus):  # pragma: no cover
        rows, cols = minus.shape
        marg_p = np.zeros(rows)
        marg_q = np.zeros(cols)
        for i in range(rows):
            acc = 0.0
            for j in range(cols):
                m = minus[i, j]
                p = plus[i, j]
                d = m.real * m.real + m.imag * m.imag + p.real * p.real + p.imag * p.imag
                acc += d
                marg_q[j] += d
            marg_p[i] = acc
        return marg_p, marg_q

    @njit(cache=True)
    def _current_fields_nb(minus, plus, tminus, tplus, rho, j1, j2):  # pragma: no cover
        rows, cols = minus.shape
        for i in range(rows):
            for j in range(cols):
                m = minus[i, j]
                p = plus[i, j]
                dm = m.real * m.real + m.imag * m.imag
                dp = p.real * p.real + p.imag * p.imag
                rho[i, j] = dm + dp
                j1[i, j] = dp - dm
                tm = tminus[i, j]
                tp = tplus[i, j]
                j2[i, j] = (tp.real * tp.real + tp.imag * tp.imag
                            - tm.real * tm.real - tm.imag * tm.imag)

    @njit(cache=True)
    def _continuity_max_nb(rho, j1, j2, rho_next, inv_eps):  # pragma: no cover
        rows, cols = rho.shape
        best = 0.0
        for i in range(rows):
            ip = i + 1 if i + 1 < rows else 0
            im = i - 1 if i >= 1 else rows - 1
            for j in range(cols):
                jp = j + 1 if j + 1 < cols else 0
                jm = j - 1 if j >= 1 else cols - 1
                sig = 0.25 * (rho[ip, jp] + rho[im, jp] + rho[ip, jm] + rho[im, jm])
                dj1 = 0.25 * (j1[ip, jp] + j1[ip, jm] - j1[im, jp] - j1[im, jm])
                dj2 = 0.5 * (j2[i, jp] - j2[i, jm])
                r = (rho_next[i, j] - sig + dj1 + dj2) * inv_eps
                if r < 0.0:
                    r = -r
                if r > best:
                    best = r
        return best

    @njit(cache=True)
    def _pass1_nb(minus, plus, p1, cp, isp, out_m, out_p):  # pragma: no cover
        rows, cols = minus.shape
        for i in range(rows):
            ip = i + 1 if i + 1 < rows else 0
            im = i - 1 if i >= 1 else rows - 1
            a = p1[i]
            ac = a.conjugate()
            for j in range(cols):
                x = a * minus[ip, j]
                y = ac * plus[im, j]
                out_m[i, j] = cp * x + isp * y
                out_p[i, j] = isp * x + cp * y

    @njit(cache=True)
    def _pass2_nb(tm, tp, u, v, cm, ism, out_m, out_p):  # pragma: no cover
        rows, cols = tm.shape
        for i in range(rows):
            ui = u[i]
            vi = v[i]
            for j in range(cols):
                jp = j + 1 if j + 1 < cols else 0
                jm = j - 1 if j >= 1 else cols - 1
                x = ui * tm[i, jp]
                y = vi * tp[i, jm]
                out_m[i, j] = cm * x + ism * y
                out_p[i, j] = ism * x + cm * y

    pass1, pass2, marginals = _pass1_nb, _pass2_nb, _marginals_nb
    current_fields, continuity_max = _current_fields_nb, _continuity_max_nb
else:
    pass1, pass2, marginals = _pass1_py, _pass2_py, _marginals_py
    current_fields, continuity_max = _current_fields_py, _continuity_max_py
