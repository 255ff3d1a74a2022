# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled radial integrator kernel (polar form).

Statement-for-statement twin of _radial_rk_py: Dormand-Prince 5(4) on
(lnA, theta, I) with dense output, amplitude stop rules and the
norm-integral snapshot at the amplitude minimum.  See the pure-Python
module for the equations and status codes.
"""

import numpy as np

from libc.math cimport cos, exp, fabs, fmax, fmin, log, pow, sin, sqrt

COMPILED = True

cdef double _A21 = 0.2
cdef double _A31 = 3.0 / 40.0, _A32 = 9.0 / 40.0
cdef double _A41 = 44.0 / 45.0, _A42 = -56.0 / 15.0, _A43 = 32.0 / 9.0
cdef double _A51 = 19372.0 / 6561.0, _A52 = -25360.0 / 2187.0
cdef double _A53 = 64448.0 / 6561.0, _A54 = -212.0 / 729.0
cdef double _A61 = 9017.0 / 3168.0, _A62 = -355.0 / 33.0, _A63 = 46732.0 / 5247.0
cdef double _A64 = 49.0 / 176.0, _A65 = -5103.0 / 18656.0
cdef double _B1 = 35.0 / 384.0, _B3 = 500.0 / 1113.0, _B4 = 125.0 / 192.0
cdef double _B5 = -2187.0 / 6784.0, _B6 = 11.0 / 84.0
cdef double _C2 = 0.2, _C3 = 0.3, _C4 = 0.8, _C5 = 8.0 / 9.0
cdef double _E1 = 71.0 / 57600.0, _E3 = -71.0 / 16695.0, _E4 = 71.0 / 1920.0
cdef double _E5 = -17253.0 / 339200.0, _E6 = 22.0 / 525.0, _E7 = -1.0 / 40.0

cdef double[7][4] _P
_P[0][0] = 1.0
_P[0][1] = -8048581381.0 / 2820520608.0
_P[0][2] = 8663915743.0 / 2820520608.0
_P[0][3] = -12715105075.0 / 11282082432.0
_P[1][0] = 0.0
_P[1][1] = 0.0
_P[1][2] = 0.0
_P[1][3] = 0.0
_P[2][0] = 0.0
_P[2][1] = 131558114200.0 / 32700410799.0
_P[2][2] = -68118460800.0 / 10900136933.0
_P[2][3] = 87487479700.0 / 32700410799.0
_P[3][0] = 0.0
_P[3][1] = -1754552775.0 / 470086768.0
_P[3][2] = 14199869525.0 / 1410260304.0
_P[3][3] = -10690763975.0 / 1880347072.0
_P[4][0] = 0.0
_P[4][1] = 127303824393.0 / 49829197408.0
_P[4][2] = -318862633887.0 / 49829197408.0
_P[4][3] = 701980252875.0 / 199316789632.0
_P[5][0] = 0.0
_P[5][1] = -282668133.0 / 205662961.0
_P[5][2] = 2019193451.0 / 616988883.0
_P[5][3] = -1453857185.0 / 822651844.0
_P[6][0] = 0.0
_P[6][1] = 40617522.0 / 29380423.0
_P[6][2] = -110615467.0 / 29380423.0
_P[6][3] = 69997945.0 / 29380423.0

cdef long _MAX_STEPS = 5000000


cdef inline void _rhs(double r, double lnA, double theta, double lam, double m,
                      double p, double d_phi, double d_chi, double drm1,
                      double* out) nogil:
    cdef double ex = 2.0 * lnA / (p - 1.0)
    cdef double v = exp(ex) if ex < 700.0 else exp(700.0)
    cdef double s2 = sin(2.0 * theta)
    cdef double c2 = cos(2.0 * theta)
    cdef double dtheta = (lam + v) - m * c2
    cdef double dlnA = -m * s2
    cdef double cs, sn, exn
    if d_phi != 0.0 or d_chi != 0.0:
        dtheta -= (d_phi + d_chi) / (2.0 * r) * s2
        cs = 0.5 * (1.0 + c2)
        sn = 0.5 * (1.0 - c2)
        dlnA += d_phi / r * cs - d_chi / r * sn
    exn = p * ex + (drm1 * log(r) if (drm1 != 0.0 and r > 0.0) else 0.0)
    out[0] = dlnA
    out[1] = dtheta
    out[2] = exp(exn) if exn < 700.0 else exp(700.0)


cdef inline double _interp(double* y_old, double k[7][3], double h,
                           double frac, int comp) nogil:
    cdef double t2 = frac * frac
    cdef double t3 = t2 * frac
    cdef double t4 = t3 * frac
    cdef double acc = 0.0
    cdef int j
    for j in range(7):
        acc += k[j][comp] * (_P[j][0] * frac + _P[j][1] * t2 + _P[j][2] * t3 + _P[j][3] * t4)
    return y_old[comp] + h * acc


def integrate_radial_angle(double lnA0, double theta0, double r0, double r_max,
                           double lam, double m, double p,
                           double d_phi, double d_chi, double drm1,
                           double rtol, double atol,
                           double blow_efolds, double regrow_efolds,
                           r_out=None):
    """Integrate the polar radial system from r0 to r_max.

    Same contract as the pure-Python twin.
    """
    cdef double[::1] r_out_view
    cdef double[::1] lnA_out_view
    cdef double[::1] theta_out_view
    cdef Py_ssize_t n_out = 0
    lnA_out = None
    theta_out = None
    if r_out is not None:
        r_out = np.ascontiguousarray(r_out, dtype=np.float64)
        n_out = r_out.shape[0]
        lnA_out = np.full(n_out, np.nan)
        theta_out = np.full(n_out, np.nan)
        r_out_view = r_out
        lnA_out_view = lnA_out
        theta_out_view = theta_out

    cdef double r = r0
    cdef double y[3]
    cdef double y_new[3]
    cdef double stage[3]
    cdef double k[7][3]
    cdef double k_tmp[3]
    y[0] = lnA0
    y[1] = theta0
    y[2] = 0.0
    cdef Py_ssize_t i_out = 0
    if r_out is not None:
        while i_out < n_out and r_out_view[i_out] <= r0:
            lnA_out_view[i_out] = lnA0
            theta_out_view[i_out] = theta0
            i_out += 1

    cdef double lnA_min = lnA0
    cdef double r_at_min = r0
    cdef double norm_at_min = 0.0

    cdef int i, j
    _rhs(r, y[0], y[1], lam, m, p, d_phi, d_chi, drm1, k_tmp)
    cdef double d0 = 0.0, d1 = 0.0, sc
    for i in range(3):
        sc = atol + rtol * fabs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (k_tmp[i] / sc) ** 2
    d0 = sqrt(d0 / 3.0)
    d1 = sqrt(d1 / 3.0)
    cdef double h = 0.01 * d0 / d1 if d1 > 1e-300 else 1e-6
    h = fmin(h, r_max - r0)
    for i in range(3):
        k[0][i] = k_tmp[i]

    cdef long n_steps = 0
    cdef int status = 0
    cdef double err, err_norm, factor, r_new, frac

    while r < r_max:
        if n_steps >= _MAX_STEPS:
            status = 4
            break
        if r + h == r:
            status = 4
            break
        if r + h > r_max:
            h = r_max - r

        for i in range(3):
            stage[i] = y[i] + h * _A21 * k[0][i]
        _rhs(r + _C2 * h, stage[0], stage[1], lam, m, p, d_phi, d_chi, drm1, k_tmp)
        for i in range(3):
            k[1][i] = k_tmp[i]
        for i in range(3):
            stage[i] = y[i] + h * (_A31 * k[0][i] + _A32 * k[1][i])
        _rhs(r + _C3 * h, stage[0], stage[1], lam, m, p, d_phi, d_chi, drm1, k_tmp)
        for i in range(3):
            k[2][i] = k_tmp[i]
        for i in range(3):
            stage[i] = y[i] + h * (_A41 * k[0][i] + _A42 * k[1][i] + _A43 * k[2][i])
        _rhs(r + _C4 * h, stage[0], stage[1], lam, m, p, d_phi, d_chi, drm1, k_tmp)
        for i in range(3):
            k[3][i] = k_tmp[i]
        for i in range(3):
            stage[i] = y[i] + h * (_A51 * k[0][i] + _A52 * k[1][i] + _A53 * k[2][i] + _A54 * k[3][i])
        _rhs(r + _C5 * h, stage[0], stage[1], lam, m, p, d_phi, d_chi, drm1, k_tmp)
        for i in range(3):
            k[4][i] = k_tmp[i]
        for i in range(3):
            stage[i] = y[i] + h * (_A61 * k[0][i] + _A62 * k[1][i] + _A63 * k[2][i]
                                   + _A64 * k[3][i] + _A65 * k[4][i])
        _rhs(r + h, stage[0], stage[1], lam, m, p, d_phi, d_chi, drm1, k_tmp)
        for i in range(3):
            k[5][i] = k_tmp[i]
        for i in range(3):
            y_new[i] = y[i] + h * (_B1 * k[0][i] + _B3 * k[2][i] + _B4 * k[3][i]
                                   + _B5 * k[4][i] + _B6 * k[5][i])
        _rhs(r + h, y_new[0], y_new[1], lam, m, p, d_phi, d_chi, drm1, k_tmp)
        for i in range(3):
            k[6][i] = k_tmp[i]

        err_norm = 0.0
        for i in range(3):
            err = h * (_E1 * k[0][i] + _E3 * k[2][i] + _E4 * k[3][i]
                       + _E5 * k[4][i] + _E6 * k[5][i] + _E7 * k[6][i])
            sc = atol + rtol * fmax(fabs(y[i]), fabs(y_new[i]))
            err_norm += (err / sc) ** 2
        err_norm = sqrt(err_norm / 3.0)

        if err_norm > 1.0:
            h *= fmax(0.2, 0.9 * pow(err_norm, -0.2))
            n_steps += 1
            continue

        n_steps += 1

        if r_out is not None:
            r_new = r + h
            while i_out < n_out and r_out_view[i_out] <= r_new + 1e-15 * fmax(r_new, 1.0):
                frac = (r_out_view[i_out] - r) / h
                lnA_out_view[i_out] = _interp(y, k, h, frac, 0)
                theta_out_view[i_out] = _interp(y, k, h, frac, 1)
                i_out += 1

        r = r + h
        for i in range(3):
            y[i] = y_new[i]
            k[0][i] = k[6][i]

        if y[0] < lnA_min:
            lnA_min = y[0]
            r_at_min = r
            norm_at_min = y[2]

        if y[0] > lnA0 + blow_efolds or y[0] - lnA_min > regrow_efolds:
            status = 3
            break

        factor = 10.0 if err_norm == 0.0 else fmin(10.0, 0.9 * pow(err_norm, -0.2))
        h = h * factor

    if status == 0 and y[0] <= lnA_min:
        lnA_min = y[0]
        r_at_min = r
        norm_at_min = y[2]
    return (status, r, y[0], y[1], n_steps, lnA_min, r_at_min, norm_at_min, y[2],
            lnA_out, theta_out)
