"""Pure-Python twin of the compiled radial integrator kernel.

Integrates the radial nonlinear Dirac system in polar form: with
phi = A cos(theta), chi = A sin(theta) and V = A^(2/(p-1)),

    theta'  = (lam + V) - m cos(2 theta) - (dphi + dchi)/(2r) sin(2 theta)
    (lnA)'  = -m sin(2 theta) + (dphi/r) cos^2(theta) - (dchi/r) sin^2(theta)
    I'      = V^p r^(d-1)

The angle stays bounded where the component ratio blows up, so a single
trajectory classification (which side of the unstable decay angle the
phase lands on) replaces sign-change events.  lnA never overflows; the
minimum of lnA marks the closest approach to the decaying manifold and
the norm integral I is snapshotted there.

Dormand-Prince 5(4) with the quartic dense-output interpolant; the
arithmetic mirrors the Cython kernel statement for statement.

Status codes: 0 reached r_max, 3 amplitude stop (blown past the start
scale or regrown from the minimum), 4 step-size underflow / step budget.
"""

import math

import numpy as np

COMPILED = False

_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)
_P = (
    (1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0),
    (0.0, 0.0, 0.0, 0.0),
    (0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0),
    (0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0),
    (0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0),
    (0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0),
    (0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0),
)
_MAX_STEPS = 5_000_000


def _rhs(r, lnA, theta, lam, m, p, d_phi, d_chi, drm1):
    ex = 2.0 * lnA / (p - 1.0)
    v = math.exp(ex) if ex < 700.0 else math.exp(700.0)
    s2 = math.sin(2.0 * theta)
    c2 = math.cos(2.0 * theta)
    dtheta = (lam + v) - m * c2
    dlnA = -m * s2
    if d_phi != 0.0 or d_chi != 0.0:
        dtheta -= (d_phi + d_chi) / (2.0 * r) * s2
        cs = 0.5 * (1.0 + c2)
        sn = 0.5 * (1.0 - c2)
        dlnA += d_phi / r * cs - d_chi / r * sn
    exn = p * ex + (drm1 * math.log(r) if drm1 != 0.0 and r > 0.0 else 0.0)
    di = math.exp(exn) if exn < 700.0 else math.exp(700.0)
    return dlnA, dtheta, di


def _interp(y_old, k, h, theta_frac, comp):
    t2 = theta_frac * theta_frac
    t3 = t2 * theta_frac
    t4 = t3 * theta_frac
    acc = 0.0
    for j in range(7):
        pj = _P[j]
        acc += k[j][comp] * (pj[0] * theta_frac + pj[1] * t2 + pj[2] * t3 + pj[3] * t4)
    return y_old[comp] + h * acc


def integrate_radial_angle(lnA0, theta0, r0, r_max, lam, m, p, d_phi, d_chi, drm1,
                           rtol, atol, blow_efolds, regrow_efolds, r_out=None):
    """Integrate the polar radial system from r0 to r_max.

    Returns (status, r_stop, lnA_end, theta_end, n_steps, lnA_min,
    r_at_min, norm_at_min, norm_end, lnA_out, theta_out); the output
    arrays follow r_out (NaN past the stop radius) and are None when
    r_out is None.
    """
    n_out = 0 if r_out is None else len(r_out)
    lnA_out = np.full(n_out, math.nan) if r_out is not None else None
    theta_out = np.full(n_out, math.nan) if r_out is not None else None
    i_out = 0

    r = r0
    y = [lnA0, theta0, 0.0]
    if r_out is not None:
        while i_out < n_out and r_out[i_out] <= r0:
            lnA_out[i_out] = lnA0
            theta_out[i_out] = theta0
            i_out += 1

    lnA_min = lnA0
    r_at_min = r0
    norm_at_min = 0.0

    f0 = _rhs(r, y[0], y[1], lam, m, p, d_phi, d_chi, drm1)
    d0 = 0.0
    d1 = 0.0
    for i in range(3):
        sc = atol + rtol * abs(y[i])
        d0 += (y[i] / sc) ** 2
        d1 += (f0[i] / sc) ** 2
    d0 = math.sqrt(d0 / 3.0)
    d1 = math.sqrt(d1 / 3.0)
    h = 0.01 * d0 / d1 if d1 > 1e-300 else 1e-6
    h = min(h, r_max - r0)

    k = [[0.0, 0.0, 0.0] for _ in range(7)]
    k[0] = list(f0)
    n_steps = 0
    status = 0

    while r < r_max:
        if n_steps >= _MAX_STEPS:
            status = 4
            break
        if r + h == r:
            status = 4
            break
        if r + h > r_max:
            h = r_max - r

        k1 = k[0]
        y2 = [y[i] + h * _A21 * k1[i] for i in range(3)]
        k2 = _rhs(r + _C2 * h, y2[0], y2[1], lam, m, p, d_phi, d_chi, drm1)
        y3 = [y[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in range(3)]
        k3 = _rhs(r + _C3 * h, y3[0], y3[1], lam, m, p, d_phi, d_chi, drm1)
        y4 = [y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(3)]
        k4 = _rhs(r + _C4 * h, y4[0], y4[1], lam, m, p, d_phi, d_chi, drm1)
        y5 = [y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i]) for i in range(3)]
        k5 = _rhs(r + _C5 * h, y5[0], y5[1], lam, m, p, d_phi, d_chi, drm1)
        y6 = [
            y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i] + _A65 * k5[i])
            for i in range(3)
        ]
        k6 = _rhs(r + h, y6[0], y6[1], lam, m, p, d_phi, d_chi, drm1)
        y_new = [
            y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i] + _B6 * k6[i])
            for i in range(3)
        ]
        k7 = _rhs(r + h, y_new[0], y_new[1], lam, m, p, d_phi, d_chi, drm1)

        err_norm = 0.0
        for i in range(3):
            err = h * (
                _E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i] + _E6 * k6[i] + _E7 * k7[i]
            )
            sc = atol + rtol * max(abs(y[i]), abs(y_new[i]))
            err_norm += (err / sc) ** 2
        err_norm = math.sqrt(err_norm / 3.0)

        if err_norm > 1.0:
            h *= max(0.2, 0.9 * err_norm**-0.2)
            n_steps += 1
            continue

        k[1], k[2], k[3], k[4], k[5], k[6] = list(k2), list(k3), list(k4), list(k5), list(k6), list(k7)
        n_steps += 1

        if r_out is not None:
            r_new = r + h
            while i_out < n_out and r_out[i_out] <= r_new + 1e-15 * max(r_new, 1.0):
                frac = (r_out[i_out] - r) / h
                lnA_out[i_out] = _interp(y, k, h, frac, 0)
                theta_out[i_out] = _interp(y, k, h, frac, 1)
                i_out += 1

        r = r + h
        y = y_new
        k[0] = list(k7)

        if y[0] < lnA_min:
            lnA_min = y[0]
            r_at_min = r
            norm_at_min = y[2]

        if y[0] > lnA0 + blow_efolds or y[0] - lnA_min > regrow_efolds:
            status = 3
            break

        factor = 10.0 if err_norm == 0.0 else min(10.0, 0.9 * err_norm**-0.2)
        h = h * factor

    if status == 0 and y[0] <= lnA_min:
        lnA_min = y[0]
        r_at_min = r
        norm_at_min = y[2]
    return (status, r, y[0], y[1], n_steps, lnA_min, r_at_min, norm_at_min, y[2],
            lnA_out, theta_out)
