"""Compiled time-stepping kernels for the Stuart-Landau network.

The state is a complex vector z; the right-hand side is
``(mu + i omega_j) z_j - |z_j|^2 z_j - c (L z)_j``.
"""

import numpy as np
from numba import njit

# Fehlberg 4(5) tableau
_A2 = 1.0 / 4.0
_A3 = (3.0 / 32.0, 9.0 / 32.0)
_A4 = (1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0)
_A5 = (439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0)
_A6 = (-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0)
_B4 = (25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0)
_B5 = (16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0)

BLOWUP = 1e150


@njit(cache=True)
def rhs_into(z, mu, omega, c, lap, out):
    n = z.shape[0]
    for j in range(n):
        acc = 0j
        for k in range(n):
            acc += lap[j, k] * z[k]
        zj = z[j]
        out[j] = complex(mu, omega[j]) * zj - (zj.real * zj.real + zj.imag * zj.imag) * zj - c * acc


@njit(cache=True)
def _finite(z):
    for j in range(z.shape[0]):
        v = z[j]
        if not (abs(v.real) < BLOWUP and abs(v.imag) < BLOWUP):
            return False
    return True


@njit(cache=True)
def rk4_advance(z, mu, omega, c, lap, h, nsteps):
    """Take ``nsteps`` classical RK4 steps of size h in place. Returns False on blow-up."""
    n = z.shape[0]
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    tmp = np.empty(n, np.complex128)
    for _ in range(nsteps):
        rhs_into(z, mu, omega, c, lap, k1)
        for j in range(n):
            tmp[j] = z[j] + 0.5 * h * k1[j]
        rhs_into(tmp, mu, omega, c, lap, k2)
        for j in range(n):
            tmp[j] = z[j] + 0.5 * h * k2[j]
        rhs_into(tmp, mu, omega, c, lap, k3)
        for j in range(n):
            tmp[j] = z[j] + h * k3[j]
        rhs_into(tmp, mu, omega, c, lap, k4)
        for j in range(n):
            z[j] = z[j] + (h / 6.0) * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        if not _finite(z):
            return False
    return True


@njit(cache=True)
def rkf45_advance(z, mu, omega, c, lap, span, h, atol, rtol, safety, h_min, h_max):
    """Advance z in place across a time span of length ``span`` with adaptive RKF45.

    The fifth-order solution is propagated. Returns ``(status, h_next, n_steps)``
    with status 0 ok, 1 blow-up.
    """
    n = z.shape[0]
    k1 = np.empty(n, np.complex128)
    k2 = np.empty(n, np.complex128)
    k3 = np.empty(n, np.complex128)
    k4 = np.empty(n, np.complex128)
    k5 = np.empty(n, np.complex128)
    k6 = np.empty(n, np.complex128)
    tmp = np.empty(n, np.complex128)
    y5 = np.empty(n, np.complex128)
    t = 0.0
    steps = 0
    h_carry = h
    while span - t > 1e-14 * max(1.0, span):
        remaining = span - t
        step = min(h, remaining)
        landing = step == remaining
        rhs_into(z, mu, omega, c, lap, k1)
        for j in range(n):
            tmp[j] = z[j] + step * _A2 * k1[j]
        rhs_into(tmp, mu, omega, c, lap, k2)
        for j in range(n):
            tmp[j] = z[j] + step * (_A3[0] * k1[j] + _A3[1] * k2[j])
        rhs_into(tmp, mu, omega, c, lap, k3)
        for j in range(n):
            tmp[j] = z[j] + step * (_A4[0] * k1[j] + _A4[1] * k2[j] + _A4[2] * k3[j])
        rhs_into(tmp, mu, omega, c, lap, k4)
        for j in range(n):
            tmp[j] = z[j] + step * (_A5[0] * k1[j] + _A5[1] * k2[j] + _A5[2] * k3[j] + _A5[3] * k4[j])
        rhs_into(tmp, mu, omega, c, lap, k5)
        for j in range(n):
            tmp[j] = z[j] + step * (
                _A6[0] * k1[j] + _A6[1] * k2[j] + _A6[2] * k3[j] + _A6[3] * k4[j] + _A6[4] * k5[j]
            )
        rhs_into(tmp, mu, omega, c, lap, k6)
        err = 0.0
        for j in range(n):
            d5 = (_B5[0] * k1[j] + _B5[2] * k3[j] + _B5[3] * k4[j] + _B5[4] * k5[j] + _B5[5] * k6[j])
            d4 = (_B4[0] * k1[j] + _B4[2] * k3[j] + _B4[3] * k4[j] + _B4[4] * k5[j])
            y5[j] = z[j] + step * d5
            scale = atol + rtol * max(abs(z[j]), abs(y5[j]))
            e = abs(step * (d5 - d4)) / scale
            if not (e <= err):
                err = e
        if err <= 1.0 or step <= h_min:
            for j in range(n):
                z[j] = y5[j]
            t += step
            steps += 1
            if not _finite(z):
                return 1, h, steps
        if err == 0.0:
            factor = 5.0
        elif err != err:
            factor = 0.2
        else:
            factor = min(5.0, max(0.2, safety * err ** -0.2))
        h_new = min(h_max, max(h_min, step * factor))
        if landing and err <= 1.0:
            # keep the pre-clamp step size for the next interval
            h_carry = max(h_new, h)
            h = h_carry
        else:
            h = h_new
            h_carry = h_new
    return 0, h_carry, steps
