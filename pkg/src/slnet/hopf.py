"""Hopf normal form of the synchronous reduced system at mu = 0.

On the synchronous manifold every node carries the same (x, y) and the
coupling drops out, leaving

    x' = mu x - omega y - x (x^2 + y^2)
    y' = omega x + mu y - y (x^2 + y^2)

The first Lyapunov-type coefficient C1(0) is built from the second and third
partial derivatives of this field at the origin. Partials come either from
closed-form expressions or from a central-difference engine, which also
serves as the independent check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from .dynamics import RK4, SystemParams, integrate
from .errors import ParameterError
from .graph import NetworkTopology
from .metrics import format_key_values

DEFAULT_H = 1e-3

# 1-D central stencils: offset -> weight, to be divided by h**order
_STENCILS = {
    0: {0: 1.0},
    1: {-1: -0.5, 1: 0.5},
    2: {-1: 1.0, 0: -2.0, 1: 1.0},
    3: {-2: -0.5, -1: 1.0, 1: -1.0, 2: 0.5},
}

PARTIAL_KEYS = ("xx", "xy", "yy", "xxx", "xxy", "xyy", "yyy")


def reduced_rhs(x, y, mu: float, omega: float):
    rho = x * x + y * y
    return mu * x - omega * y - x * rho, omega * x + mu * y - y * rho


def _central(f: Callable, nx: int, ny: int, h: float) -> float:
    total = 0.0
    for (i, wi), (j, wj) in itertools.product(_STENCILS[nx].items(), _STENCILS[ny].items()):
        total += wi * wj * f(i * h, j * h)
    return total / h ** (nx + ny)


def _fd_partials(f: Callable, h: float) -> Dict[str, float]:
    out = {}
    for key in PARTIAL_KEYS:
        nx, ny = key.count("x"), key.count("y")
        coarse = _central(f, nx, ny, h)
        fine = _central(f, nx, ny, h / 2)
        out[key] = (4.0 * fine - coarse) / 3.0
    return out


def partials_at_origin(mu: float = 0.0, omega: float = 1.0, method: str = "analytic",
                       h: float = DEFAULT_H) -> Dict[str, Dict[str, float]]:
    """Second and third partials of (F1, F2) at the origin.

    Returns ``{"F1": {"xx": ..., "xxy": ...}, "F2": {...}}``. The
    ``"finite_difference"`` method uses central stencils at h and h/2 combined
    by one Richardson step.
    """
    if method == "analytic":
        f1 = dict.fromkeys(PARTIAL_KEYS, 0.0)
        f2 = dict.fromkeys(PARTIAL_KEYS, 0.0)
        f1.update(xxx=-6.0, xyy=-2.0)
        f2.update(yyy=-6.0, xxy=-2.0)
        return {"F1": f1, "F2": f2}
    if method in ("finite_difference", "fd"):
        if not 1e-5 <= h <= 1e-2:
            raise ParameterError(f"finite-difference step must lie in [1e-5, 1e-2], got {h}")
        return {
            "F1": _fd_partials(lambda x, y: reduced_rhs(x, y, mu, omega)[0], h),
            "F2": _fd_partials(lambda x, y: reduced_rhs(x, y, mu, omega)[1], h),
        }
    raise ParameterError(f"unknown method {method!r}")


@dataclass(frozen=True)
class HopfCoefficients:
    omega: float
    g11: complex
    g02: complex
    g20: complex
    g21: complex
    C1_0: complex
    dlambda: complex
    p2: float
    zeta2: float
    T2: float

    @property
    def classification(self) -> str:
        if self.p2 > 0:
            return "supercritical"
        if self.p2 < 0:
            return "subcritical"
        return "degenerate"

    @property
    def stability(self) -> str:
        if self.zeta2 < 0:
            return "stable"
        if self.zeta2 > 0:
            return "unstable"
        return "undetermined"

    def as_dict(self) -> dict:
        d = {"omega": self.omega}
        for name in ("g11", "g02", "g20", "g21", "C1_0"):
            v = getattr(self, name)
            d[f"{name}_re"] = v.real
            d[f"{name}_im"] = v.imag
        d.update(p2=self.p2, zeta2=self.zeta2, T2=self.T2,
                 classification=self.classification, stability=self.stability)
        return d

    def to_text(self) -> str:
        return format_key_values(self.as_dict())

    def table(self) -> str:
        def c(z):
            z = complex(z)
            return _num(z.real) if z.imag == 0 else f"{_num(z.real)} {'+' if z.imag >= 0 else '-'} {_num(abs(z.imag))}i"

        rows = [
            ("g11", c(self.g11)), ("g02", c(self.g02)), ("g20", c(self.g20)),
            ("g21", c(self.g21)), ("C1(0)", c(self.C1_0)),
            ("Re C1(0)", _num(self.C1_0.real)), ("Im C1(0)", _num(self.C1_0.imag)),
            ("Re lambda'(0)", _num(self.dlambda.real)), ("Im lambda'(0)", _num(self.dlambda.imag)),
            ("p2", _num(self.p2)), ("zeta2", _num(self.zeta2)), ("T2", _num(self.T2)),
            ("bifurcation", self.classification), ("periodic orbits", self.stability),
        ]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)} = {v}" for k, v in rows) + "\n"


def _num(x: float) -> str:
    x = float(x)
    if x == 0:
        return "0"
    return f"{x:.10g}"


def normal_form(omega: float, mu0: float = 0.0, method: str = "analytic",
                h: float = DEFAULT_H) -> HopfCoefficients:
    """Normal-form coefficients and criticality of the Hopf point at mu = mu0."""
    if omega == 0:
        raise ParameterError("normal form needs omega != 0 (C1 carries a 1/(2 omega) factor)")
    p = partials_at_origin(mu0, omega, method=method, h=h)
    f1, f2 = p["F1"], p["F2"]
    g11 = 0.25 * complex(f1["xx"] + f1["yy"], f2["xx"] + f2["yy"])
    g02 = 0.25 * complex(f1["xx"] - f1["yy"] - 2 * f2["xy"], f2["xx"] - f2["yy"] + 2 * f1["xy"])
    g20 = 0.25 * complex(f1["xx"] - f1["yy"] + 2 * f2["xy"], f2["xx"] - f2["yy"] - 2 * f1["xy"])
    g21 = 0.125 * complex(
        f1["xxx"] + f1["xyy"] + f2["xxy"] + f2["yyy"],
        f2["xxx"] + f2["xyy"] - f1["xxy"] - f1["yyy"],
    )
    c1 = (1j / (2 * omega)) * (g20 * g11 - 2 * abs(g11) ** 2 - abs(g02) ** 2 / 3) + g21 / 2
    # eigenvalues of the linear part are mu +- i omega
    dlam = _eigenvalue_speed(omega, mu0) if method != "analytic" else complex(1.0, 0.0)
    p2 = -c1.real / dlam.real
    zeta2 = 2 * c1.real
    t2 = -(c1.imag + p2 * dlam.imag) / omega
    return HopfCoefficients(float(omega), g11, g02, g20, g21, c1, dlam, p2, zeta2, t2 + 0.0)


def _eigenvalue_speed(omega: float, mu0: float, d: float = 1e-6) -> complex:
    """d lambda / d mu of the upper eigenvalue of the linear part, by central difference."""

    def upper(mu):
        jac = np.array([[mu, -omega], [omega, mu]])
        ev = np.linalg.eigvals(jac)
        return ev[np.argmax(ev.imag * np.sign(omega))]

    return complex((upper(mu0 + d) - upper(mu0 - d)) / (2 * d))


def measure_limit_cycle(mu: float, omega: float, r0: float = 0.01, t_end=None,
                        sample_every: float = 0.01, dt: float = 0.01):
    """Simulate the reduced system and return (radius, period) of the attracting orbit.

    Radius is the mean of |z| over the last quarter of the run; the period is
    the mean spacing of upward zero crossings of x there.
    """
    if t_end is None:
        t_end = 50.0 / abs(mu) + 200.0
    single = NetworkTopology(np.zeros((1, 1), dtype=int), kind="custom")
    params = SystemParams(mu, omega, 0.0, single)
    traj = integrate(np.array([r0 + 0j]), params, t_end, RK4(dt), sample_every,
                     record_from=0.75 * t_end)
    z = traj.states[:, 0]
    radius = float(np.abs(z).mean())
    x = z.real
    up = np.flatnonzero((x[:-1] < 0) & (x[1:] >= 0))
    if up.size < 2:
        return radius, math.nan
    t = traj.times
    # linear interpolation of each crossing time
    tc = t[up] - x[up] * (t[up + 1] - t[up]) / (x[up + 1] - x[up])
    return radius, float(np.diff(tc).mean())
