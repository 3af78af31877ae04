"""Sufficient conditions for anti-amplitude-death and synchronization.

Each check returns a :class:`Certificate` listing every clause with its
operands and margin. Unsatisfied clauses are reported, never raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import SystemParams
from .errors import NoRootError, ParameterError
from .graph import d_max, laplacian_spectrum
from .metrics import format_key_values

ANTI_DEATH = "AntiDeath"
ORIGIN_UNSTABLE = "OriginUnstable"
HALF_CIRCLE_SYNC = "HalfCircleSync"
QUARTER_CIRCLE_SYNC = "QuarterCircleSync"


@dataclass(frozen=True)
class Clause:
    id: str
    description: str
    lhs: float
    rhs: float
    margin: float
    ok: bool


@dataclass
class Certificate:
    kind: str
    clauses: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return not self.violated_clauses

    @property
    def violated_clauses(self) -> list:
        return [c.id for c in self.clauses if not c.ok]

    def clause(self, clause_id: str) -> Clause:
        for c in self.clauses:
            if c.id == clause_id:
                return c
        raise KeyError(clause_id)

    def _add(self, id, description, lhs, rhs, margin, ok):
        self.clauses.append(Clause(id, description, float(lhs), float(rhs), float(margin), bool(ok)))

    def to_text(self) -> str:
        lines = [f"[{self.kind}]", f"satisfied = {'true' if self.satisfied else 'false'}"]
        for c in self.clauses:
            lines.append(
                f"clause {c.id}: {c.description} | lhs = {c.lhs!r} rhs = {c.rhs!r} "
                f"margin = {c.margin!r} -> {'ok' if c.ok else 'VIOLATED'}"
            )
        if self.witnesses:
            lines.append(format_key_values(self.witnesses).rstrip("\n"))
        return "\n".join(lines) + "\n"


def c_star(mu: float, n: int, lambda_max: float) -> float:
    """Coupling threshold 2 mu / (3 sqrt(3N) lambda_max) for amplitude persistence."""
    if not (mu > 0 and lambda_max > 0 and n >= 1):
        raise ParameterError("c_star needs mu > 0, N >= 1 and lambda_max > 0")
    return 2.0 * mu / (3.0 * math.sqrt(3.0 * n) * lambda_max)


def r_star(mu: float, n: int, c: float, lambda_max: float, tol: float = 1e-12) -> float:
    """Smallest positive root of mu x - x^3 = c sqrt(N mu) lambda_max, by bisection.

    For c = 0 the root degenerates to 0 and 0 is returned.
    """
    if c < 0:
        raise ParameterError(f"c must be >= 0, got {c}")
    cs = c_star(mu, n, lambda_max)
    if c == 0:
        return 0.0
    if c >= cs:
        raise NoRootError(f"c = {c} >= c_star = {cs}: mu x - x^3 never reaches the coupling level")
    rhs = c * math.sqrt(n * mu) * lambda_max

    def f(x):
        return mu * x - x**3 - rhs

    lo, hi = 0.0, math.sqrt(mu / 3.0)
    # f(lo) < 0 < f(hi) by the precondition; f is increasing on [lo, hi]
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def principal_phases(z) -> np.ndarray:
    """arg(z) mapped to [0, 2 pi); NaN where z = 0."""
    z = np.asarray(z, dtype=complex)
    th = np.mod(np.angle(z), 2 * np.pi)
    return np.where(z == 0, np.nan, th)


def _lambda_max(params: SystemParams) -> float:
    return laplacian_spectrum(params.laplacian).lambda_max


def _phase_clause(cert: Certificate, initial, upper: float, label: str):
    th = principal_phases(initial)
    if np.isnan(th).any():
        cert._add("phases", f"all initial phases in (0, {label}) (some z_j = 0)", math.nan, upper,
                  -math.inf, False)
        return
    margin = float(min(th.min(), upper - th.max()))
    cert._add("phases", f"all initial phases in (0, {label})", th.max(), upper, margin, margin > 0)
    cert.witnesses["theta_min"] = float(th.min())
    cert.witnesses["theta_max"] = float(th.max())


def _identical_clause(cert: Certificate, params: SystemParams):
    spread = float(params.omega.max() - params.omega.min())
    cert._add("identical_omega", "natural frequencies identical", spread, 0.0, -spread, spread == 0)


def check_antideath(initial, params: SystemParams) -> Certificate:
    """Clauses (i) c < c_star, (ii) sum r_j(0)^2 <= N mu, (iii) r_j(0) > r_star."""
    if not params.mu > 0:
        raise ParameterError(f"anti-death certificate needs mu > 0, got {params.mu}")
    n = params.n_nodes
    lam_max = _lambda_max(params)
    cs = c_star(params.mu, n, lam_max)
    r0 = np.abs(np.asarray(initial, dtype=complex))
    cert = Certificate(ANTI_DEATH)
    cert.witnesses.update(lambda_max=lam_max, c_star=cs)

    cert._add("i", "c < c_star", params.c, cs, cs - params.c, params.c < cs)

    sum_sq = float(np.sum(r0**2))
    cap = n * params.mu
    cert._add("ii", "sum r_j(0)^2 <= N mu", sum_sq, cap, cap - sum_sq, sum_sq <= cap)

    try:
        rs: Optional[float] = r_star(params.mu, n, params.c, lam_max)
    except NoRootError:
        rs = None
    if rs is None:
        cert._add("iii", "min r_j(0) > r_star (r_star undefined: clause i fails)",
                  r0.min(), math.nan, -math.inf, False)
    else:
        m = float(r0.min() - rs)
        cert._add("iii", "min r_j(0) > r_star", r0.min(), rs, m, m > 0)
        cert.witnesses["r_star"] = rs
    cert.witnesses["sum_r0_sq"] = sum_sq
    cert.witnesses["min_r0"] = float(r0.min())
    return cert


def check_origin_unstable(params: SystemParams) -> Certificate:
    """mu > c lambda_max(L): every mode of the linearization at z = 0 grows."""
    spec = laplacian_spectrum(params.laplacian)
    margin = params.mu - params.c * spec.lambda_max
    cert = Certificate(ORIGIN_UNSTABLE)
    cert._add("spectral", "mu > c lambda_max(L)", params.mu, params.c * spec.lambda_max,
              margin, margin > 0)
    growth = params.mu - params.c * spec.eigenvalues
    cert.witnesses.update(
        lambda_max=spec.lambda_max,
        margin=margin,
        min_mode_growth=float(growth.min()),
    )
    return cert


def check_half_circle_sync(initial, params: SystemParams) -> Certificate:
    """Anti-death clauses, identical frequencies, and initial phases in (0, pi)."""
    base = check_antideath(initial, params)
    cert = Certificate(HALF_CIRCLE_SYNC, list(base.clauses), dict(base.witnesses))
    _identical_clause(cert, params)
    _phase_clause(cert, initial, math.pi, "pi")
    return cert


def check_quarter_circle_sync(initial, params: SystemParams) -> Certificate:
    """mu > c d_max, identical frequencies, and initial phases in (0, pi/2).

    No c_star / r_star requirement: the amplitude floor here is
    min(r_j(0), sqrt(mu - c d_max)).
    """
    dm = d_max(params.topology)
    cert = Certificate(QUARTER_CIRCLE_SYNC)
    margin = params.mu - params.c * dm
    cert._add("degree", "mu > c d_max", params.mu, params.c * dm, margin, margin > 0)
    cert.witnesses["d_max"] = float(dm)
    cert.witnesses["margin"] = margin
    _identical_clause(cert, params)
    _phase_clause(cert, initial, math.pi / 2, "pi/2")
    if margin > 0:
        r0 = np.abs(np.asarray(initial, dtype=complex))
        cert.witnesses["amplitude_floor"] = float(min(r0.min(), math.sqrt(margin)))
    return cert


def check_all(initial, params: SystemParams) -> list:
    certs = []
    if params.mu > 0:
        certs.append(check_antideath(initial, params))
    certs.append(check_origin_unstable(params))
    if params.mu > 0:
        certs.append(check_half_circle_sync(initial, params))
    certs.append(check_quarter_circle_sync(initial, params))
    return certs
