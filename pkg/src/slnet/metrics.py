"""Synchronization diagnostics, the energy functional, and exponential-rate fits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import Trajectory, rhs_polar
from .errors import ContractError, DomainError, ParameterError

TWO_PI = 2.0 * np.pi
DEFAULT_TAIL_FRACTION = 0.2
MIN_TAIL_SAMPLES = 100
FIT_WINDOW = (1e-10, 1e-2)
FIT_MIN_POINTS = 50
FIT_MIN_R2 = 0.99
DECAY_THRESHOLD = 1e-3


def circular_distance(alpha, beta):
    """min over integers m of |alpha - beta + 2 pi m|, in [0, pi]."""
    d = np.mod(np.asarray(alpha, dtype=float) - np.asarray(beta, dtype=float), TWO_PI)
    out = np.minimum(d, TWO_PI - d)
    return float(out) if out.ndim == 0 else out


def phase_spread(theta) -> np.ndarray:
    """Largest pairwise circular distance across nodes (last axis)."""
    theta = np.asarray(theta, dtype=float)
    d = circular_distance(theta[..., :, None], theta[..., None, :])
    return np.max(d, axis=(-2, -1))


def amplitude_spread(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return r.max(axis=-1) - r.min(axis=-1)


def circular_mean(theta, axis=-1) -> np.ndarray:
    return np.mod(np.angle(np.exp(1j * np.asarray(theta)).mean(axis=axis)), TWO_PI)


def state_norm_R(z) -> np.ndarray:
    """Euclidean norm sqrt(sum_j |z_j|^2) over the last axis."""
    z = np.asarray(z, dtype=complex)
    out = np.sqrt(np.sum(z.real**2 + z.imag**2, axis=-1))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit log(y) = a - rate * t."""

    rate: float
    intercept: float
    r_squared: float
    n_points: int
    established: bool

    @classmethod
    def not_established(cls, n_points=0):
        return cls(math.nan, math.nan, math.nan, n_points, False)


def fit_exponential_rate(t, y, window=FIT_WINDOW, min_points=FIT_MIN_POINTS,
                         min_r2=FIT_MIN_R2) -> RateFit:
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (y >= window[0]) & (y <= window[1]) & np.isfinite(y)
    n = int(mask.sum())
    if n < max(min_points, 3):
        return RateFit.not_established(n)
    tt, ly = t[mask], np.log(y[mask])
    slope, intercept = np.polyfit(tt, ly, 1)
    resid = ly - (slope * tt + intercept)
    ss_tot = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 0.0
    ok = bool(r2 > min_r2 and slope < 0)
    return RateFit(float(-slope), float(intercept), float(r2), n, ok)


@dataclass
class SyncReport:
    """Synchronization diagnostics over the tail window of a trajectory.

    Spread statistics are maxima over the tail window. Phase quantities are
    NaN when some amplitude in the tail is at or below the phase floor.
    """

    t_start: float
    t_end: float
    n_samples: int
    final_amplitude_spread: float
    final_phase_spread: float
    final_rate_spread_r: float
    final_rate_spread_theta: float
    common_phase_estimate: float
    amplitude_target_error: float
    min_amplitude: float
    max_amplitude: float
    exp_rate: RateFit
    phase_defined: bool
    decayed: bool
    sync_tol: float = 1e-4

    @property
    def frequency_amplitude_sync(self) -> bool:
        return bool(
            self.phase_defined
            and self.final_amplitude_spread < self.sync_tol
            and self.final_rate_spread_r < self.sync_tol
            and self.final_rate_spread_theta < self.sync_tol
        )

    @property
    def complete_sync(self) -> bool:
        return self.frequency_amplitude_sync and self.final_phase_spread < self.sync_tol

    @property
    def classification(self) -> str:
        if self.decayed:
            return "decayed"
        return "synchronous" if self.complete_sync else "non-synchronous"

    def as_dict(self) -> dict:
        return {
            "t_start": self.t_start,
            "t_end": self.t_end,
            "n_samples": self.n_samples,
            "amplitude_spread": self.final_amplitude_spread,
            "phase_spread": self.final_phase_spread,
            "rate_spread_r": self.final_rate_spread_r,
            "rate_spread_theta": self.final_rate_spread_theta,
            "common_phase": self.common_phase_estimate,
            "amplitude_target_error": self.amplitude_target_error,
            "min_amplitude": self.min_amplitude,
            "max_amplitude": self.max_amplitude,
            "exp_rate": self.exp_rate.rate,
            "exp_rate_r_squared": self.exp_rate.r_squared,
            "exp_rate_points": self.exp_rate.n_points,
            "exp_rate_established": self.exp_rate.established,
            "phase_defined": self.phase_defined,
            "decayed": self.decayed,
            "sync_tol": self.sync_tol,
            "frequency_amplitude_sync": self.frequency_amplitude_sync,
            "complete_sync": self.complete_sync,
            "classification": self.classification,
        }

    def to_text(self) -> str:
        return format_key_values(self.as_dict())


def format_key_values(values: dict) -> str:
    lines = []
    for k, v in values.items():
        if isinstance(v, bool):
            s = "true" if v else "false"
        elif isinstance(v, (int, np.integer)):
            s = str(int(v))
        elif isinstance(v, (float, np.floating)):
            s = repr(float(v)) if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
        else:
            s = f'"{v}"'
        lines.append(f"{k} = {s}")
    return "\n".join(lines) + "\n"


def _tail_slice(traj: Trajectory, tail_fraction: float) -> slice:
    if not 0 < tail_fraction <= 1:
        raise ParameterError(f"tail_fraction must lie in (0, 1], got {tail_fraction}")
    t0, t1 = traj.times[0], traj.times[-1]
    start = t1 - tail_fraction * (t1 - t0)
    i0 = int(np.searchsorted(traj.times, start - 1e-12))
    if len(traj) - i0 < MIN_TAIL_SAMPLES:
        raise ParameterError(
            f"tail window holds {len(traj) - i0} samples; need at least {MIN_TAIL_SAMPLES}"
        )
    return slice(i0, None)


def sync_report(traj: Trajectory, tail_fraction: float = DEFAULT_TAIL_FRACTION,
                sync_tol: float = 1e-4, decay_threshold: float = DECAY_THRESHOLD) -> SyncReport:
    tail = _tail_slice(traj, tail_fraction)
    params = traj.params
    r_all = traj.amplitudes
    r = r_all[tail]
    times = traj.times[tail]
    amp_spread = float(amplitude_spread(r).max())
    target = float(np.abs(r - math.sqrt(params.mu)).max()) if params.mu > 0 else math.nan
    decayed = bool(r.max() < decay_threshold)
    phase_defined = bool(r.min() > traj.phase_floor)

    if phase_defined:
        theta = traj.wrapped_phases[tail]
        ph_spread = float(phase_spread(theta).max())
        dr, dth = rhs_polar(r, theta, params)
        rate_r = float(amplitude_spread(dr).max())
        rate_th = float(amplitude_spread(dth).max())
        common = float(circular_mean(theta[-1]))
    else:
        ph_spread = rate_r = rate_th = common = math.nan

    # rate fit uses the whole run; early samples may have undefined phases
    ok = np.all(r_all > traj.phase_floor, axis=1)
    if ok.sum() >= 3:
        spread_series = phase_spread(traj.wrapped_phases[ok])
        fit = fit_exponential_rate(traj.times[ok], spread_series)
    else:
        fit = RateFit.not_established()

    return SyncReport(
        t_start=float(times[0]),
        t_end=float(times[-1]),
        n_samples=int(times.size),
        final_amplitude_spread=amp_spread,
        final_phase_spread=ph_spread,
        final_rate_spread_r=rate_r,
        final_rate_spread_theta=rate_th,
        common_phase_estimate=common,
        amplitude_target_error=target,
        min_amplitude=float(r.min()),
        max_amplitude=float(r.max()),
        exp_rate=fit,
        phase_defined=phase_defined,
        decayed=decayed,
        sync_tol=sync_tol,
    )


# ---------------------------------------------------------------------------
# energy functional
# ---------------------------------------------------------------------------

@dataclass
class EnergyRecord:
    """Running energy integral and the two terms of its balance identity.

    ``term_II_integral`` is evaluated in closed form as the change of
    (c/2) sum_jk a_jk r_j r_k cos(theta_k - theta_j); the other two are
    trapezoidal integrals of sampled integrands.
    """

    times: np.ndarray
    H: np.ndarray
    term_I_integral: np.ndarray
    term_II_integral: np.ndarray
    rate_r: np.ndarray = field(repr=False)
    rate_theta: np.ndarray = field(repr=False)

    @property
    def balance_residual(self) -> np.ndarray:
        return np.abs(self.H - self.term_I_integral - self.term_II_integral)

    @property
    def relative_residual(self) -> float:
        return float(self.balance_residual[-1] / max(self.H[-1], 1.0))


def _cumtrapz(y, t):
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def corotating(traj: Trajectory) -> Trajectory:
    """Same trajectory viewed in the frame rotating with the common frequency."""
    params = traj.params
    if not params.identical_frequencies:
        raise ContractError("co-rotating frame requires identical natural frequencies")
    w = params.omega[0]
    states = traj.states * np.exp(-1j * w * traj.times)[:, None]
    return Trajectory(traj.times, states, params.with_omega(0.0), traj.phase_floor)


def energy_functional(traj: Trajectory, corotating_frame: bool = False) -> EnergyRecord:
    """Energy integral H(t) = int sum_j (rdot_j^2 + (r_j thetadot_j)^2) and its balance terms.

    Requires all natural frequencies to be zero, unless ``corotating_frame``
    is set and they are identical, in which case the trajectory is first
    transformed to the co-rotating frame.
    """
    params = traj.params
    if np.any(params.omega != 0):
        if not corotating_frame:
            raise ContractError("energy functional needs omega = 0 (pass corotating_frame=True)")
        traj = corotating(traj)
        params = traj.params
    r = traj.amplitudes
    if np.any(r <= traj.phase_floor):
        raise DomainError("energy functional needs all amplitudes above the phase floor")
    theta = np.angle(traj.states)
    dr, dth = rhs_polar(r, theta, params)
    t = traj.times
    integrand_H = np.sum(dr**2 + (r * dth) ** 2, axis=-1)
    deg = params.topology.degrees
    integrand_I = np.sum(((params.mu - r**2) * r - params.c * deg * r) * dr, axis=-1)
    a = params.topology.adjacency
    dtheta = theta[:, None, :] - theta[:, :, None]
    phi = 0.5 * params.c * np.sum(a * r[:, :, None] * r[:, None, :] * np.cos(dtheta), axis=(-2, -1))
    return EnergyRecord(
        times=t,
        H=_cumtrapz(integrand_H, t),
        term_I_integral=_cumtrapz(integrand_I, t),
        term_II_integral=phi - phi[0],
        rate_r=dr,
        rate_theta=dth,
    )


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def write_metrics_csv(traj: Trajectory, path, energy: Optional[EnergyRecord] = None) -> None:
    """Per-sample series: t, phase_spread, amplitude_spread, R[, H, residual]."""
    r = traj.amplitudes
    defined = np.all(r > traj.phase_floor, axis=1)
    ph = np.full(len(traj), np.nan)
    ph[defined] = phase_spread(traj.wrapped_phases[defined])
    amp = amplitude_spread(r)
    big_r = state_norm_R(traj.states)
    header = ["t", "phase_spread", "amplitude_spread", "R"]
    if energy is not None:
        header += ["H", "residual"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, t in enumerate(traj.times):
            row = [t, ph[i], amp[i], big_r[i]]
            if energy is not None:
                row += [energy.H[i], energy.balance_residual[i]]
            w.writerow([f"{v:.17g}" for v in row])
