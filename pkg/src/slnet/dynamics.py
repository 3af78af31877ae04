"""Stuart-Landau network dynamics.

    dz_j/dt = (mu + i omega_j) z_j - |z_j|^2 z_j + c sum_k a_jk (z_k - z_j)

Integration always happens in complex coordinates; the polar form is a
diagnostic view only, since the phase is undefined wherever r_j = 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .errors import (
    DivergenceError,
    DomainError,
    ParameterError,
    PhaseUndefinedError,
    UndersampledError,
)
from .graph import NetworkTopology, laplacian

PHASE_FLOOR = 1e-8
DEFAULT_SAMPLE_EVERY = 0.01


@dataclass(frozen=True, eq=False)
class SystemParams:
    """Everything that defines the network ODE.

    ``omega`` may be given as a scalar; it is broadcast to one frequency per node.
    """

    mu: float
    omega: Union[float, Sequence[float], np.ndarray]
    c: float
    topology: NetworkTopology

    def __post_init__(self):
        n = self.topology.n_nodes
        omega = np.array(self.omega, dtype=float)
        if omega.ndim == 0:
            omega = np.full(n, float(omega))
        if omega.shape != (n,):
            raise ParameterError(f"omega must have length {n}, got shape {omega.shape}")
        if self.c < 0:
            raise ParameterError(f"coupling strength must be >= 0, got {self.c}")
        if not (math.isfinite(self.mu) and math.isfinite(self.c) and np.isfinite(omega).all()):
            raise ParameterError("parameters must be finite")
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "c", float(self.c))

    @property
    def n_nodes(self) -> int:
        return self.topology.n_nodes

    @property
    def identical_frequencies(self) -> bool:
        return bool(np.all(self.omega == self.omega[0]))

    @cached_property
    def laplacian(self) -> np.ndarray:
        lap = laplacian(self.topology)
        lap.setflags(write=False)
        return lap

    def with_mu(self, mu: float) -> "SystemParams":
        return replace(self, mu=mu)

    def with_omega(self, omega) -> "SystemParams":
        return replace(self, omega=omega)


# ---------------------------------------------------------------------------
# initial conditions
# ---------------------------------------------------------------------------

def polar_state(r, theta) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return r * np.exp(1j * theta)


def random_polar_state(n: int, r, theta_range=(0.0, 2 * np.pi), seed: int = 0) -> np.ndarray:
    """Amplitudes ``r`` (scalar or per node), phases uniform on ``theta_range``.

    Phases come from numpy's PCG64 generator seeded with ``seed``, so a given
    seed reproduces bit-identical states.
    """
    a, b = theta_range
    if not b > a:
        raise ParameterError(f"empty phase interval ({a}, {b})")
    rng = np.random.Generator(np.random.PCG64(seed))
    theta = rng.uniform(a, b, size=n)
    r = np.broadcast_to(np.asarray(r, dtype=float), (n,))
    return polar_state(r, theta)


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def rhs_complex(z, params: SystemParams) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    local = (params.mu + 1j * params.omega) * z - (z.real**2 + z.imag**2) * z
    return local - params.c * (z @ params.laplacian.T)


def rhs_polar(r, theta, params: SystemParams):
    """Amplitude and phase rates. Accepts arrays with node index on the last axis."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(r <= 0):
        raise DomainError("polar form requires all amplitudes r_j > 0")
    a = params.topology.adjacency
    # [..., j, k] -> theta_k - theta_j
    dth = theta[..., None, :] - theta[..., :, None]
    rk = r[..., None, :]
    rj = r[..., :, None]
    dr = (params.mu - r**2) * r + params.c * np.sum(a * (rk * np.cos(dth) - rj), axis=-1)
    dtheta = params.omega + params.c * np.sum(a * (rk / rj) * np.sin(dth), axis=-1)
    return dr, dtheta


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RK4:
    dt: float = 1e-3

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True)
class RKF45:
    atol: float = 1e-9
    rtol: float = 1e-9
    safety: float = 0.9
    h_min: float = 1e-8
    h_max: float = 0.1

    def __post_init__(self):
        if not (self.atol > 0 and self.rtol > 0):
            raise ParameterError("RKF45 tolerances must be positive")
        if not 0 < self.h_min <= self.h_max:
            raise ParameterError("need 0 < h_min <= h_max")


Scheme = Union[RK4, RKF45]


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    params: SystemParams
    phase_floor: float = PHASE_FLOOR
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        if self.states.shape != (self.times.size, self.params.n_nodes):
            raise ParameterError("states must have shape (len(times), N)")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ParameterError("times must be strictly increasing")

    def __len__(self):
        return self.times.size

    @cached_property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.states)

    @cached_property
    def wrapped_phases(self) -> np.ndarray:
        return np.mod(np.angle(self.states), 2 * np.pi)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1].copy()

    def window(self, start: float = -np.inf, stop: float = np.inf) -> "Trajectory":
        mask = (self.times >= start) & (self.times <= stop)
        return Trajectory(self.times[mask], self.states[mask], self.params, self.phase_floor)

    def to_csv(self, path, polar: bool = False) -> None:
        write_trajectory_csv(self, path, polar=polar)


def _sample_grid(t_end: float, sample_every: float) -> np.ndarray:
    n = int(math.floor(t_end / sample_every + 1e-9))
    grid = np.arange(n + 1) * sample_every
    if t_end - grid[-1] > 1e-9 * max(1.0, t_end):
        return np.append(grid, t_end)
    grid[-1] = t_end
    return grid


def integrate(
    initial,
    params: SystemParams,
    t_end: float,
    scheme: Optional[Scheme] = None,
    sample_every: float = DEFAULT_SAMPLE_EVERY,
    record_from: float = 0.0,
) -> Trajectory:
    """Integrate the network from ``initial`` over [0, t_end].

    States are recorded every ``sample_every`` time units from ``record_from``
    onward (earlier samples are integrated but discarded). For RK4 each sample
    interval is split into equal steps no larger than ``dt``.

    Raises DivergenceError if the state stops being finite.
    """
    scheme = RK4() if scheme is None else scheme
    if not t_end > 0:
        raise ParameterError(f"t_end must be positive, got {t_end}")
    if not sample_every > 0:
        raise ParameterError(f"sample_every must be positive, got {sample_every}")
    z = np.array(initial, dtype=np.complex128).ravel()
    if z.shape != (params.n_nodes,):
        raise ParameterError(f"initial state must have {params.n_nodes} entries, got {z.size}")
    if not np.isfinite(z).all():
        raise ParameterError("initial state must be finite")

    grid = _sample_grid(t_end, sample_every)
    keep = grid >= record_from - 1e-12
    times = grid[keep]
    states = np.empty((times.size, z.size), dtype=np.complex128)
    omega = np.ascontiguousarray(params.omega, dtype=np.float64)
    lap = np.ascontiguousarray(params.laplacian, dtype=np.float64)
    mu, c = params.mu, params.c

    out = 0
    if keep[0]:
        states[0] = z
        out = 1
    h = min(scheme.h_max, sample_every) if isinstance(scheme, RKF45) else None
    total_steps = 0
    for i in range(1, grid.size):
        span = grid[i] - grid[i - 1]
        if isinstance(scheme, RK4):
            nsub = max(1, math.ceil(span / scheme.dt - 1e-9))
            ok = _kernels.rk4_advance(z, mu, omega, c, lap, span / nsub, nsub)
            total_steps += nsub
        else:
            status, h, nsteps = _kernels.rkf45_advance(
                z, mu, omega, c, lap, span, h,
                scheme.atol, scheme.rtol, scheme.safety, scheme.h_min, scheme.h_max,
            )
            ok = status == 0
            total_steps += nsteps
        if not ok or not np.isfinite(z).all():
            raise DivergenceError(grid[i])
        if keep[i]:
            states[out] = z
            out += 1
    return Trajectory(times, states, params, stats={"steps": total_steps})


# ---------------------------------------------------------------------------
# phases
# ---------------------------------------------------------------------------

def unwrap_phases(traj: Trajectory, phase_floor: Optional[float] = None) -> np.ndarray:
    """Continuous phases theta_j(t) with exp(i theta_j) = z_j / r_j.

    Raises PhaseUndefinedError if any amplitude drops to ``phase_floor`` or
    below, and UndersampledError if the exact phase rate implies an increment
    of pi or more between consecutive samples.
    """
    floor = traj.phase_floor if phase_floor is None else phase_floor
    r = traj.amplitudes
    low = r <= floor
    if low.any():
        i, j = np.argwhere(low)[0]
        raise PhaseUndefinedError(int(j) + 1, float(traj.times[i]), float(r[i, j]))
    wrapped = np.angle(traj.states)
    if len(traj) > 1:
        _, dtheta = rhs_polar(r, wrapped, traj.params)
        dt = np.diff(traj.times)[:, None]
        bound = np.maximum(np.abs(dtheta[:-1]), np.abs(dtheta[1:])) * dt
        if bound.max() >= np.pi:
            i, j = np.unravel_index(np.argmax(bound), bound.shape)
            raise UndersampledError(
                f"node {j + 1}: phase may advance {bound[i, j]:.3f} rad between "
                f"t={traj.times[i]:.6g} and t={traj.times[i + 1]:.6g}; sample more densely"
            )
    return np.unwrap(wrapped, axis=0)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def write_trajectory_csv(traj: Trajectory, path, polar: bool = False) -> None:
    n = traj.params.n_nodes
    header = ["t"]
    for j in range(1, n + 1):
        header += [f"x_{j}", f"y_{j}"]
    if polar:
        header += [f"r_{j}" for j in range(1, n + 1)]
        header += [f"theta_{j}" for j in range(1, n + 1)]
        theta = unwrap_phases(traj)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, t in enumerate(traj.times):
            z = traj.states[i]
            row = [f"{t:.17g}"]
            for v in z:
                row += [f"{v.real:.17g}", f"{v.imag:.17g}"]
            if polar:
                row += [f"{x:.17g}" for x in traj.amplitudes[i]]
                row += [f"{x:.17g}" for x in theta[i]]
            w.writerow(row)
