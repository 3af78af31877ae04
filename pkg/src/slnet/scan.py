"""Parameter sweeps in mu: simulated branch amplitudes plus analytic markers.

Only the synchronous branch is reproduced by simulation. Critical values of
the non-synchronous modes come from :mod:`slnet.spectral`.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dynamics import RK4, Scheme, SystemParams, integrate, random_polar_state
from .errors import DivergenceError, OnsetError, ParameterError, UnsupportedTopologyError
from .metrics import DECAY_THRESHOLD, MIN_TAIL_SAMPLES, sync_report
from .spectral import HopfCriticalityTable, classify_criticalities, ring_range


@dataclass(frozen=True)
class Perturbation:
    """Initial condition near the origin.

    Each node starts at radius ``scale`` with a phase drawn from PCG64(seed),
    or, with ``synchronous=True``, every node shares the first drawn phase.
    """

    scale: float = 1e-3
    seed: int = 0
    synchronous: bool = False

    def state(self, n: int) -> np.ndarray:
        z = random_polar_state(n, self.scale, (0.0, 2 * np.pi), self.seed)
        if self.synchronous:
            z = np.full(n, z[0])
        return z


@dataclass(frozen=True)
class ScanConfig:
    mu_grid: Sequence[float]
    params: SystemParams  # mu is overwritten per grid point
    transient_T: float = 200.0
    measure_T: float = 50.0
    perturbation: Perturbation = field(default_factory=Perturbation)
    observable_node: int = 1  # 1-based
    observable_coord: str = "x"
    scheme: Scheme = field(default_factory=lambda: RK4(0.02))
    sample_every: float = 0.05
    growth_times: Optional[float] = 50.0
    max_transient_T: float = 10_000.0
    amplitude_threshold: float = DECAY_THRESHOLD
    sync_tol: float = 1e-3
    workers: int = 1

    def __post_init__(self):
        grid = np.asarray(self.mu_grid, dtype=float)
        if grid.size == 0:
            raise ParameterError("mu grid is empty")
        if np.any(np.diff(grid) <= 0):
            raise ParameterError("mu grid must be strictly increasing")
        if not (self.transient_T > 0 and self.measure_T > 0):
            raise ParameterError("transient_T and measure_T must be positive")
        if self.measure_T / self.sample_every + 1 < MIN_TAIL_SAMPLES:
            raise ParameterError(
                f"measurement window holds fewer than {MIN_TAIL_SAMPLES} samples; "
                "lengthen measure_T or reduce sample_every"
            )
        if not 1 <= self.observable_node <= self.params.n_nodes:
            raise ParameterError(f"observable node must be in 1..{self.params.n_nodes}")
        if self.observable_coord not in ("x", "y"):
            raise ParameterError("observable coordinate must be 'x' or 'y'")
        object.__setattr__(self, "mu_grid", tuple(float(m) for m in grid))

    def transient_for(self, mu: float) -> float:
        """Transient length; with ``growth_times`` set, at least growth_times / |mu|."""
        t = self.transient_T
        if self.growth_times is not None and mu != 0:
            t = max(t, self.growth_times / abs(mu))
        if self.growth_times is not None and mu == 0:
            t = self.max_transient_T
        return min(t, self.max_transient_T)


@dataclass(frozen=True)
class BranchPoint:
    mu: float
    amplitude: float
    sync_classification: str  # synchronous | non-synchronous | decayed | diverged
    message: str = ""

    @property
    def diverged(self) -> bool:
        return self.sync_classification == "diverged"


@dataclass
class ScanResult:
    points: list
    table: Optional[HopfCriticalityTable]

    def branch(self, classification: str) -> list:
        return [p for p in self.points if p.sync_classification == classification]

    def write(self, out_dir) -> list:
        """Write scan.csv, markers.csv (rings only) and one two-column .dat per branch."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        written = [out / "scan.csv"]
        with open(written[0], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["mu", "amplitude", "classification"])
            for p in self.points:
                w.writerow([f"{p.mu:.17g}", f"{p.amplitude:.17g}", p.sync_classification])
        if self.table is not None:
            path = out / "markers.csv"
            self.table.write_markers_csv(path)
            written.append(path)
        for cls in sorted({p.sync_classification for p in self.points}):
            path = out / f"branch_{cls.replace('-', '_')}.dat"
            with open(path, "w") as fh:
                fh.write("# mu amplitude\n")
                for p in self.branch(cls):
                    fh.write(f"{p.mu:.17g} {p.amplitude:.17g}\n")
            written.append(path)
        return written


def scan_point(cfg: ScanConfig, mu: float) -> BranchPoint:
    params = cfg.params.with_mu(mu)
    z0 = cfg.perturbation.state(params.n_nodes)
    t_tr = cfg.transient_for(mu)
    t_end = t_tr + cfg.measure_T
    try:
        traj = integrate(z0, params, t_end, cfg.scheme, cfg.sample_every, record_from=t_tr)
    except DivergenceError as exc:
        return BranchPoint(mu, math.nan, "diverged", str(exc))
    z = traj.states[:, cfg.observable_node - 1]
    obs = z.real if cfg.observable_coord == "x" else z.imag
    amplitude = max(0.0, float(obs.max()))
    if amplitude < cfg.amplitude_threshold:
        return BranchPoint(mu, amplitude, "decayed")
    rep = sync_report(traj, tail_fraction=1.0, sync_tol=cfg.sync_tol,
                      decay_threshold=cfg.amplitude_threshold)
    return BranchPoint(mu, amplitude, rep.classification)


def _scan_point_args(args):
    return scan_point(*args)


def run_scan(cfg: ScanConfig) -> ScanResult:
    """Simulate every grid point and attach the analytic criticality table for rings."""
    jobs = [(cfg, mu) for mu in cfg.mu_grid]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            points = list(pool.map(_scan_point_args, jobs))
    else:
        points = [scan_point(cfg, mu) for mu in cfg.mu_grid]
    points.sort(key=lambda p: p.mu)
    try:
        s = ring_range(cfg.params.topology)
        table = classify_criticalities(cfg.params.n_nodes, s, cfg.params.c) if cfg.params.c > 0 else None
    except UnsupportedTopologyError:
        table = None
    return ScanResult(points, table)


def onset_estimate(points: Sequence[BranchPoint], threshold: float = DECAY_THRESHOLD,
                   n_fit: int = 3) -> float:
    """Critical mu where amplitude^2, locally linear in mu on a square-root branch, hits zero.

    A line is fitted through amplitude^2 of the lowest ``n_fit`` oscillating
    points above the last non-oscillating one. With a single oscillating
    point the line through it and the last non-oscillating point is used.
    """
    pts = sorted((p for p in points if not p.diverged), key=lambda p: p.mu)
    osc = [p.amplitude > threshold for p in pts]
    if not any(osc) or all(osc):
        raise OnsetError("scan does not bracket the onset of oscillations")
    last_quiet = max(i for i, o in enumerate(osc) if not o)
    first = last_quiet + 1
    if first >= len(pts):
        raise OnsetError("no oscillating points above the last decayed point")
    above = pts[first:first + n_fit]
    if len(above) == 1:
        lo, hi = pts[last_quiet], above[0]
        mus = np.array([lo.mu, hi.mu])
        amp2 = np.array([lo.amplitude, hi.amplitude]) ** 2
    else:
        mus = np.array([p.mu for p in above])
        amp2 = np.array([p.amplitude for p in above]) ** 2
    slope, intercept = np.polyfit(mus, amp2, 1)
    if slope <= 0:
        raise OnsetError("amplitude^2 does not increase with mu near the onset")
    return float(-intercept / slope)
