"""Block-circulant linearization of ring networks at the origin.

For an s-nearest-neighbour ring the 2N x 2N Jacobian at z = 0 is block
circulant with 2x2 blocks A_1..A_N (block row j, column k holds
A_{1 + (k - j) mod N}). Conjugating by F_N (x) F_2 splits it into N
independent 2x2 blocks

    M_1 = [[mu, w], [-w, mu]],   M_j = [[mu - mu_j, w], [-w, mu - mu_j]],

so mode j turns critical at mu = mu_j with eigenvalues +-i w. Block indices
j are 1-based throughout, matching the Fourier mode j - 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import SystemParams
from .errors import ConsistencyError, ParameterError, UnsupportedTopologyError
from .graph import NetworkTopology

BLOCK_TOL = 1e-10
GROUP_TOL = 1e-9


def fourier_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix, entry (j, k) = w^{jk} / sqrt(n) with w = exp(-2 pi i / n)."""
    if n < 1:
        raise ParameterError(f"order must be >= 1, got {n}")
    idx = np.arange(n)
    # reduce the exponent mod n first so large products stay exact
    return np.exp(-2j * np.pi * (np.outer(idx, idx) % n) / n) / math.sqrt(n)


def ring_range(topology: NetworkTopology) -> int:
    """Coupling range s of a ring-like (circulant) topology."""
    n = topology.n_nodes
    if topology.kind == "ring":
        return int(topology.s)
    if topology.kind == "complete" and n >= 3:
        return n // 2
    raise UnsupportedTopologyError(
        f"block-circulant analysis needs a ring topology, got {topology.name}"
    )


def is_all_to_all(n: int, s: int) -> bool:
    return s == n // 2


def _check_ring(n: int, s: int):
    if n < 3:
        raise ParameterError(f"ring needs N >= 3, got {n}")
    if not 1 <= s <= n // 2:
        raise ParameterError(f"s must satisfy 1 <= s <= {n // 2}, got {s}")


@dataclass(frozen=True)
class BlockCirculantJacobian:
    n: int
    blocks: np.ndarray  # (N, 2, 2), blocks[k] is A_{k+1}

    @property
    def assembled(self) -> np.ndarray:
        n = self.n
        out = np.zeros((2 * n, 2 * n), dtype=self.blocks.dtype)
        for j in range(n):
            for k in range(n):
                out[2 * j:2 * j + 2, 2 * k:2 * k + 2] = self.blocks[(k - j) % n]
        return out

    def block(self, k: int) -> np.ndarray:
        """A_k with 1-based k."""
        return self.blocks[k - 1]


def build_jacobian_blocks(params: SystemParams) -> BlockCirculantJacobian:
    """Blocks of the linearization at the origin for a ring topology."""
    s = ring_range(params.topology)
    if not params.identical_frequencies:
        raise ParameterError("block-circulant structure needs identical natural frequencies")
    n = params.n_nodes
    w = float(params.omega[0])
    c = params.c
    degree = n - 1 if is_all_to_all(n, s) else 2 * s
    blocks = np.zeros((n, 2, 2))
    blocks[0] = [[params.mu - degree * c, -w], [w, params.mu - degree * c]]
    for ell in range(1, n):
        if min(ell, n - ell) <= s:
            blocks[ell] = c * np.eye(2)
    return BlockCirculantJacobian(n, blocks)


def numerical_blocks(jac: BlockCirculantJacobian) -> np.ndarray:
    """M_1..M_N from the blocks via B_{k-1} = F_2^* A_k F_2 and a DFT over k.

    M_j = sum_k conj(sqrt(N) F_N)[j, k] B_k, which is the convention that
    reconstructs any block-circulant matrix with the block layout above. For
    symmetric rings (A_{1+l} = A_{N+1-l}) conjugating F_N makes no difference.
    """
    n = jac.n
    f2 = fourier_matrix(2)
    b = np.einsum("ij,kjl,lm->kim", f2.conj().T, jac.blocks, f2)
    fn = math.sqrt(n) * fourier_matrix(n).conj()
    return np.einsum("jk,kab->jab", fn, b)


def mu_critical(j: int, n: int, s: int, c: float) -> float:
    """Critical value of mu at which block M_j has eigenvalues +-i omega (j = 2..N).

    All-to-all coupling (s = floor(N/2)) gives N c for every j.
    """
    _check_ring(n, s)
    if not 2 <= j <= n:
        raise ParameterError(f"mode index j must be in 2..{n}, got {j}")
    if is_all_to_all(n, s):
        return n * c
    x = (j - 1) * math.pi / n
    den = math.sin(x)
    assert den != 0.0
    return 2.0 * c * (s - math.sin(s * x) * math.cos((s + 1) * x) / den)


def closed_form_blocks(n: int, s: int, c: float, mu: float, omega: float) -> np.ndarray:
    out = np.empty((n, 2, 2))
    for j in range(1, n + 1):
        mj = 0.0 if j == 1 else mu_critical(j, n, s, c)
        out[j - 1] = [[mu - mj, omega], [-omega, mu - mj]]
    return out


def pair_partner(j: int, n: int) -> int:
    """Index N + 2 - j sharing mu_j with mode j (j itself when unpaired)."""
    return n + 2 - j


@dataclass(frozen=True)
class CriticalEntry:
    mu: float
    modes: tuple
    pairs: int  # count of imaginary eigenvalue pairs at this mu

    @property
    def simple(self) -> bool:
        return self.pairs == 1


@dataclass(frozen=True)
class HopfCriticalityTable:
    n: int
    s: int
    c: float
    entries: tuple

    @property
    def all_to_all(self) -> bool:
        return is_all_to_all(self.n, self.s)

    def entry_for_mode(self, j: int) -> CriticalEntry:
        for e in self.entries:
            if j in e.modes:
                return e
        raise KeyError(j)

    @property
    def additional(self) -> tuple:
        return tuple(e for e in self.entries if 1 not in e.modes)

    def to_text(self) -> str:
        lines = [f"ring N={self.n}, s={self.s}, c={self.c!r}"
                 + (" (all-to-all)" if self.all_to_all else "")]
        for e in self.entries:
            names = "=".join(f"mu_{j}" for j in e.modes) if 1 not in e.modes else "mu"
            if e.simple:
                kind = "simple"
            elif self.all_to_all:
                kind = "highly degenerate"
            else:
                kind = "degenerate, not simple"
            if 1 in e.modes:
                lines.append(f"mu = 0: synchronous mode 1, {kind} Hopf point")
                continue
            lines.append(
                f"{names} = {e.mu:.6g}: modes {', '.join(map(str, e.modes))}; "
                f"{e.pairs} imaginary pair{'s' if e.pairs != 1 else ''}; {kind}"
            )
        return "\n".join(lines) + "\n"

    def write_markers_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["mu_crit", "modes", "simple"])
            for e in self.entries:
                w.writerow([f"{e.mu:.17g}", " ".join(map(str, e.modes)), str(e.simple).lower()])


def classify_criticalities(n: int, s: int, c: float, tol: float = GROUP_TOL) -> HopfCriticalityTable:
    """Group modes by equal critical values (within ``tol``) and flag simplicity."""
    _check_ring(n, s)
    if not c > 0:
        raise ParameterError(f"critical values collapse onto mu = 0 unless c > 0, got {c}")
    values = sorted((mu_critical(j, n, s, c), j) for j in range(2, n + 1))
    groups: list = []
    for mu, j in values:
        if groups and abs(mu - groups[-1][0]) <= tol * max(1.0, abs(mu)):
            groups[-1][1].append(j)
        else:
            groups.append([mu, [j]])
    entries = [CriticalEntry(0.0, (1,), 1)]
    for mu, modes in groups:
        entries.append(CriticalEntry(float(mu), tuple(sorted(modes)), len(modes)))
    return HopfCriticalityTable(n, s, float(c), tuple(entries))


@dataclass(frozen=True)
class SpectralReport:
    n: int
    s: int
    c: float
    mu: float
    omega: float
    M: np.ndarray           # closed form, (N, 2, 2)
    M_numeric: np.ndarray   # DFT route, (N, 2, 2) complex
    mu_crit: dict           # j -> mu_j for j = 2..N
    pairs: tuple
    unpaired_index: Optional[int]
    table: HopfCriticalityTable
    block_agreement: float

    @property
    def eigenvalues(self) -> np.ndarray:
        """(N, 2) array of (mu - mu_j) + i omega and (mu - mu_j) - i omega, mu_1 = 0."""
        shift = np.array([0.0] + [self.mu_crit[j] for j in range(2, self.n + 1)])
        re = self.mu - shift
        return np.stack([re + 1j * self.omega, re - 1j * self.omega], axis=1)

    def degeneracy_class(self, j: int) -> int:
        for i, e in enumerate(self.table.entries):
            if j in e.modes:
                return i
        raise KeyError(j)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["j", "mu_j", "pair_partner", "degeneracy_class", "simple"])
            for j in range(1, self.n + 1):
                mj = 0.0 if j == 1 else self.mu_crit[j]
                partner = 1 if j == 1 else pair_partner(j, self.n)
                e = self.table.entry_for_mode(j)
                w.writerow([j, f"{mj:.17g}", partner, self.degeneracy_class(j), str(e.simple).lower()])


def compute_blocks_M(params: SystemParams, tol: float = BLOCK_TOL) -> SpectralReport:
    """Closed-form M_j, cross-checked against the numerical DFT route."""
    jac = build_jacobian_blocks(params)
    n = jac.n
    s = ring_range(params.topology)
    w = float(params.omega[0])
    closed = closed_form_blocks(n, s, params.c, params.mu, w)
    numeric = numerical_blocks(jac)
    dev = float(np.abs(numeric - closed).max())
    if dev > tol * max(1.0, np.abs(closed).max()):
        raise ConsistencyError(f"closed-form and DFT blocks differ by {dev:.3e}")
    mu_crit = {j: mu_critical(j, n, s, params.c) for j in range(2, n + 1)}
    pairs = tuple((j, pair_partner(j, n)) for j in range(2, n + 1) if j < pair_partner(j, n))
    unpaired = 1 + n // 2 if n % 2 == 0 else None
    table = classify_criticalities(n, s, params.c) if params.c > 0 else None
    return SpectralReport(n, s, params.c, params.mu, w, closed, numeric, mu_crit, pairs,
                          unpaired, table, dev)


def _block_diag(blocks) -> np.ndarray:
    n = len(blocks)
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    for j, b in enumerate(blocks):
        out[2 * j:2 * j + 2, 2 * j:2 * j + 2] = b
    return out


def verify_diagonalization(jac: BlockCirculantJacobian, report: SpectralReport,
                           eig_tol: float = 1e-9) -> float:
    """Max entrywise deviation of (F_N (x) F_2)^* diag(M) (F_N (x) F_2) from A.

    Also checks every analytic eigenpair: lambda_j^+- = (mu - mu_j) +- i omega
    with eigenvector (F_N (x) F_2)^* (e_j (x) [1, +-i] / sqrt 2).
    """
    if jac.n != report.n:
        raise ParameterError("Jacobian and report sizes differ")
    n = jac.n
    u = np.kron(fourier_matrix(n), fourier_matrix(2))
    a = jac.assembled
    recon = u.conj().T @ _block_diag(report.M) @ u
    residual = float(np.abs(recon - a).max())

    lam = report.eigenvalues
    worst = 0.0
    for j in range(n):
        for sign, col in ((1, 0), (-1, 1)):
            e = np.zeros(2 * n, dtype=complex)
            e[2 * j] = 1 / math.sqrt(2)
            e[2 * j + 1] = sign * 1j / math.sqrt(2)
            v = u.conj().T @ e
            worst = max(worst, float(np.linalg.norm(a @ v - lam[j, col] * v)))
    if worst > eig_tol * max(1.0, np.abs(a).max()):
        raise ConsistencyError(f"analytic eigenpair residual {worst:.3e} exceeds tolerance")
    return residual


def laplacian_mode_values(n: int, s: int, c: float) -> np.ndarray:
    """mu_j / c for j = 2..N, which should equal the nonzero ring Laplacian eigenvalues."""
    return np.array([mu_critical(j, n, s, c) for j in range(2, n + 1)]) / c


def crossing_speed(j: int, n: int, s: int, c: float, omega: float, h: float = 1e-3) -> float:
    """d/dmu of Re(lambda_j) at mu = mu_j by a two-point central difference.

    Re(lambda_j) is affine in mu, so a wide step costs no truncation error
    and keeps cancellation small.
    """
    mj = 0.0 if j == 1 else mu_critical(j, n, s, c)

    def re_eig(mu):
        m = closed_form_blocks(n, s, c, mu, omega)[j - 1]
        return float(np.linalg.eigvals(m).real.max())

    return (re_eig(mj + h) - re_eig(mj - h)) / (2 * h)
