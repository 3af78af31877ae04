"""Network topologies and Laplacian spectra.

Nodes are indexed from 0 internally. Anything written for humans (edge-list
files, reports, CLI output) uses 1-based node labels.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import ConsistencyError, ContractError, ParameterError

JACOBI_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class NetworkTopology:
    """Simple undirected connected graph.

    ``kind`` is one of ``"ring"``, ``"complete"`` or ``"custom"``; ``s`` is the
    coupling range for rings.
    """

    adjacency: np.ndarray
    kind: str = "custom"
    s: Optional[int] = None
    name: str = field(default="")

    def __post_init__(self):
        a = np.array(self.adjacency, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ParameterError(f"adjacency must be a non-empty square matrix, got shape {a.shape}")
        if not np.isin(a, (0, 1)).all():
            raise ParameterError("adjacency entries must be 0 or 1")
        if np.any(np.diag(a) != 0):
            raise ParameterError("adjacency must have zero diagonal (no self-loops)")
        if not np.array_equal(a, a.T):
            raise ParameterError("adjacency must be symmetric (undirected graph)")
        if not _is_connected(a):
            raise ParameterError("graph is not connected")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)
        if not self.name:
            object.__setattr__(self, "name", _default_name(self.kind, a.shape[0], self.s))

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @cached_property
    def degrees(self) -> np.ndarray:
        d = self.adjacency.sum(axis=1)
        d.setflags(write=False)
        return d

    @property
    def is_all_to_all(self) -> bool:
        n = self.n_nodes
        return bool(np.all(self.degrees == n - 1))

    def edges(self) -> list[Tuple[int, int]]:
        """Edges as 1-based ``(j, k)`` pairs with ``j < k``."""
        j, k = np.nonzero(np.triu(self.adjacency))
        return [(int(a) + 1, int(b) + 1) for a, b in zip(j, k)]

    def __eq__(self, other):
        if not isinstance(other, NetworkTopology):
            return NotImplemented
        return np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash(self.adjacency.tobytes())

    def __repr__(self):
        return f"NetworkTopology({self.name}, N={self.n_nodes})"


@dataclass(frozen=True)
class LaplacianSpectrum:
    eigenvalues: np.ndarray
    lambda2: float
    lambda_max: float

    @property
    def connected(self) -> bool:
        return self.lambda2 > 1e-10


def _default_name(kind, n, s):
    if kind == "ring":
        return f"ring(N={n}, s={s})"
    if kind == "complete":
        return f"K{n}"
    return f"custom(N={n})"


def _is_connected(a: np.ndarray) -> bool:
    n = a.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        j = queue.popleft()
        for k in np.flatnonzero(a[j]):
            if not seen[k]:
                seen[k] = True
                queue.append(k)
    return bool(seen.all())


def ring_distance(j: int, k: int, n: int) -> int:
    d = abs(j - k) % n
    return min(d, n - d)


def build_ring(n: int, s: int) -> NetworkTopology:
    """s-nearest-neighbour ring: nodes at ring distance 1..s are coupled."""
    if n < 3:
        raise ParameterError(f"ring needs N >= 3, got {n}")
    if not 1 <= s <= n // 2:
        raise ParameterError(f"coupling range s must satisfy 1 <= s <= {n // 2}, got {s}")
    idx = np.arange(n)
    d = np.abs(idx[:, None] - idx[None, :])
    d = np.minimum(d, n - d)
    a = ((d >= 1) & (d <= s)).astype(np.int64)
    return NetworkTopology(a, kind="ring", s=s)


def build_complete(n: int) -> NetworkTopology:
    if n < 2:
        raise ParameterError(f"complete graph needs N >= 2, got {n}")
    a = np.ones((n, n), dtype=np.int64) - np.eye(n, dtype=np.int64)
    return NetworkTopology(a, kind="complete", s=n // 2)


def from_edges(n: int, edges: Iterable[Sequence[int]]) -> NetworkTopology:
    """Custom topology from 1-based edge pairs."""
    if n < 1:
        raise ParameterError(f"need at least one node, got {n}")
    a = np.zeros((n, n), dtype=np.int64)
    for j, k in edges:
        if not (1 <= j <= n and 1 <= k <= n):
            raise ParameterError(f"edge ({j}, {k}) references a node outside 1..{n}")
        if j == k:
            raise ParameterError(f"self-loop at node {j}")
        a[j - 1, k - 1] = a[k - 1, j - 1] = 1
    return NetworkTopology(a, kind="custom")


def load_edge_list(path, n_nodes: Optional[int] = None) -> NetworkTopology:
    """Read a whitespace-separated ``j k`` edge list (1-based, ``#`` comments).

    The node count defaults to the largest label seen.
    """
    edges = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParameterError(f"{path}:{lineno}: expected 'j k', got {raw!r}")
        try:
            edges.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise ParameterError(f"{path}:{lineno}: non-integer node label in {raw!r}") from None
    if n_nodes is None:
        if not edges:
            raise ParameterError(f"{path}: no edges")
        n_nodes = max(max(e) for e in edges)
    return from_edges(n_nodes, edges)


def laplacian(topology: NetworkTopology) -> np.ndarray:
    """Combinatorial Laplacian D - A."""
    a = topology.adjacency.astype(float)
    return np.diag(a.sum(axis=1)) - a


def jacobi_eigenvalues(matrix, tol: float = JACOBI_TOL, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all (p, q) pairs until the largest off-diagonal entry drops
    below ``tol`` (scaled by the matrix norm when that exceeds one).
    Returns the eigenvalues in nondecreasing order.
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ContractError("matrix must be square")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        raise ContractError("matrix must be symmetric")
    a = 0.5 * (a + a.T)
    threshold = tol * max(1.0, np.linalg.norm(a))
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a)))
        if off.max(initial=0.0) < threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    else:
        raise ConsistencyError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    return np.sort(np.diag(a))


def laplacian_spectrum(lap) -> LaplacianSpectrum:
    """Sorted spectrum of a symmetric Laplacian plus lambda_2 and lambda_max.

    Does not require connectivity: for a disconnected graph ``lambda2`` is 0.
    """
    ev = jacobi_eigenvalues(lap)
    lam2 = float(ev[1]) if ev.size > 1 else 0.0
    if abs(lam2) < 1e-10:
        lam2 = 0.0
    ev.setflags(write=False)
    return LaplacianSpectrum(ev, lam2, float(ev[-1]))


def ring_spectrum_analytic(n: int, s: int) -> np.ndarray:
    """Circulant Laplacian eigenvalues of ring(n, s), indexed by Fourier mode m = 0..n-1.

    For even ``n`` with ``s = n/2`` the antipodal neighbour is a single node,
    so the k = n/2 term is counted once.
    """
    m = np.arange(n)[:, None]
    k = np.arange(1, s + 1)[None, :]
    weight = np.where((2 * k == n), 1.0, 2.0)
    return (weight * (1.0 - np.cos(2.0 * np.pi * k * m / n))).sum(axis=1)


def d_max(topology: NetworkTopology) -> int:
    return int(topology.degrees.max())
