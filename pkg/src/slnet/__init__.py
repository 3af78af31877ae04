"""Simulation and analysis of diffusively coupled Stuart-Landau oscillator networks."""

from .graph import (
    LaplacianSpectrum,
    NetworkTopology,
    build_complete,
    build_ring,
    d_max,
    from_edges,
    laplacian,
    laplacian_spectrum,
    load_edge_list,
)
from .dynamics import (
    RK4,
    RKF45,
    SystemParams,
    Trajectory,
    integrate,
    polar_state,
    random_polar_state,
    rhs_complex,
    rhs_polar,
    unwrap_phases,
)

__version__ = "0.1.0"

__all__ = [
    "LaplacianSpectrum", "NetworkTopology", "build_complete", "build_ring", "d_max", "from_edges",
    "laplacian", "laplacian_spectrum", "load_edge_list",
    "RK4", "RKF45", "SystemParams", "Trajectory", "integrate", "polar_state", "random_polar_state",
    "rhs_complex", "rhs_polar", "unwrap_phases",
]
