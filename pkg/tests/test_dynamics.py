import csv

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slnet import (
    RK4,
    RKF45,
    SystemParams,
    build_ring,
    from_edges,
    integrate,
    polar_state,
    random_polar_state,
    rhs_complex,
    rhs_polar,
    unwrap_phases,
)
from slnet import _kernels
from slnet.dynamics import Trajectory, write_trajectory_csv
from slnet.errors import DivergenceError, DomainError, ParameterError, PhaseUndefinedError, UndersampledError
from slnet.graph import NetworkTopology


def single(mu=1.0, omega=1.0):
    return SystemParams(mu, omega, 0.0, NetworkTopology(np.zeros((1, 1), dtype=int), kind="custom"))


def test_params_validation():
    top = build_ring(5, 1)
    with pytest.raises(ParameterError):
        SystemParams(1.0, 1.0, -0.1, top)
    with pytest.raises(ParameterError):
        SystemParams(1.0, [1.0, 2.0], 0.1, top)
    p = SystemParams(1.0, [1.0] * 5, 0.1, top)
    assert p.identical_frequencies
    assert not p.with_omega([1, 1, 1, 1, 2]).identical_frequencies
    assert p.with_mu(0.5).mu == 0.5


def test_origin_is_equilibrium(ring62_params):
    assert np.array_equal(rhs_complex(np.zeros(6, complex), ring62_params), np.zeros(6, complex))


def test_single_node_on_limit_cycle_rotates():
    mu, omega = 0.7, 1.3
    z = np.sqrt(mu) * np.exp(0.4j) * np.ones(1)
    assert rhs_complex(z, single(mu, omega)) == pytest.approx(1j * omega * z, abs=1e-14)


def test_synchronous_state_coupling_vanishes(ring62_params):
    z = np.full(6, 0.3 - 0.2j)
    p = ring62_params
    expected = (p.mu + 1j * p.omega) * z - np.abs(z) ** 2 * z
    assert rhs_complex(z, p) == pytest.approx(expected, abs=1e-15)


def test_coupling_is_minus_c_laplacian(rng):
    top = from_edges(5, [(1, 2), (2, 3), (3, 4), (4, 5), (1, 3)])
    p = SystemParams(0.5, rng.normal(size=5), 0.3, top)
    z = rng.normal(size=5) + 1j * rng.normal(size=5)
    a = top.adjacency
    explicit = np.array([sum(a[j, k] * (z[k] - z[j]) for k in range(5)) for j in range(5)])
    local = (p.mu + 1j * p.omega) * z - np.abs(z) ** 2 * z
    assert rhs_complex(z, p) == pytest.approx(local + p.c * explicit, abs=1e-13)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 9))
def test_polar_matches_complex(seed, n):
    rng = np.random.default_rng(seed)
    p = SystemParams(rng.uniform(-1, 2), rng.normal(size=n), rng.uniform(0, 1), build_ring(n, 1))
    r = rng.uniform(0.1, 2.0, n)
    th = rng.uniform(-np.pi, np.pi, n)
    z = polar_state(r, th)
    dz = rhs_complex(z, p)
    dr_ref = np.real(np.conj(z) * dz) / r
    dth_ref = np.imag(np.conj(z) * dz) / r**2
    dr, dth = rhs_polar(r, th, p)
    assert np.max(np.abs(dr - dr_ref)) < 1e-12
    assert np.max(np.abs(dth - dth_ref)) < 1e-12


def test_polar_synchronous_and_domain(ring62_params):
    p = ring62_params.with_omega([0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    dr, dth = rhs_polar(np.full(6, 0.4), np.full(6, 1.1), p)
    assert dth == pytest.approx(p.omega, abs=1e-15)
    assert dr == pytest.approx((p.mu - 0.16) * 0.4, abs=1e-15)
    with pytest.raises(DomainError):
        rhs_polar(np.array([0.4, 0, 0.4, 0.4, 0.4, 0.4]), np.zeros(6), p)


def test_numba_kernel_matches_rhs(ring62_params, rng):
    z = rng.normal(size=6) + 1j * rng.normal(size=6)
    p = ring62_params.with_omega(rng.normal(size=6))
    out = np.empty(6, complex)
    _kernels.rhs_into(z, p.mu, np.ascontiguousarray(p.omega), p.c, np.ascontiguousarray(p.laplacian, float), out)
    assert out == pytest.approx(rhs_complex(z, p), abs=1e-13)


def test_single_oscillator_reaches_unit_circle():
    traj = integrate(np.array([0.1 + 0j]), single(1.0, 1.0), 50.0)
    assert abs(abs(traj.final_state[0]) - 1.0) < 1e-6


def test_negative_mu_decays():
    p = SystemParams(-0.5, 1.0, 0.0, build_ring(5, 1))
    z0 = random_polar_state(5, 0.1, seed=3)
    traj = integrate(z0, p, 50.0)
    assert np.abs(traj.final_state).max() < 1e-10


def test_rk4_and_rkf45_agree(k3_params):
    z0 = random_polar_state(3, 0.5, (0.2, 1.3), seed=7)
    a = integrate(z0, k3_params, 20.0, RK4(1e-3), 0.1)
    b = integrate(z0, k3_params, 20.0, RKF45(), 0.1)
    assert np.max(np.abs(a.final_state - b.final_state)) < 1e-6
    assert a.times == pytest.approx(b.times)


def test_sample_grid_and_record_from(k3_params):
    z0 = random_polar_state(3, 0.5, seed=1)
    traj = integrate(z0, k3_params, 1.05, RK4(1e-3), 0.1)
    assert traj.times[-1] == pytest.approx(1.05)
    assert np.all(np.diff(traj.times) > 0)
    tail = integrate(z0, k3_params, 1.0, RK4(1e-3), 0.1, record_from=0.5)
    assert tail.times[0] == pytest.approx(0.5)
    assert tail.final_state == pytest.approx(traj.states[10], abs=1e-12)


def test_divergence_error():
    with pytest.raises(DivergenceError) as exc:
        integrate(np.array([1e100 + 0j]), single(), 1.0, RK4(0.1), 0.1)
    assert exc.value.time > 0


def test_invalid_integrate_args(k3_params):
    z0 = np.ones(3, complex)
    with pytest.raises(ParameterError):
        integrate(z0, k3_params, 0.0)
    with pytest.raises(ParameterError):
        integrate(z0, k3_params, 1.0, sample_every=0.0)
    with pytest.raises(ParameterError):
        integrate(np.ones(4, complex), k3_params, 1.0)
    with pytest.raises(ParameterError):
        RK4(0.0)


def test_seeded_initial_state_reproducible():
    a = random_polar_state(6, 0.5, (0.3, 2.8), seed=42)
    b = random_polar_state(6, 0.5, (0.3, 2.8), seed=42)
    assert np.array_equal(a, b)
    th = np.angle(a)
    assert np.all((th > 0.3) & (th < 2.8))
    assert not np.array_equal(a, random_polar_state(6, 0.5, (0.3, 2.8), seed=43))


def test_synchronous_manifold_invariance(ring62_params):
    z0 = np.full(6, 0.2 + 0.1j)
    traj = integrate(z0, ring62_params, 30.0)
    spread = np.abs(traj.states - traj.states[:, :1]).max()
    assert spread < 1e-9


def test_global_phase_equivariance(ring62_params):
    z0 = random_polar_state(6, 0.5, seed=5)
    phi = 1.234
    a = integrate(z0, ring62_params, 20.0)
    b = integrate(np.exp(1j * phi) * z0, ring62_params, 20.0)
    assert np.abs(b.states - np.exp(1j * phi) * a.states).max() < 1e-9


def test_rotating_frame_equivalence(ring62_params):
    z0 = random_polar_state(6, 0.5, seed=9)
    omega = 1.7
    rot = integrate(z0, ring62_params.with_omega(omega), 20.0)
    still = integrate(z0, ring62_params.with_omega(0.0), 20.0)
    phase = np.exp(1j * omega * rot.times)[:, None]
    assert np.abs(rot.states - phase * still.states).max() < 1e-8


def test_rk4_fourth_order(k3_params):
    p = k3_params.with_omega([0.5, 1.0, 1.5])
    z0 = random_polar_state(3, 0.8, seed=2)
    t_end, dt = 2.0, 0.1

    def final(h):
        return integrate(z0, p, t_end, RK4(h), t_end).final_state

    ref = final(dt / 8)
    ratio = np.abs(final(dt) - ref).max() / np.abs(final(dt / 2) - ref).max()
    assert 12 <= ratio <= 20


def test_unwrap_single_rotation():
    traj = integrate(np.array([np.exp(0.5j)]), single(1.0, 1.0), 20.0)
    theta = unwrap_phases(traj)[:, 0]
    assert theta == pytest.approx(0.5 + traj.times, abs=1e-6)


def test_unwrap_across_branch_cut():
    p = single(1.0, 1.0)
    t = np.linspace(0, 2, 201)
    th = 2.5 + t
    traj = Trajectory(t, np.exp(1j * th)[:, None], p)
    out = unwrap_phases(traj)[:, 0]
    assert np.max(np.abs(np.diff(out))) < 0.1
    assert out == pytest.approx(th, abs=1e-12)  # passes pi near t = 0.64 without a jump


def test_unwrap_zero_amplitude_raises():
    p = single()
    t = np.array([0.0, 0.1, 0.2])
    states = np.array([[1.0 + 0j], [0.0 + 0j], [1.0 + 0j]])
    with pytest.raises(PhaseUndefinedError) as exc:
        unwrap_phases(Trajectory(t, states, p))
    assert exc.value.node == 1
    assert exc.value.time == pytest.approx(0.1)


def test_unwrap_undersampled():
    p = single(1.0, 40.0)
    traj = integrate(np.array([1.0 + 0j]), p, 1.0, RK4(1e-3), 0.1)
    with pytest.raises(UndersampledError):
        unwrap_phases(traj)


def test_trajectory_csv(tmp_path, k3_params):
    traj = integrate(random_polar_state(3, 0.5, (0.2, 1.3), seed=1), k3_params, 0.05)
    path = tmp_path / "t.csv"
    write_trajectory_csv(traj, path, polar=True)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "x_1", "y_1", "x_2", "y_2", "x_3", "y_3",
                       "r_1", "r_2", "r_3", "theta_1", "theta_2", "theta_3"]
    assert len(rows) == len(traj) + 1
    assert float(rows[-1][1]) == traj.final_state[0].real  # 17 digits round-trip exactly
