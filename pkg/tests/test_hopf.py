import math

import numpy as np
import pytest

from slnet import SystemParams, build_ring, integrate, rhs_complex
from slnet.errors import ParameterError
from slnet.hopf import PARTIAL_KEYS, measure_limit_cycle, normal_form, partials_at_origin, reduced_rhs

NONZERO = {("F1", "xxx"): -6.0, ("F1", "xyy"): -2.0, ("F2", "yyy"): -6.0, ("F2", "xxy"): -2.0}


def test_reduced_rhs_examples():
    assert reduced_rhs(0.0, 0.0, 0.3, 1.0) == (0.0, 0.0)
    mu, omega, phi = 0.25, 1.7, 0.8
    x, y = math.sqrt(mu) * math.cos(phi), math.sqrt(mu) * math.sin(phi)
    f1, f2 = reduced_rhs(x, y, mu, omega)
    assert (f1, f2) == pytest.approx((-omega * y, omega * x), abs=1e-15)


def test_reduced_rhs_matches_network_on_diagonal():
    p = SystemParams(0.3, 1.2, 0.07, build_ring(7, 2))
    x, y = 0.4, -0.25
    dz = rhs_complex(np.full(7, x + 1j * y), p)
    f1, f2 = reduced_rhs(x, y, 0.3, 1.2)
    assert np.abs(dz - (f1 + 1j * f2)).max() < 1e-14


def test_analytic_partials():
    p = partials_at_origin(method="analytic")
    for fn in ("F1", "F2"):
        for key in PARTIAL_KEYS:
            assert p[fn][key] == NONZERO.get((fn, key), 0.0)


@pytest.mark.parametrize("h", [1e-2, 1e-3, 1e-4])
def test_fd_partials_agree(h):
    fd = partials_at_origin(0.0, 1.0, method="finite_difference", h=h)
    an = partials_at_origin(method="analytic")
    for fn in ("F1", "F2"):
        for key in PARTIAL_KEYS:
            assert abs(fd[fn][key] - an[fn][key]) < 1e-6


def test_fd_step_range():
    with pytest.raises(ParameterError):
        partials_at_origin(method="fd", h=1e-1)
    with pytest.raises(ParameterError):
        partials_at_origin(method="fd", h=1e-6)
    with pytest.raises(ParameterError):
        partials_at_origin(method="symbolic")


def test_normal_form_values():
    nf = normal_form(1.0)
    assert (nf.g11, nf.g02, nf.g20, nf.g21) == (0, 0, 0, -2)
    assert nf.C1_0 == -1
    assert (nf.p2, nf.zeta2, nf.T2) == (1, -2, 0)
    assert nf.classification == "supercritical"
    assert nf.stability == "stable"


def test_normal_form_fd_route():
    an, fd = normal_form(1.0), normal_form(1.0, method="finite_difference")
    for name in ("g11", "g02", "g20", "g21", "C1_0", "p2", "zeta2", "T2"):
        assert abs(getattr(fd, name) - getattr(an, name)) < 1e-6
    assert fd.classification == "supercritical" and fd.stability == "stable"


@pytest.mark.parametrize("method", ["analytic", "finite_difference"])
def test_normal_form_omega_independent(method):
    names = ("g11", "g02", "g20", "g21", "C1_0", "p2", "zeta2", "T2")
    ref = normal_form(1.0, method=method)
    for omega in (0.1, 10.0):
        nf = normal_form(omega, method=method)
        for name in names:
            assert abs(getattr(nf, name) - getattr(ref, name)) < 1e-9


def test_normal_form_rejects_zero_omega():
    with pytest.raises(ParameterError):
        normal_form(0.0)


def test_text_outputs():
    nf = normal_form(1.0)
    table = nf.table()
    for line in ("g21             = -2", "C1(0)           = -1", "p2              = 1",
                 "zeta2           = -2", "T2              = 0", "bifurcation     = supercritical"):
        assert line in table
    assert 'classification = "supercritical"' in nf.to_text()


@pytest.mark.parametrize("mu", [0.01, 0.04, 0.09])
def test_limit_cycle_square_root_scaling(mu):
    radius, period = measure_limit_cycle(mu, 1.0)
    assert abs(radius - math.sqrt(mu)) / math.sqrt(mu) < 0.02
    assert abs(period - 2 * math.pi) / (2 * math.pi) < 0.01


def test_origin_attracts_below_onset():
    mu = -0.1
    p = SystemParams(mu, 1.0, 0.0, build_ring(3, 1))
    traj = integrate(np.full(3, 0.1 + 0j), p, 50 / abs(mu), sample_every=1.0)
    assert np.abs(traj.final_state).max() < 1e-6
