import math

import numpy as np
import pytest

from ringgas.meanfield import (
    GPEProfile,
    SolitonSolveError,
    average_momentum,
    gpe_soliton,
    gradient_flow_soliton,
    healing_length,
    ideal_limit_soliton,
    phase_winding,
    stationary_residual,
)


def test_average_momentum_basic_profiles():
    grid = np.arange(512) / 512
    uniform = GPEProfile(grid, np.ones(512), {"L": 1.0})
    assert average_momentum(uniform) == pytest.approx(0.0, abs=1e-12)
    plane = GPEProfile(grid, np.exp(2j * np.pi * grid), {"L": 1.0})
    assert average_momentum(plane) == pytest.approx(1.0, abs=1e-12)
    # two-mode form 1 + e^{iqx}: analytic integral gives 1/2
    two = GPEProfile(grid, (1.0 + np.exp(2j * np.pi * grid)) / math.sqrt(2.0), {"L": 1.0})
    assert average_momentum(two) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        average_momentum(GPEProfile(grid, 2.0 * np.ones(512), {"L": 1.0}))


def test_ideal_limit_examples():
    black = ideal_limit_soliton(0.5)
    assert black.density().min() == pytest.approx(0.0, abs=1e-12)
    assert black.norm() == pytest.approx(1.0, abs=1e-12)
    flat = ideal_limit_soliton(0.0)
    assert np.allclose(flat.density(), 1.0, atol=1e-12)
    quarter = ideal_limit_soliton(0.25)
    A = 1.0 / math.sqrt(3.0)
    assert quarter.params["A"] == pytest.approx(A, rel=1e-12)
    assert quarter.density().min() == pytest.approx((1 - A) ** 2 / (1 + A * A), rel=1e-9)
    with pytest.raises(ValueError):
        ideal_limit_soliton(1.2)


def test_ideal_momentum_round_trip():
    for k in np.arange(0.0, 1.0001, 0.125):
        prof = ideal_limit_soliton(float(k))
        assert average_momentum(prof) == pytest.approx(float(k), abs=1e-10)


@pytest.mark.parametrize("gN", [0.0, 1.0, 10.0])
@pytest.mark.parametrize("k_avg", [0.25, 0.5])
def test_soliton_selfconsistency(gN, k_avg):
    tol = 1e-10
    prof = gpe_soliton(gN, k_avg, tol=tol)
    assert stationary_residual(prof) < 1e-6
    assert prof.norm() == pytest.approx(1.0, abs=1e-8)
    assert average_momentum(prof) == pytest.approx(k_avg, abs=1e-8)
    # periodic continuation: no seam in density
    dens = prof.density()
    dx = 1.0 / dens.size
    max_slope = np.max(np.abs(np.diff(dens))) / dx
    assert abs(dens[0] - dens[-1]) <= max(2.0 * max_slope * dx, 1e-10)


def test_black_soliton_signature_and_velocity():
    prof = gpe_soliton(10.0, 0.5)
    assert prof.density().min() < 1e-12
    assert prof.params["velocity"] == pytest.approx(math.pi, rel=1e-12)
    # pi phase jump at the node
    ph = prof.phase()
    i = int(np.argmin(prof.density()))
    jump = ph[i + 1] - ph[i - 1] - 2.0 * (ph[i - 1] - ph[i - 3]) / 2.0
    assert abs(abs(jump) - math.pi) < 0.05


def test_zero_coupling_reduces_to_ideal_limit():
    for k in (0.25, 0.5):
        a = gpe_soliton(0.0, k)
        b = ideal_limit_soliton(k)
        assert np.max(np.abs(a.psi - b.psi)) < 1e-8
    # continuity: tiny coupling stays close to the ideal profile
    small = gpe_soliton(1e-8, 0.25)
    ideal = ideal_limit_soliton(0.25)
    assert np.max(np.abs(small.density() - ideal.density())) < 1e-6


def test_min_density_trends():
    # black branch: the minimum is pinned at zero for every coupling
    mins = [gpe_soliton(gN, 0.5).density().min() for gN in (0.0, 1.0, 10.0)]
    assert all(m < 1e-12 for m in mins)
    assert all(b <= a + 1e-12 for a, b in zip(mins, mins[1:]))


def test_phase_winding_integer():
    for gN, k in [(1.0, 0.25), (4.0, 0.375), (1.0, 0.75)]:
        w = phase_winding(gpe_soliton(gN, k))
        assert abs(w - round(w)) < 1e-6


def test_reflection_branch_momentum():
    prof = gpe_soliton(2.0, 0.7)
    assert average_momentum(prof) == pytest.approx(0.7, abs=1e-9)
    assert stationary_residual(prof) < 1e-6


def test_healing_length_values():
    assert healing_length(1.0, 1, 1.0) == pytest.approx(1.0)
    # gN = 0.64 setup: xi = 1/sqrt(0.64) = 1.25
    assert healing_length(0.08, 8, 1.0) == pytest.approx(1.25)
    assert healing_length(0.02, 8, 1.0) == pytest.approx(2.0 * healing_length(0.08, 8, 1.0))
    assert healing_length(0.0, 8) == math.inf
    with pytest.raises(ValueError):
        healing_length(-0.1, 8)


@pytest.mark.parametrize("gN,k_avg", [(1.0, 0.25), (1.0, 0.5), (10.0, 0.25)])
def test_gradient_flow_cross_validates_elliptic(gN, k_avg):
    flow = gradient_flow_soliton(gN, k_avg, grid=256)
    ell = gpe_soliton(gN, k_avg, grid=256)
    assert np.max(np.abs(flow.density() - ell.density())) < 1e-6
    assert flow.params["velocity"] == pytest.approx(ell.params["velocity"], abs=1e-5)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        gpe_soliton(-1.0, 0.5)
    with pytest.raises(ValueError):
        gpe_soliton(1.0, 1.5)
