import cmath
import math

import numpy as np
import pytest

from dwtunnel import (
    ConfigurationError,
    DrivePotential,
    HarmonicPotential,
    NumericalFailure,
    StepScheme,
    WaveField,
    ZeroPotential,
    crank_nicolson_step,
    gaussian_packet,
    norm,
    propagate,
    split_step,
    total_energy,
)

from conftest import ground_state


def free_variance(sigma0, tau):
    # |psi|^2 variance of a free Gaussian under i psi_t = -psi_xx
    return (sigma0**4 + 4 * tau**2) / (2 * sigma0**2)


def density_variance(wf, grid):
    rho = wf.density() * grid.dx
    rho /= rho.sum()
    m = np.dot(grid.nodes, rho)
    return float(np.dot((grid.nodes - m) ** 2, rho))


def overlap(a, b, grid):
    return complex(np.vdot(a, b) * grid.dx)


@pytest.mark.parametrize("scheme,tol", [("split-step", 1e-3), ("crank-nicolson", 1e-2)])
def test_free_gaussian_spreading(grid, scheme, tol):
    wf = gaussian_packet(grid, 0.0, 1.0)
    out = propagate(wf, grid, ZeroPotential(), scheme, tau_end=0.5, dtau=0.002)
    expected = free_variance(1.0, 0.5)
    assert expected == pytest.approx(1.0)
    assert density_variance(out, grid) == pytest.approx(expected, rel=tol)


def test_harmonic_eigenstate_split_step(grid):
    psi0 = WaveField(ground_state(grid))
    out = propagate(psi0, grid, HarmonicPotential(), "split-step", tau_end=10.0, dtau=0.002)
    ov = overlap(psi0.amplitudes, out.amplitudes, grid)
    assert abs(ov) == pytest.approx(1.0, abs=1e-6)
    # eigenvalue 1: psi(tau) = exp(-i tau) psi0
    assert abs(ov - cmath.exp(-10j)) < 1e-4


def test_harmonic_eigenstate_crank_nicolson(grid):
    psi0 = WaveField(ground_state(grid))
    out = propagate(psi0, grid, HarmonicPotential(), "crank-nicolson", tau_end=1.0, dtau=1e-3)
    ov = overlap(psi0.amplitudes, out.amplitudes, grid)
    assert abs(ov) == pytest.approx(1.0, abs=1e-4)
    assert abs(ov - cmath.exp(-1j)) < 1e-4


@pytest.mark.parametrize("step,tol", [(split_step, 1e-12), (crank_nicolson_step, 1e-10)])
def test_single_step_preserves_norm(grid, drive_pot, step, tol):
    wf = gaussian_packet(grid, -5.0, 1.0)
    kicked = WaveField(wf.amplitudes * np.exp(0.7j * grid.nodes))
    for pot in (ZeroPotential(), HarmonicPotential(), drive_pot):
        out = step(kicked, grid, pot, 0.3, 0.002)
        assert out.tau == pytest.approx(0.302)
        assert abs(norm(out, grid) - norm(kicked, grid)) <= tol


def test_split_step_matches_propagate(grid, drive_pot):
    wf = gaussian_packet(grid, -5.0, 1.0)
    manual = wf
    for s in range(20):
        manual = split_step(manual, grid, drive_pot, s * 0.002, 0.002)
    fused = propagate(wf, grid, drive_pot, "split-step", tau_end=0.04, dtau=0.002)
    assert np.allclose(manual.amplitudes, fused.amplitudes, atol=1e-13, rtol=0)


def test_propagate_zero_span_is_identity(grid):
    wf = gaussian_packet(grid, 1.0)
    assert propagate(wf, grid, ZeroPotential(), "split-step", tau_end=0.0, dtau=0.002) is wf


def test_propagate_many_free_steps_keeps_norm(grid):
    wf = gaussian_packet(grid, 1.0)
    out = propagate(wf, grid, ZeroPotential(), "split-step", tau_end=2.0, dtau=0.002)
    assert out.tau == 2.0
    assert norm(out, grid) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("dtau", [0.1, 0.5, 0.0, -0.01, float("nan")])
def test_propagate_rejects_bad_dtau(grid, dtau):
    wf = gaussian_packet(grid, 0.0)
    with pytest.raises(ConfigurationError):
        propagate(wf, grid, ZeroPotential(), "split-step", tau_end=1.0, dtau=dtau)


def test_propagate_rejects_backwards(grid):
    wf = gaussian_packet(grid, 0.0).copy_with(tau=1.0)
    with pytest.raises(ConfigurationError):
        propagate(wf, grid, ZeroPotential(), "split-step", tau_end=0.5, dtau=0.01)


def test_unknown_scheme(grid):
    with pytest.raises(ConfigurationError):
        propagate(gaussian_packet(grid, 0.0), grid, ZeroPotential(), "euler", tau_end=1.0, dtau=0.01)
    assert StepScheme.parse("crank_nicolson") is StepScheme.CRANK_NICOLSON


def test_observer_cadence_and_partial_final_step(grid, drive_pot):
    seen = []
    wf = gaussian_packet(grid, -5.0)
    out = propagate(wf, grid, drive_pot, "split-step", tau_end=0.105, dtau=0.01,
                    observer=lambda t, f: seen.append((t, f.tau, norm(f, grid))), every=0.05)
    taus = [t for t, _, _ in seen]
    assert taus == pytest.approx([0.0, 0.05, 0.1, 0.105])
    assert all(t == ft for t, ft, _ in seen)
    assert out.tau == 0.105
    assert all(abs(n - 1) < 1e-12 for _, _, n in seen)


def test_observer_cadence_must_divide(grid):
    with pytest.raises(ConfigurationError):
        propagate(gaussian_packet(grid, 0.0), grid, ZeroPotential(), "split-step",
                  tau_end=1.0, dtau=0.003, observer=lambda t, f: None, every=0.01)


def test_partial_step_lands_exactly(grid):
    wf = gaussian_packet(grid, 0.0)
    a = propagate(wf, grid, HarmonicPotential(), "split-step", tau_end=0.0105, dtau=0.002)
    assert a.tau == 0.0105
    ov = overlap(wf.amplitudes, a.amplitudes, grid)
    # landing at 0.010 instead would be off by ~5e-4
    assert abs(ov - cmath.exp(-0.0105j)) < 1e-7


def _phase_error(grid, dtau, tau=10.0):
    psi0 = WaveField(ground_state(grid))
    out = propagate(psi0, grid, HarmonicPotential(), "split-step", tau_end=tau, dtau=dtau)
    return abs(overlap(psi0.amplitudes, out.amplitudes, grid) - cmath.exp(-1j * tau))


def test_second_order_convergence(grid):
    coarse = _phase_error(grid, 0.04)
    fine = _phase_error(grid, 0.02)
    assert coarse / fine == pytest.approx(4.0, rel=0.2)


def test_time_reversal(grid):
    pot = DrivePotential(0.0005, 0.0001, 0.0)
    wf = gaussian_packet(grid, -5.0)
    kicked = WaveField(wf.amplitudes * np.exp(0.4j * grid.nodes))
    fwd = propagate(kicked, grid, pot, "split-step", tau_end=10.0, dtau=0.002)
    back = propagate(WaveField(np.conj(fwd.amplitudes)), grid, pot, "split-step",
                     tau_end=10.0, dtau=0.002)
    fidelity = abs(overlap(np.conj(back.amplitudes), kicked.amplitudes, grid)) ** 2
    assert fidelity >= 1 - 1e-8


def test_stationary_energy_conservation(grid):
    pot = DrivePotential(0.0005, 0.0, 2.0)
    wf = gaussian_packet(grid, -5.0)
    e0 = total_energy(wf, grid, pot, 0.0)
    energies = []
    propagate(wf, grid, pot, "split-step", tau_end=100.0, dtau=0.002,
              observer=lambda t, f: energies.append(total_energy(f, grid, pot, t)), every=5.0)
    drift = max(abs(e - e0) for e in energies) / abs(e0)
    assert drift <= 1e-4


def test_non_finite_input_aborts(grid):
    amp = np.array(gaussian_packet(grid, 0.0).amplitudes)
    amp[5] = np.nan
    with pytest.raises(NumericalFailure):
        split_step(WaveField(amp), grid, ZeroPotential(), 0.0, 0.01)
    with pytest.raises(NumericalFailure) as err:
        propagate(WaveField(amp), grid, ZeroPotential(), "crank-nicolson", tau_end=0.02, dtau=0.01)
    assert err.value.tau is not None
