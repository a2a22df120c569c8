import math

import numpy as np
import pytest

from dwtunnel import ConfigurationError, RunConfig, run_simulation, scan_epsilon
from dwtunnel.experiment import GridSpec, InitialSpec


def quick(**kw):
    base = dict(epsilon=2.0, tau_max=10.0, dtau=0.005, record_stride_tau=0.5,
                grid=GridSpec(16.0, 512))
    base.update(kw)
    return RunConfig(**base)


def test_defaults_mirror_production():
    c = RunConfig(epsilon=2.0)
    assert (c.alpha, c.beta, c.tau_max, c.dtau) == (0.0005, 0.0001, 2500.0, 0.002)
    assert (c.grid.x_max, c.grid.n_points, c.record_stride_tau) == (16.0, 2048, 0.5)
    assert c.snapshot_times() == (0.0, 625.0, 1250.0, 1875.0, 2500.0)
    assert c.initial == InitialSpec("left", 1.0)


def test_run_record_layout():
    rec = run_simulation(quick())
    taus = rec.column("tau")
    assert taus[0] == 0.0 and taus[-1] == 10.0
    assert len(taus) == 21
    assert np.all(np.diff(taus) > 0)
    assert sorted(rec.snapshots) == [0.0, 2.5, 5.0, 7.5, 10.0]
    assert rec.snapshots[5.0].tau == pytest.approx(5.0)
    assert rec.samples[0].mean_x == pytest.approx(-5.0, abs=1e-4)
    assert np.max(np.abs(rec.column("norm") - 1)) < 1e-10
    part = rec.column("prob_left") + rec.column("prob_right") - rec.column("norm")
    assert np.max(np.abs(part)) < 1e-9
    assert rec.wall_time > 0


def test_run_starts_in_requested_well():
    rec = run_simulation(quick(initial=InitialSpec("right", 1.0), tau_max=1.0))
    assert rec.samples[0].mean_x == pytest.approx(5.0, abs=1e-4)
    assert rec.samples[0].prob_right > 0.999


def test_tau_max_off_cadence_gets_final_sample():
    rec = run_simulation(quick(tau_max=1.23, snapshot_taus=()))
    assert rec.column("tau")[-1] == 1.23
    assert rec.snapshots == {}


def test_determinism():
    a = run_simulation(quick())
    b = run_simulation(quick())
    assert a.samples == b.samples


def test_no_drive_matches_stationary():
    a = run_simulation(quick(beta=0.0, epsilon=0.0))
    b = run_simulation(quick(beta=0.0, epsilon=2.0))
    assert a.samples == b.samples


def test_crank_nicolson_run():
    rec = run_simulation(quick(scheme="crank-nicolson", tau_max=2.0))
    ref = run_simulation(quick(tau_max=2.0))
    assert np.max(np.abs(rec.column("prob_left") - ref.column("prob_left"))) < 1e-3


@pytest.mark.parametrize("kw,key", [
    (dict(dtau=0.0), "dtau"),
    (dict(dtau=-0.1), "dtau"),
    (dict(dtau=0.2, record_stride_tau=1.0), "dtau"),
    (dict(tau_max=0.0), "tau_max"),
    (dict(record_stride_tau=0.001), "record_stride_tau"),
    (dict(record_stride_tau=0.0123), "record_stride_tau"),
    (dict(snapshot_taus=(11.0,)), "snapshot_taus"),
    (dict(beta=0.001), "beta"),
    (dict(grid=GridSpec(16.0, 100)), "n_points"),
    (dict(scheme="rk4"), "scheme"),
])
def test_config_validation(kw, key):
    with pytest.raises(ConfigurationError) as err:
        quick(**kw)
    assert err.value.key == key


def test_initial_spec_validation():
    with pytest.raises(ConfigurationError):
        InitialSpec("middle", 1.0)
    with pytest.raises(ConfigurationError):
        InitialSpec("left", -1.0)


def test_scan_singleton_matches_run():
    cfg = quick()
    [rec] = scan_epsilon(cfg, [2.0])
    assert rec.ok
    run = run_simulation(cfg)
    assert rec.metrics == run.metrics
    assert rec.final_energy == run.samples[-1].energy_total


def test_scan_order_and_failures():
    recs = scan_epsilon(quick(tau_max=1.0), [1.7, -1.0, 0.0])
    assert [r.epsilon for r in recs] == [1.7, -1.0, 0.0]
    assert [r.status for r in recs] == ["ok", "failed", "ok"]
    assert recs[1].metrics is None and math.isnan(recs[1].final_energy)
    assert "epsilon" in recs[1].error


def test_scan_parallel_matches_serial():
    eps = [0.0, 1.7, 2.0]
    serial = scan_epsilon(quick(tau_max=2.0), eps, jobs=1)
    parallel = scan_epsilon(quick(tau_max=2.0), eps, jobs=2)
    assert serial == parallel


def test_scan_empty():
    with pytest.raises(ConfigurationError):
        scan_epsilon(quick(), [])
