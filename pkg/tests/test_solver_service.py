import math

import numpy as np
import pytest

from app.core.exceptions import BlowUpError, NonFiniteError
from app.models.spectral_field import GevreyIndex, SpectralField
from app.schemas.experiment_schema import SolverConfig
from app.services import field_service, solver_service
from app.utils import serialization


def _config(**kwargs):
    base = dict(dt=0.01, t_start=0.0, t_end=1.0, sample_times=[0.0, 1.0])
    base.update(kwargs)
    return SolverConfig(**base)


class TestSampleTimes:
    def test_log_spacing(self):
        times = solver_service.resolve_sample_times(SolverConfig(t_start=1.0, t_end=100.0, n_samples=3))
        assert times == pytest.approx([1.0, 10.0, 100.0])

    def test_linear_spacing(self):
        cfg = SolverConfig(t_start=0.0, t_end=2.0, n_samples=5, sample_spacing="linear")
        assert solver_service.resolve_sample_times(cfg) == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])

    def test_explicit_times(self):
        assert solver_service.resolve_sample_times(_config(sample_times=[0.25])) == [0.25]

    def test_invalid_horizon(self):
        with pytest.raises(ValueError):
            SolverConfig(t_start=2.0, t_end=1.0)


class TestStokes:
    def test_free_decay_is_exact(self, lattice):
        u0 = field_service.single_mode(lattice, (1, 1, 0), (1, -1, 0))
        traj = solver_service.integrate_stokes_linear(u0, None, None, _config())
        energy = traj.diagnostics["energy"]
        # |k|² = 2: |u(t)|² = e^{-4t}|u0|²
        assert energy[1] / energy[0] == pytest.approx(math.exp(-4.0), rel=1e-12)

    def test_constant_force_reaches_steady_state(self, lattice):
        f = field_service.single_mode(lattice, (0, 0, 1), (1, 0, 0), amplitude=0.2)
        cfg = _config(t_end=15.0, sample_times=[15.0])
        traj = solver_service.integrate_stokes_linear(
            SpectralField.zero(lattice), None, lambda t: f, cfg, keep_fields=True
        )
        # A⁻¹ f = f pour |k| = 1
        error = field_service.gevrey_norm(traj.fields[-1] - f)
        assert error <= 1e-4 * field_service.gevrey_norm(f)


class TestNavierStokes:
    def test_shear_flow_decays_exactly(self, lattice):
        u0 = field_service.single_mode(lattice, (0, 1, 0), (1, 0, 0), amplitude=0.5, kind="sin")
        traj = solver_service.integrate_nse(u0, None, _config())
        energy = traj.diagnostics["energy"]
        assert energy[1] / energy[0] == pytest.approx(math.exp(-2.0), rel=1e-12)

    def test_energy_decays_without_force(self, lattice, rng):
        u0 = field_service.random_field(lattice, rng, amplitude=0.5)
        cfg = _config(t_end=0.5, sample_times=[], n_samples=6, sample_spacing="linear")
        traj = solver_service.integrate_nse(u0, None, cfg)
        energy = np.asarray(traj.diagnostics["energy"])
        assert np.all(np.diff(energy) < 0)
        assert max(traj.diagnostics["divergence"]) < 1e-12

    def test_monitor_and_probe_columns(self, lattice, rng):
        u0 = field_service.random_field(lattice, rng, amplitude=0.1)
        cfg = _config(t_end=0.1, sample_times=[], n_samples=5, sample_spacing="linear")
        traj = solver_service.integrate_nse(
            u0, None, cfg, monitor=[GevreyIndex(alpha=1.0)], probe=lambda t, u: {"r_1": 0.0}
        )
        assert len(traj) == 5
        assert traj.columns() == ["t", "energy", "enstrophy", "divergence", "gevrey_1_0", "r_1"]
        assert traj.fields is None

    def test_blow_up(self, lattice):
        u0 = field_service.single_mode(lattice, (1, 0, 0), (0, 1, 0))
        with pytest.raises(BlowUpError):
            solver_service.integrate_nse(u0, None, _config(clip_threshold=1e-6))

    def test_non_finite(self, lattice):
        u0 = field_service.single_mode(lattice, (1, 0, 0), (0, 1, 0))
        bad = SpectralField(lattice, np.full((3,) + lattice.shape, np.nan, dtype=complex))
        with pytest.raises(NonFiniteError):
            solver_service.integrate_nse(u0, lambda t: bad, _config())

    def test_trajectory_csv(self, lattice, rng, tmp_path):
        u0 = field_service.random_field(lattice, rng, amplitude=0.1)
        cfg = _config(t_end=0.05, sample_times=[0.0, 0.02, 0.05])
        traj = solver_service.integrate_nse(u0, None, cfg)
        path = solver_service.write_trajectory_csv(tmp_path / "run.trajectory.csv", traj)
        rows = serialization.read_csv(path)
        assert len(rows) == 3
        assert float(rows[0]["energy"]) == pytest.approx(0.01)
