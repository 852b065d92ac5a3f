import math

import numpy as np
import pytest
from pydantic import ValidationError

from app.core.exceptions import FitError
from app.schemas.experiment_schema import ExperimentConfig
from app.schemas.report_schema import ConvergenceReport, FitResult, ResidualReport, ResidualSample
from app.services import experiment_service
from app.utils import serialization


def _fit(slope, stderr):
    return FitResult(slope=slope, stderr=stderr, intercept=0.0, n_samples=20, m=0)


class TestFits:
    def test_power_law(self):
        t = np.geomspace(1.0, 100.0, 20)
        fit = experiment_service.fit_decay_exponent(t, 3.0 * t**-2.0, 0)
        assert fit.slope == pytest.approx(-2.0, abs=1e-12)
        assert fit.intercept == pytest.approx(math.log(3.0))
        assert fit.n_samples == 20

    def test_log_power_law(self):
        t = np.geomspace(3.0, 1e4, 20)
        fit = experiment_service.fit_decay_exponent(t, np.log(t) ** -1.5, 1)
        assert fit.slope == pytest.approx(-1.5, abs=1e-12)
        assert fit.m == 1

    def test_too_few_samples(self):
        t = np.geomspace(1.0, 10.0, 5)
        with pytest.raises(FitError):
            experiment_service.fit_decay_exponent(t, t**-1.0, 0)

    def test_non_positive_residual(self):
        t = np.geomspace(1.0, 10.0, 12)
        values = t**-1.0
        values[3] = 0.0
        with pytest.raises(FitError):
            experiment_service.fit_decay_exponent(t, values, 0)

    def test_outside_log_domain(self):
        t = np.geomspace(1.0, 10.0, 12)
        with pytest.raises(FitError):
            experiment_service.fit_decay_exponent(t, t**-1.0, 1)

    def test_slopes_agree(self):
        assert experiment_service.slopes_agree(_fit(-2.0, 0.1), _fit(-2.1, 0.1))
        assert not experiment_service.slopes_agree(_fit(-2.0, 0.1), _fit(-3.0, 0.1))
        assert experiment_service.slopes_agree(_fit(-2.0, 0.1), None) is None


class TestConfig:
    def test_overrides(self):
        data = {"force": {"orders": [{"mu": "1"}]}}
        experiment_service.apply_overrides(
            data, ["force.orders.0.mu=3/2", "solver.dt=0.0005", "output.write_fields=true", "order=2"]
        )
        assert data["force"]["orders"][0]["mu"] == "3/2"
        assert data["solver"]["dt"] == 0.0005
        assert data["output"]["write_fields"] is True
        assert data["order"] == 2

    def test_invalid_override(self):
        with pytest.raises(ValueError):
            experiment_service.apply_overrides({}, ["solver.dt"])

    @pytest.mark.parametrize("name", ["linear", "nse-power", "nse-log", "manufactured", "lemma"])
    def test_shipped_configs(self, config_dir, name):
        cfg = experiment_service.load_config(config_dir / f"{name}.yaml")
        assert cfg.output.name == name

    def test_load_with_overrides(self, config_dir):
        cfg = experiment_service.load_config(config_dir / "linear.yaml", ["solver.dt=0.02", "lattice.resolution=8"])
        assert cfg.kind == "linear"
        assert cfg.solver.dt == 0.02
        assert experiment_service.build_lattice(cfg).resolution == 8

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            experiment_service.load_config(tmp_path / "absent.yaml")

    def test_force_required(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"kind": "nse-power"})

    def test_fit_window_inside_horizon(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"kind": "lemma-integral", "fit": {"t_lo": 0.5}})

    def test_default_residual_norm(self):
        cfg = ExperimentConfig.model_validate({"kind": "lemma-integral"})
        assert cfg.residual_index.alpha == pytest.approx(0.9)
        assert cfg.residual_index.sigma == 0.0

    def test_default_fit_window(self):
        cfg = ExperimentConfig.model_validate({"kind": "lemma-integral", "solver": {"t_start": 2, "t_end": 9}})
        assert experiment_service.fit_window(cfg) == (2, 9)


class TestLinearExperiment:
    def test_algebraic_decay(self, config_dir):
        cfg = experiment_service.load_config(
            config_dir / "linear.yaml",
            [
                "lattice.resolution=8",
                "solver.t_end=40",
                "solver.n_samples=40",
                "fit.t_lo=12",
                "fit.t_hi=40",
                "residual_index.alpha=0",
            ],
        )
        report = experiment_service.run_linear_experiment(cfg, config_dir)
        assert report.regime == "algebraic"
        assert len(report.samples) == 40
        assert report.initial_mismatch == pytest.approx(0.0, abs=1e-14)
        (truncation,) = report.truncations
        assert truncation.fit.slope < -1.5
        assert truncation.passed
        assert report.verdict

    def test_exponential_regime(self):
        cfg = ExperimentConfig.model_validate(
            {
                "kind": "linear",
                "lattice": {"resolution": 8},
                "solver": {"dt": 0.01, "t_start": 1.0, "t_end": 3.0, "n_samples": 5},
                "linear": {"terms": [], "w0": {"modes": [{"k": [1, 0, 0], "real": [0.0, 0.1, 0.0]}]}},
            }
        )
        report = experiment_service.run_linear_experiment(cfg)
        assert report.regime == "exponential"
        assert report.truncations == []
        assert report.verdict

    def test_simulate(self, config_dir):
        cfg = experiment_service.load_config(
            config_dir / "linear.yaml", ["lattice.resolution=8", "solver.t_end=2", "solver.n_samples=5", "fit.t_lo=1", "fit.t_hi=2"]
        )
        traj = experiment_service.simulate(cfg, config_dir)
        assert len(traj) == 5
        assert "r_1" in traj.columns()
        assert "gevrey_1_0" in traj.columns()


class TestExpand:
    def test_writes_each_order(self, config_dir, tmp_path):
        cfg = experiment_service.load_config(config_dir / "nse-power.yaml", ["lattice.resolution=8"])
        result = experiment_service.expand(cfg, config_dir, tmp_path)
        assert result.sequence == ["1", "2", "3"]
        assert [s.n for s in result.expansions] == [1, 2, 3]
        assert len(result.files) == 3
        q2 = serialization.read_expansion(tmp_path / "nse-power.q2.exp")
        assert q2.class_mu == -2
        assert q2.conjugate_closed

    def test_requires_force(self):
        cfg = ExperimentConfig.model_validate({"kind": "lemma-integral"})
        with pytest.raises(ValueError):
            experiment_service.expand(cfg)


class TestReports:
    def test_lemma_table(self):
        cfg = ExperimentConfig.model_validate({"kind": "lemma-integral", "lemma": {"t_max": 100.0, "n_points": 20}})
        table = experiment_service.run_experiment(cfg)
        assert experiment_service.is_success(table)
        assert "borné" in experiment_service.summary_text(table)

    def test_selftest_is_not_dispatched(self):
        with pytest.raises(ValueError):
            experiment_service.run_experiment(ExperimentConfig.model_validate({"kind": "selftest"}))

    def test_residual_columns(self):
        report = ResidualReport(
            kind="nse-power", m_star=0, seed=1, resolution=8, norm_alpha=0.0, norm_sigma=0.0, margin_min=0.05,
            samples=[ResidualSample(t=1.0, residuals=[0.1, 0.01], perturbed=[0.2, 0.02], solution_norm=1.0)],
        )
        rows, columns = experiment_service.residual_rows(report)
        assert columns == ["t", "r_1", "r_2", "r_1_perturbed", "r_2_perturbed", "solution"]
        assert rows[0]["r_2_perturbed"] == 0.02

    def test_write_convergence_report(self, tmp_path):
        report = ConvergenceReport(
            resolution=8, t_start=1.0, t_end=3.0, dts=[0.02, 0.01, 0.005],
            errors=[1.6e-4, 4e-5, 1e-5], ratios=[4.0, 4.0], verdict=True,
        )
        paths = experiment_service.write_report(report, tmp_path, "conv")
        assert sorted(p.name for p in paths) == ["conv.csv", "conv.json", "conv.txt"]
        rows = serialization.read_csv(tmp_path / "conv.csv")
        assert [r["ratio"] for r in rows] == ["", "4", "4"]
        assert "Verdict: OK" in (tmp_path / "conv.txt").read_text(encoding="utf-8")


class TestManufacturedConvergence:
    def test_second_order_in_time(self, config_dir):
        cfg = experiment_service.load_config(config_dir / "manufactured.yaml", ["lattice.resolution=8"])
        report = experiment_service.run_manufactured_convergence(cfg, config_dir)
        assert len(report.errors) == 3
        assert all(3.0 <= r <= 5.0 for r in report.ratios)
        assert report.verdict


@pytest.mark.slow
class TestNonlinearReproduction:
    def test_power_case_first_truncation(self, config_dir):
        cfg = experiment_service.load_config(
            config_dir / "nse-power.yaml",
            [
                "lattice.resolution=16",
                "solver.dt=0.01",
                "solver.t_end=30",
                "solver.n_samples=40",
                "fit.t_lo=5",
                "fit.t_hi=30",
                "residual_index.alpha=0",
                "order=1",
                "perturbation=0",
            ],
        )
        report = experiment_service.run_nse_experiment(cfg, config_dir)
        (truncation,) = report.truncations
        assert truncation.fit.slope < -1.5
        assert report.verdict
        assert not report.horizon_limited

    def test_power_case_with_perturbation(self, config_dir):
        cfg = experiment_service.load_config(
            config_dir / "nse-power.yaml",
            [
                "lattice.resolution=16",
                "solver.dt=0.01",
                "solver.t_end=30",
                "solver.n_samples=40",
                "fit.t_lo=15",
                "fit.t_hi=30",
                "residual_index.alpha=0",
                "order=1",
            ],
        )
        report = experiment_service.run_nse_experiment(cfg, config_dir)
        (truncation,) = report.truncations
        assert truncation.perturbed_fit is not None
        assert truncation.slopes_agree

    def test_power_case_three_truncations(self, config_dir):
        cfg = experiment_service.load_config(
            config_dir / "nse-power.yaml",
            ["lattice.resolution=16", "solver.t_end=60", "fit.t_hi=60", "order=3", "perturbation=0"],
        )
        report = experiment_service.run_nse_experiment(cfg, config_dir)
        assert [tr.order for tr in report.truncations] == [1, 2, 3]
        for truncation in report.truncations:
            assert truncation.fit is not None
            assert truncation.margin <= -0.05
            assert truncation.passed
        slopes = [tr.fit.slope for tr in report.truncations]
        assert slopes[0] > slopes[1] > slopes[2]
        assert report.verdict

    def test_log_case(self, config_dir):
        cfg = experiment_service.load_config(config_dir / "nse-log.yaml")
        report = experiment_service.run_nse_experiment(cfg, config_dir)
        (truncation,) = report.truncations
        assert report.m_star == 1
        assert truncation.fit.slope <= -0.55
        assert truncation.passed
        assert report.verdict
        assert not report.horizon_limited
