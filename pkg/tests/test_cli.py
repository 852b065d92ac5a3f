import json

import pytest
import yaml
from click.testing import CliRunner

from app.cli import cli
from app.core.config import settings


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner, tmp_path, *args):
    return runner.invoke(cli, ["--log-level", "WARNING", "--output-dir", str(tmp_path), *args])


@pytest.fixture
def exponential_config(tmp_path):
    path = tmp_path / "decay.yaml"
    path.write_text(
        yaml.safe_dump(
            {
                "kind": "linear",
                "lattice": {"resolution": 8},
                "solver": {"dt": 0.01, "t_start": 1.0, "t_end": 2.0, "n_samples": 5},
                "linear": {"w0": {"modes": [{"k": [1, 0, 0], "real": [0.0, 0.1, 0.0]}]}},
                "output": {"name": "decay"},
            }
        )
    )
    return path


class TestCli:
    def test_version(self, runner):
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert settings.API_VERSION in result.output

    def test_schema(self, runner, tmp_path):
        result = _invoke(runner, tmp_path, "schema")
        assert result.exit_code == 0
        schema = json.loads(result.output)
        assert "kind" in schema["properties"]

    def test_lemma_integral(self, runner, tmp_path):
        result = _invoke(runner, tmp_path, "--set", "lemma.n_points=20", "--set", "lemma.t_max=100", "lemma-integral")
        assert result.exit_code == 0, result.output
        assert (tmp_path / "lemma.json").exists()
        assert (tmp_path / "lemma.csv").exists()

    def test_expand(self, runner, tmp_path, config_dir):
        result = _invoke(runner, tmp_path, "--set", "lattice.resolution=8", "expand", str(config_dir / "nse-power.yaml"))
        assert result.exit_code == 0, result.output
        assert "q_3" in result.output
        for n in (1, 2, 3):
            assert (tmp_path / f"nse-power.q{n}.exp").exists()
        assert (tmp_path / "nse-power.expand.json").exists()

    def test_verify(self, runner, tmp_path, exponential_config):
        result = _invoke(runner, tmp_path, "verify", str(exponential_config))
        assert result.exit_code == 0, result.output
        assert "Verdict: OK" in result.output
        for suffix in ("json", "csv", "txt"):
            assert (tmp_path / f"decay.{suffix}").exists()

    def test_simulate(self, runner, tmp_path, exponential_config):
        result = _invoke(runner, tmp_path, "--set", "output.write_fields=true", "simulate", str(exponential_config))
        assert result.exit_code == 0, result.output
        assert (tmp_path / "decay.trajectory.csv").exists()
        assert (tmp_path / "decay.sample0.field").exists()

    def test_invalid_config(self, runner, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("kind: nse-power\n")
        result = _invoke(runner, tmp_path, "verify", str(path))
        assert result.exit_code == 1

    def test_invalid_override(self, runner, tmp_path, exponential_config):
        result = _invoke(runner, tmp_path, "--set", "solver.dt", "verify", str(exponential_config))
        assert result.exit_code == 1

    def test_selftest_kind_is_rejected_by_verify(self, runner, tmp_path):
        path = tmp_path / "st.yaml"
        path.write_text("kind: selftest\n")
        assert _invoke(runner, tmp_path, "verify", str(path)).exit_code == 1

    def test_selftest_fault_exit_code(self, runner, tmp_path):
        result = _invoke(runner, tmp_path, "selftest", "--fault", "resolvent-sign", "--seed", "3")
        assert result.exit_code == 2
        report = json.loads((tmp_path / "selftest.json").read_text())
        assert report["passed"] is False
        assert report["fault"] == "resolvent-sign"
