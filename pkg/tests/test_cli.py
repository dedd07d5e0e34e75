"""Tests for the holonomy command line."""

import json

import numpy as np
import pytest
from typer.testing import CliRunner

from holo.cli import EXIT_BAD_INPUT, EXIT_FAILURE, app
from holonomy_lab import __version__
from holonomy_lab.linalg import HADAMARD
from holonomy_lab.schemas import MatrixPayload


@pytest.fixture
def runner():
    """Provide a CLI runner."""
    return CliRunner()


def _write(path, payload):
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def _rectangle(method="ordered"):
    return {
        "loop": {
            "chart": "CPN",
            "n": 2,
            "plane": ["theta_1", "phi_1"],
            "kind": "rectangle",
            "corner": [0.0, 0.0],
            "sides": [np.pi / 2, np.pi],
        },
        "method": method,
        "steps": 64,
    }


class TestHolonomyCommand:
    """Test the holonomy and curvature commands."""

    def test_c1_rectangle(self, runner, tmp_path):
        """Test a hemisphere C1 loop gives diag(-1, 1)."""
        out = tmp_path / "holonomy.json"
        config = _write(tmp_path / "c1.json", _rectangle())
        result = runner.invoke(app, ["holonomy", "--config", config, "--out", str(out)])
        assert result.exit_code == 0
        report = json.loads(out.read_text())
        unitary = MatrixPayload.model_validate(report["unitary"]).to_array()
        assert np.allclose(unitary, np.diag([-1.0, 1.0]), atol=1e-10)
        assert report["unitarity_defect"] < 1e-10

    def test_stokes_on_ellipse_fails(self, runner, tmp_path):
        """Test a Stokes request on a non-rectangle exits with a failure."""
        payload = {
            "loop": {
                "chart": "CPN",
                "n": 2,
                "plane": ["theta_1", "phi_1"],
                "kind": "ellipse",
                "center": [0.5, 0.0],
                "semi_axes": [0.2, 0.4],
            },
            "method": "stokes",
        }
        config = _write(tmp_path / "ellipse.json", payload)
        result = runner.invoke(app, ["holonomy", "--config", config])
        assert result.exit_code == EXIT_FAILURE

    def test_malformed_json(self, runner, tmp_path):
        """Test unparsable configs exit with the input error code."""
        bad = tmp_path / "bad.json"
        bad.write_text("{not json", encoding="utf-8")
        result = runner.invoke(app, ["holonomy", "--config", str(bad)])
        assert result.exit_code == EXIT_BAD_INPUT

    def test_missing_config(self, runner, tmp_path):
        """Test a missing config file exits with the input error code."""
        result = runner.invoke(app, ["holonomy", "--config", str(tmp_path / "absent.json")])
        assert result.exit_code == EXIT_BAD_INPUT

    def test_invalid_config(self, runner, tmp_path):
        """Test schema violations exit with the input error code."""
        payload = _rectangle()
        del payload["loop"]["sides"]
        config = _write(tmp_path / "invalid.json", payload)
        result = runner.invoke(app, ["holonomy", "--config", config])
        assert result.exit_code == EXIT_BAD_INPUT

    def test_curvature(self, runner, tmp_path):
        """Test F_{theta_1 phi_1} = -i diag(sin 2 theta, 0)."""
        out = tmp_path / "curvature.json"
        payload = {"chart": "CPN", "n": 2, "coords": [0.45, 0.0, 0.3, 0.0], "mu": 0, "nu": 2}
        config = _write(tmp_path / "curvature_config.json", payload)
        result = runner.invoke(app, ["curvature", "--config", config, "--out", str(out)])
        assert result.exit_code == 0
        value = MatrixPayload.model_validate(json.loads(out.read_text())["value"]).to_array()
        assert np.allclose(value, -1j * np.diag([np.sin(0.9), 0.0]), atol=1e-8)


class TestIrreducibilityCommand:
    """Test the irreducibility command."""

    def test_cp2(self, runner, tmp_path):
        """Test the CP^2 curvature spans u(2) and reruns are byte-identical."""
        first, second = tmp_path / "first.json", tmp_path / "second.json"
        for out in (first, second):
            result = runner.invoke(
                app, ["irreducibility", "--chart", "CPN", "--n", "2", "--out", str(out)]
            )
            assert result.exit_code == 0
        payload = json.loads(first.read_text())
        assert payload["span_dim"] == 4
        assert payload["n_squared"] == 4
        assert payload["lie_dim"] == 4
        assert first.read_bytes() == second.read_bytes()

    def test_seeded_point(self, runner, tmp_path):
        """Test a seeded random point of CP^2 also spans u(2)."""
        out = tmp_path / "seeded.json"
        result = runner.invoke(
            app, ["irreducibility", "--chart", "CPN", "--n", "2", "--seed", "7", "--out", str(out)]
        )
        assert result.exit_code == 0
        payload = json.loads(out.read_text())
        assert payload["span_dim"] == 4
        assert payload["lie_dim"] == 4


class TestKickTableCommand:
    """Test the kick-table command."""

    def test_small_table(self, runner, tmp_path):
        """Test the CSV header and one row per N."""
        out = tmp_path / "table.csv"
        config = _write(
            tmp_path / "kick.json", {"Ns": [5, 10], "ref_n": 20, "cutoff": 20, "radius": 0.5}
        )
        result = runner.invoke(app, ["kick-table", "--config", config, "--out", str(out)])
        assert result.exit_code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "N,dev00,dev01,dev10,dev11"
        assert [line.split(",")[0] for line in lines[1:]] == ["5", "10"]

    def test_invalid_config(self, runner, tmp_path):
        """Test a reference below the largest N is rejected."""
        config = _write(tmp_path / "kick.json", {"Ns": [5, 10], "ref_n": 8})
        result = runner.invoke(app, ["kick-table", "--config", config])
        assert result.exit_code == EXIT_BAD_INPUT


class TestSynthesizeCommand:
    """Test the synthesize command."""

    def test_hadamard(self, runner, tmp_path):
        """Test the Hadamard program verifies within tolerance."""
        out = tmp_path / "program.json"
        target = _write(tmp_path / "h.json", MatrixPayload.from_array(HADAMARD).model_dump())
        result = runner.invoke(
            app, ["synthesize", "--target", target, "--steps", "64", "--out", str(out)]
        )
        assert result.exit_code == 0
        report = json.loads(out.read_text())
        assert report["within_tolerance"] is True
        assert [step["label"] for step in report["steps"]] == ["C1", "C3"]

    def test_needs_target(self, runner):
        """Test synthesize without a target is an input error."""
        result = runner.invoke(app, ["synthesize"])
        assert result.exit_code == EXIT_BAD_INPUT

    def test_non_unitary_target(self, runner, tmp_path):
        """Test a non-unitary target fails."""
        target = _write(tmp_path / "m.json", MatrixPayload.from_array(2 * np.eye(2)).model_dump())
        result = runner.invoke(app, ["synthesize", "--target", target])
        assert result.exit_code == EXIT_FAILURE


class TestMiscCommands:
    """Test the adiabatic check and version commands."""

    def test_adiabatic_check(self, runner, tmp_path):
        """Test the report lists one row per duration."""
        out = tmp_path / "adiabatic.json"
        config = _write(tmp_path / "adiabatic.json.in", {"durations": [20.0, 40.0], "dt": 0.05})
        result = runner.invoke(app, ["adiabatic-check", "--config", config, "--out", str(out)])
        assert result.exit_code == 0
        payload = json.loads(out.read_text())
        assert [row["T"] for row in payload["rows"]] == [20.0, 40.0]
        assert payload["berry_phase"] == pytest.approx(np.pi * 0.1 * 0.3, abs=1e-3)

    def test_version(self, runner):
        """Test the version command prints the package version."""
        result = runner.invoke(app, ["version"])
        assert result.exit_code == 0
        assert __version__ in result.stdout
