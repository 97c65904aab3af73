import json
import os

import numpy as np
import pytest

from quadriclab.cli import RunConfig, ConfigError, kronecker_points, main
from quadriclab.hypersurfaces import Box


def run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def load_report(tmp_path, command, example):
    with open(tmp_path / f"{command}_{example}_report.json") as fh:
        return json.load(fh)


class TestConfig:
    def test_unknown_example(self):
        with pytest.raises(ConfigError):
            RunConfig(command="verify", example="torus")

    def test_h_range(self):
        with pytest.raises(ConfigError):
            RunConfig(command="verify", h=1.0)

    def test_grid_positive(self):
        with pytest.raises(ConfigError):
            RunConfig(command="verify", grid=0)

    def test_tolerance_override(self):
        cfg = RunConfig(command="verify", tolerances={"gauss_equation": 1e-2})
        assert cfg.tol("gauss_equation") == 1e-2
        assert cfg.tol("codazzi_equation") == 1e-3


class TestSamplePoints:
    def test_deterministic(self):
        box = Box.cube(3, 0.4)
        a = kronecker_points(box, 5, seed=2, margin=0.05)
        b = kronecker_points(box, 5, seed=2, margin=0.05)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_interior(self):
        box = Box.cube(2, 0.4)
        for x in kronecker_points(box, 50, seed=0, margin=0.03):
            assert box.contains(x, margin=0.029)

    def test_seed_changes_points(self):
        box = Box.cube(2, 0.4)
        a = kronecker_points(box, 3, seed=0, margin=0.0)
        b = kronecker_points(box, 3, seed=1, margin=0.0)
        assert not np.allclose(a[0], b[0])


class TestVerifyCommand:
    def test_sphere_passes(self, tmp_path, capsys):
        code = run(tmp_path, "verify", "--example", "sphere", "--n", "3", "--r", "0.7071", "--grid", "1")
        assert code == 0
        rep = load_report(tmp_path, "verify", "sphere")
        names = {c["name"] for r in rep["results"] for c in r["checks"]}
        assert "sectional_value" in names  # the curvature-2 check
        assert rep["summary"]["all_pass"] is True
        assert rep["summary"]["distinct_angles"] == 1

    def test_cartan_report_contents(self, tmp_path):
        code = run(tmp_path, "verify", "--example", "cartan", "--grid", "1")
        assert code == 0
        rep = load_report(tmp_path, "verify", "cartan")
        names = {c["name"] for r in rep["results"] for c in r["checks"]}
        assert "cubic_component_squared" in names
        assert "sectional_value" in names
        assert rep["summary"]["distinct_angles"] == 3

    def test_invalid_radius_exits_2(self, tmp_path):
        assert run(tmp_path, "verify", "--example", "sphere", "--r", "2") == 2

    def test_unknown_example_exits_2(self, tmp_path):
        assert run(tmp_path, "verify", "--example", "nonsense") == 2

    def test_failure_exit_code(self, tmp_path):
        # an absurdly tight tolerance forces a reported failure
        code = run(
            tmp_path,
            "verify",
            "--example",
            "sphere",
            "--grid",
            "1",
            "--tol",
            "gauss_equation=1e-30",
        )
        assert code == 1
        rep = load_report(tmp_path, "verify", "sphere")
        assert rep["summary"]["failed"] >= 1

    def test_report_schema(self, tmp_path):
        run(tmp_path, "verify", "--example", "product", "--n", "2", "--grid", "1")
        rep = load_report(tmp_path, "verify", "product")
        assert set(rep) == {"config", "results", "summary", "timestamp"}
        for r in rep["results"]:
            for c in r["checks"]:
                assert set(c) == {"name", "residual", "tolerance", "pass"}
        assert isinstance(rep["summary"]["skipped"], list)

    def test_determinism_modulo_timestamp(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        run(d1, "verify", "--example", "product", "--n", "2", "--grid", "2", "--seed", "3")
        run(d2, "verify", "--example", "product", "--n", "2", "--grid", "2", "--seed", "3")
        a = [l for l in open(d1 / "verify_product_report.json") if "timestamp" not in l]
        b = [l for l in open(d2 / "verify_product_report.json") if "timestamp" not in l]
        assert a == b


class TestAnglesCommand:
    def test_sphere_quarter_pi(self, tmp_path):
        code = run(
            tmp_path, "angles", "--example", "sphere", "--r", "0.70710678118654752",
            "--gauge", "canonical", "--grid", "2",
        )
        assert code == 0
        rep = load_report(tmp_path, "angles", "sphere")
        for row in rep["results"]:
            np.testing.assert_allclose(row["angles"], np.pi / 4.0, atol=1e-8)
        assert rep["summary"]["distinct_angles"] == 1

    def test_cartan_count(self, tmp_path):
        run(tmp_path, "angles", "--example", "cartan", "--grid", "2")
        rep = load_report(tmp_path, "angles", "cartan")
        assert rep["summary"]["distinct_angles"] == 3

    def test_product_count(self, tmp_path):
        run(tmp_path, "angles", "--example", "product", "--n", "2", "--grid", "2")
        rep = load_report(tmp_path, "angles", "product")
        assert rep["summary"]["distinct_angles"] == 2


class TestOdeCommand:
    def test_defaults_pass(self, tmp_path):
        code = run(tmp_path, "ode", "--n", "3", "--steps", "2000", "--span", "0.6")
        assert code == 0
        rep = load_report(tmp_path, "ode", "rotational")
        names = {c["name"] for r in rep["results"] for c in r["checks"]}
        assert "first_integral" in names
        assert "warp_factor_law" in names
        assert 12.0 <= rep["trajectory"]["order_ratio"] <= 20.0

    def test_csv_columns(self, tmp_path):
        run(tmp_path, "ode", "--n", "3", "--steps", "1000", "--span", "0.5")
        with open(tmp_path / "profile.csv") as fh:
            header = fh.readline().strip()
            first = fh.readline().strip().split(",")
        assert header == "theta,alpha,dalpha,gx,gy,gz"
        assert len(first) == 6
        g = np.array([float(v) for v in first[3:]])
        assert abs(np.linalg.norm(g) - 1.0) < 1e-8

    def test_singular_initial_angle_exits_2(self, tmp_path):
        assert run(tmp_path, "ode", "--n", "3", "--alpha0", "0") == 2

    def test_out_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QUADRICLAB_OUT_DIR", str(tmp_path / "env"))
        code = main(["ode", "--n", "3", "--steps", "1000", "--span", "0.5"])
        assert code == 0
        assert os.path.exists(tmp_path / "env" / "profile.csv")
