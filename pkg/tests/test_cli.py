import json
import os

import numpy as np
import pytest

from spinlab import cli


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_verify_algebra_command(capsys):
    status = cli.main(["verify-algebra", "--max-dim", "5"])
    out = capsys.readouterr().out
    assert status == 0
    assert "all identities within tolerance" in out
    assert "(m=1, n=1" in out


def test_sphere_equality_command(tmp_path, capsys):
    status = cli.main(["--out", str(tmp_path), "sphere-equality"])
    out = capsys.readouterr().out
    assert status == 0
    assert "all asserted invariants hold" in out
    bundle = json.loads(read(tmp_path / "sphere-equality.json"))
    assert bundle["schema_version"] == 1
    assert bundle["failures"] == []
    assert bundle["reports"][0]["bound_kind"] == "genus-zero"
    assert abs(bundle["reports"][0]["rhs"]) < 1e-10


def test_torus_command_writes_spectrum(tmp_path):
    status = cli.main(
        ["--out", str(tmp_path), "torus", "--r1", "1", "--r2", "1", "-K", "2",
         "--bound", "energy-momentum"]
    )
    assert status == 0
    csv_lines = read(tmp_path / "torus-bounds.csv").decode().splitlines()
    assert csv_lines[0] == "model,operator,mode,eigenvalue,coeff_max"
    assert len(csv_lines) == 1 + 16 * 4  # (2K)^2 modes, fiber 4
    bundle = json.loads(read(tmp_path / "torus-bounds.json"))
    assert bundle["residuals"]["hermiticity"] == 0.0
    txt = read(tmp_path / "torus-bounds.txt").decode()
    assert "all asserted invariants hold" in txt


def test_outputs_are_deterministic(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    for out in (out1, out2):
        assert cli.main(
            ["--out", str(out), "torus", "-K", "2",
             "--bound", "energy-momentum"]
        ) == 0
    for name in ("torus-bounds.json", "torus-bounds.csv", "torus-bounds.txt"):
        assert read(out1 / name) == read(out2 / name)


def test_env_var_output_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "envdir"))
    status = cli.main(["synthetic-curvature"])
    capsys.readouterr()
    assert status == 0
    assert (tmp_path / "envdir" / "synthetic-curvature.json").exists()


def test_aux_and_conformal_presets(tmp_path, capsys):
    assert cli.main(["--out", str(tmp_path), "aux-bundle"]) == 0
    assert cli.main(["--out", str(tmp_path), "conformal-covariance"]) == 0
    capsys.readouterr()
    aux = json.loads(read(tmp_path / "aux-bundle.json"))
    assert aux["failures"] == []
    conf = json.loads(read(tmp_path / "conformal-covariance.json"))
    assert conf["residuals"]["dirac_covariance"] < 1e-6


def test_run_from_config_file(tmp_path, capsys):
    config = tmp_path / "exp.toml"
    config.write_text(
        """
label = "cfg-torus"
pipeline = "torus"

[model]
kind = "circle-product"
radii = [1.0, 2.0]

[operators]
truncation = 2

[bounds]
kinds = ["energy-momentum", "curvature-min"]

[identity]
q_killing = [0.2]
q_em = [0.3]
"""
    )
    status = cli.main(["--out", str(tmp_path), "run", str(config)])
    capsys.readouterr()
    assert status == 0
    bundle = json.loads(read(tmp_path / "cfg-torus.json"))
    kinds = {r["bound_kind"] for r in bundle["reports"]}
    assert kinds == {"energy-momentum", "curvature-min"}


def test_run_config_parse_error(tmp_path):
    config = tmp_path / "broken.toml"
    config.write_text("label = [unterminated\n")
    with pytest.raises(SystemExit) as err:
        cli.main(["run", str(config)])
    assert "config parse error" in str(err.value)


def test_hypothesis_failure_is_not_an_error(tmp_path, capsys):
    config = tmp_path / "flat.toml"
    config.write_text(
        """
label = "flat"
pipeline = "torus"

[model]
kind = "flat-torus"
m = 2
n = 1

[operators]
truncation = 2

[bounds]
kinds = ["energy-momentum"]
"""
    )
    status = cli.main(["--out", str(tmp_path), "run", str(config)])
    capsys.readouterr()
    assert status == 0  # inapplicable bounds are reported, not failed
    bundle = json.loads(read(tmp_path / "flat.json"))
    assert all(not r["hypothesis_ok"] for r in bundle["reports"])
    assert any(
        r["violated_clause"] == "|H|^2 > 0" for r in bundle["reports"]
    )


def test_report_render_shape():
    from spinlab.bounds import BoundReport

    reports = [
        BoundReport("energy-momentum", "m2", 1.0, 1.0, True, "", 0.5, 0.5),
        BoundReport("curvature", "m1", -1.0, 1.0, False, "|H|^2 > 0",
                    0.0, 1.0),
    ]
    text = cli.report_render(reports)
    lines = text.splitlines()
    assert lines[0].startswith("bound_kind")
    assert len(lines) == 3
    # deterministic ordering by kind then model
    assert lines[1].startswith("curvature")
    empty = cli.report_render([])
    assert empty.splitlines()[0].startswith("bound_kind")
    assert len(empty.splitlines()) == 1


def test_config_validation():
    with pytest.raises(ValueError):
        cli.validate_config({"operators": {"truncation": 0}})
    with pytest.raises(ValueError):
        cli.validate_config({"tolerances": {"margin": -1.0}})
    with pytest.raises(ValueError):
        cli.validate_config({"split": {"parity_m": 2}})
    with pytest.raises(ValueError):
        cli.validate_config({"bounds": {"kinds": ["no-such-kind"]}})
    cli.validate_config({"bounds": {"kinds": ["energy-momentum"]}})


def test_run_multiple_experiments(tmp_path, capsys):
    config = tmp_path / "multi.toml"
    config.write_text(
        """
[[experiment]]
label = "sphere-a"
pipeline = "sphere"

[[experiment]]
label = "synth"
pipeline = "synthetic"
[experiment.synthetic]
draws = 5
"""
    )
    status = cli.main(["--out", str(tmp_path), "run", str(config)])
    out = capsys.readouterr().out
    assert status == 0
    assert (tmp_path / "sphere-a.json").exists()
    assert (tmp_path / "synth.json").exists()
    assert "sphere-a" in out and "synth" in out
