import json

import numpy as np
import pytest
from click.testing import CliRunner

from casimirlab import __version__
from casimirlab.cli import main, parse_grid
from casimirlab.config import parse_config
from casimirlab.errors import ParseError

FAST_CONFIG = """\
theory_cache_points=40
n_scans=2
grid_points=120
seed=11
"""


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "run.cfg").write_text(FAST_CONFIG)
    return d


@pytest.fixture(scope="module")
def campaign_dir(runner, workdir):
    out = workdir / "campaign"
    result = runner.invoke(main, ["synth", "--config", str(workdir / "run.cfg"),
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    return out


@pytest.fixture(scope="module")
def analysis_dir(runner, workdir, campaign_dir):
    out = workdir / "analysis"
    result = runner.invoke(main, ["analyze", "--config", str(workdir / "run.cfg"),
                                  "--scans", str(campaign_dir),
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    return out


def read_meta(path):
    meta = {}
    for line in path.read_text().splitlines():
        if not line.startswith("#"):
            break
        key, _, value = line[1:].strip().partition("=")
        meta[key.strip()] = value.strip()
    return meta


def test_parse_grid():
    np.testing.assert_allclose(parse_grid("1:3:3"), [1.0, 2.0, 3.0])
    for bad in ("1:3", "3:1:5", "a:b:c", "1:3:1"):
        with pytest.raises(ParseError):
            parse_grid(bad)


def test_epsilon_command(runner, workdir):
    out = workdir / "eps.csv"
    result = runner.invoke(main, ["epsilon", "--xi-ev", "0.1:10:5",
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    meta = read_meta(out)
    assert meta["version"] == __version__
    assert meta["config_hash"] == parse_config("").digest()
    rows = [line for line in out.read_text().splitlines()
            if line and not line.startswith("#") and not line.startswith("xi_ev")]
    assert len(rows) == 5
    eps = [float(r.split(",")[1]) for r in rows]
    assert all(a > b >= 1.0 for a, b in zip(eps, eps[1:]))


def test_theory_command(runner, workdir):
    out = workdir / "theory.csv"
    result = runner.invoke(main, ["theory", "--z", "100:500:5",
                                  "--config", str(workdir / "run.cfg"),
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    rows = [line.split(",") for line in out.read_text().splitlines()
            if line and not line.startswith(("#", "separation_nm"))]
    forces = [float(r[1]) for r in rows]
    assert all(f < 0 for f in forces)
    assert -185.0 < forces[0] < -140.0


def test_electro_command(runner, workdir):
    out = workdir / "electro.csv"
    result = runner.invoke(main, ["electro", "--z", "100:500:3",
                                  "--voltage", "0.31", "--out", str(out)])
    assert result.exit_code == 0, result.output
    rows = [line.split(",") for line in out.read_text().splitlines()
            if line and not line.startswith(("#", "separation_nm"))]
    for _, exact, pfa in rows:
        assert abs(float(exact) / float(pfa) - 1.0) < 0.03


def test_synth_campaign_layout(campaign_dir):
    assert (campaign_dir / "truth.json").exists()
    assert (campaign_dir / "manifest.txt").exists()
    scans = sorted(campaign_dir.glob("*.csv"))
    assert len(scans) == 2 + 6   # grounded + voltage scans
    meta = read_meta(campaign_dir / "manifest.txt")
    assert meta["seed"] == "11"


def test_analyze_outputs(analysis_dir):
    doc = json.loads((analysis_dir / "results.json").read_text())
    assert doc["meta"]["version"] == __version__
    assert abs(doc["z0_nm"] - 48.9) < 1.5
    assert doc["n_points"] == 441
    assert set(doc["variants"]) == {"shift_minus_3nm", "shift_plus_3nm",
                                    "opaque_cap"}
    mean = (analysis_dir / "mean_curve.csv").read_text().splitlines()
    assert any(line.startswith("separation_nm,force_pn,std_pn") for line in mean)


def test_compare_command(runner, workdir, analysis_dir):
    out = workdir / "compare.json"
    result = runner.invoke(main, ["compare",
                                  "--curve", str(analysis_dir / "mean_curve.csv"),
                                  "--config", str(workdir / "run.cfg"),
                                  "--n-scans", "2", "--emit-curve",
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    doc = json.loads(out.read_text())
    assert doc["sigma_rms_pn"] > 0
    assert (workdir / "compare.curve.csv").exists()


def test_fit_z0_command(runner, workdir, campaign_dir):
    out = workdir / "z0.json"
    scan = sorted(campaign_dir.glob("cal_*.csv"))[0]
    result = runner.invoke(main, ["fit-z0", "--scan", str(scan),
                                  "--config", str(workdir / "run.cfg"),
                                  "--emit-curve", "--out", str(out)])
    assert result.exit_code == 0, result.output
    doc = json.loads(out.read_text())
    assert abs(doc["z0_nm"] - 48.9) < 1.5
    curve = (workdir / "z0.curve.csv").read_text().splitlines()
    assert any(line.startswith("separation_nm,force_pn,model_pn")
               for line in curve)


def test_calibrate_k_command(runner, workdir, tmp_path_factory):
    from casimirlab.forcecurve import save_scan
    from casimirlab.synth import SynthTruth, generate_stiffness_scans
    from casimirlab.electrostatics import ElectrostaticConfig

    stiff_dir = tmp_path_factory.mktemp("stiff")
    truth = SynthTruth(noise_sigma_pn=0.0, seed=11)
    for scan in generate_stiffness_scans(truth, ElectrostaticConfig()):
        with open(stiff_dir / f"{scan.scan_id}.csv", "w") as fh:
            save_scan(scan, fh)
    out = workdir / "k.json"
    result = CliRunner().invoke(main, ["calibrate-k", "--scans", str(stiff_dir),
                                       "--out", str(out)])
    assert result.exit_code == 0, result.output
    doc = json.loads(out.read_text())
    assert doc["spring_constant_n_per_m"] == pytest.approx(0.0169, rel=1e-6)


def test_exit_code_input_errors(runner, workdir, tmp_path):
    result = runner.invoke(main, ["epsilon", "--xi-ev", "nope",
                                  "--out", str(tmp_path / "x.csv")])
    assert result.exit_code == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("not,a,scan\n")
    result = runner.invoke(main, ["fit-z0", "--scan", str(bad),
                                  "--out", str(tmp_path / "y.json")])
    assert result.exit_code == 2


def test_exit_code_fit_failure(runner, workdir, tmp_path):
    lines = ["# scan_id=flat", "# applied_voltage_v=0.31", "piezo_nm,force_pn"]
    lines += [f"{z},0" for z in np.linspace(30.0, 920.0, 60)]
    scan = tmp_path / "flat.csv"
    scan.write_text("\n".join(lines) + "\n")
    result = runner.invoke(main, ["fit-z0", "--scan", str(scan),
                                  "--config", str(workdir / "run.cfg"),
                                  "--out", str(tmp_path / "z.json")])
    assert result.exit_code == 4
