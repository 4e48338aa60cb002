import csv
import json
import shutil

import pytest

from adatom_noise import units
from adatom_noise.cli import EXIT_INVALID, EXIT_NUMERICAL, EXIT_OK, main
from adatom_noise.scenario import (SCANNABLE, ScenarioError, StageError, load_scenario, run_scenario, scan,
                                   shipped_scenario, validate)

SHIPPED = ("bare_au", "he_monolayer", "n_monolayer", "n_diffusion", "workfunction_demo", "bare_au_tabulated_pdos")


def _copy(tmp_path, name):
    src = shipped_scenario(name)
    raw = json.loads(src.read_text())
    return raw, src


def _write(tmp_path, raw, name="sc.json"):
    path = tmp_path / name
    path.write_text(json.dumps(raw))
    return path


@pytest.fixture(scope="module")
def bare_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("bare")
    return out, run_scenario(shipped_scenario("bare_au"), out)


@pytest.fixture(scope="module")
def n_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("n")
    return out, run_scenario(shipped_scenario("n_monolayer"), out, stages=["spectrum"])


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_scenarios_validate(name):
    assert validate(shipped_scenario(name)) == []


def test_validation_lists_every_problem(tmp_path):
    raw, _ = _copy(tmp_path, "bare_au")
    raw["adatom"]["mass"]["unit"] = "parsec"
    raw["potential"]["U0"] = {"value": 0.068}
    raw["host"]["rho"]["unit"] = "m/s"
    problems = validate(_write(tmp_path, raw))
    assert len(problems) >= 3
    text = "\n".join(problems)
    assert "parsec" in text and "U0" in text and "rho" in text


def test_no_computation_section(tmp_path):
    raw, _ = _copy(tmp_path, "bare_au")
    for key in ("spectrum", "trap", "estimates"):
        raw.pop(key)
    problems = validate(_write(tmp_path, raw))
    assert any("computation section" in p for p in problems)


def test_missing_referenced_file(tmp_path):
    raw, _ = _copy(tmp_path, "workfunction_demo")
    raw["electrostatics"]["clean_grid"] = "does_not_exist.txt"
    path = _write(tmp_path, raw)
    assert any("does_not_exist" in p for p in validate(path))
    with pytest.raises(ScenarioError):
        load_scenario(path)


def test_bare_au_run_outputs(bare_run):
    out, report = bare_run
    names = {p.name for p in out.iterdir()}
    for expected in ("levels.csv", "wavefunctions.csv", "spectrum_T0050p00K.csv", "spectrum_T0050p00K.json",
                     "spectrum_T0150p00K.csv", "heating.json", "estimates.json", "report.json", "manifest.json"):
        assert expected in names
    with open(out / "spectrum_T0050p00K.csv", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["omega_rad_s", "S_mu_si"] and len(rows) == 162
    assert report["schema_version"] == 1
    assert report["boundstates"]["nu10_2pi_THz"] == pytest.approx(4.5, rel=0.05)


def test_bare_au_fitted_width(bare_run):
    _, report = bare_run
    for entry in report["spectrum"]:
        assert entry["fitted_width_2pi_THz"] == pytest.approx(2.2, rel=0.20)


def test_n_monolayer_fitted_width(n_run):
    _, report = n_run
    for entry in report["spectrum"]:
        assert entry["fitted_width_2pi_THz"] == pytest.approx(3.9, rel=0.20)


def test_manifest_fields(bare_run):
    out, _ = bare_run
    man = json.loads((out / "manifest.json").read_text())
    assert man["constants_version"] == units.CONSTANTS_VERSION
    assert len(man["scenario_sha256"]) == 64
    assert {"numpy", "scipy", "python"} <= set(man["module_versions"])
    assert man["seeds"]["scenario"] == 101
    assert "spectrum_T0050p00K.csv" in man["outputs"]


def test_byte_identical_rerun(bare_run, tmp_path):
    out, _ = bare_run
    run_scenario(shipped_scenario("bare_au"), tmp_path)
    for p in out.iterdir():
        assert (tmp_path / p.name).read_bytes() == p.read_bytes(), p.name


def test_json_format(tmp_path):
    run_scenario(shipped_scenario("n_diffusion"), tmp_path, fmt="json")
    doc = json.loads((tmp_path / "diffusion_rates.json").read_text())
    assert doc["schema_version"] == 1
    assert doc["columns"]["T_K"] == pytest.approx([60.0, 65.0, 70.0], rel=1e-14)


def test_diffusion_run(tmp_path):
    report = run_scenario(shipped_scenario("n_diffusion"), tmp_path)
    d = report["diffusion"]
    assert d["gamma_therm_Hz"][1] == pytest.approx(0.3, rel=0.15)
    assert d["T_migration_K"] == pytest.approx(65.0, abs=1.0)
    assert d["gamma_tunnel_Hz"] == pytest.approx(66.9, rel=0.05)


def test_workfunction_run(tmp_path):
    report = run_scenario(shipped_scenario("workfunction_demo"), tmp_path)
    e = report["electrostatics"]
    assert e["clean"]["W_eV"] == pytest.approx(5.57, abs=1e-3)
    assert e["delta_mu_debye"] == pytest.approx(1.60, rel=0.02)


def test_missing_stage_section():
    with pytest.raises(ScenarioError, match="diffusion"):
        run_scenario(shipped_scenario("bare_au"), stages=["diffusion"])


def test_scan_temperature(tmp_path):
    rows = scan(shipped_scenario("bare_au"), "T", [50, 150], out_dir=tmp_path)
    assert rows[1]["S_mu_low_si"] > rows[0]["S_mu_low_si"]
    assert (tmp_path / "scan_T.csv").exists()


def test_scan_distance():
    rows = scan(shipped_scenario("bare_au"), "d", [50, 100])
    assert rows[0]["S_E_V2_m2_Hz"] / rows[1]["S_E_V2_m2_Hz"] == pytest.approx(16.0, rel=1e-12)


def test_scan_mass():
    rows = scan(shipped_scenario("bare_au"), "m", [100, 400])
    assert rows[0]["nu10_rescaled_2pi_THz"] / rows[1]["nu10_rescaled_2pi_THz"] == pytest.approx(2.0, rel=1e-12)
    assert rows[0]["gamma0_rescaled_2pi_THz"] / rows[1]["gamma0_rescaled_2pi_THz"] == pytest.approx(4.0, rel=1e-12)
    # the re-solved levels follow the same law closely for a fixed well
    assert rows[0]["nu10_2pi_THz"] / rows[1]["nu10_2pi_THz"] == pytest.approx(2.0, rel=0.05)


def test_scan_errors():
    with pytest.raises(ScenarioError, match="unknown scan parameter"):
        scan(shipped_scenario("bare_au"), "colour", [1])
    with pytest.raises(ScenarioError):
        scan(shipped_scenario("bare_au"), "d", [1], unit="K")
    assert set(SCANNABLE) == {"T", "d", "m", "omega_t", "sigma", "zeta"}


def test_cli_exit_codes(tmp_path, capsys):
    good = str(shipped_scenario("n_diffusion"))
    assert main(["diffusion", "--scenario", good, "--out", str(tmp_path / "ok")]) == EXIT_OK
    assert main(["validate", "--scenario", good]) == EXIT_OK
    raw, _ = _copy(tmp_path, "n_diffusion")
    raw["diffusion"]["E_a"]["unit"] = "furlong"
    bad = str(_write(tmp_path, raw))
    assert main(["validate", "--scenario", bad]) == EXIT_INVALID
    assert main(["diffusion", "--scenario", bad]) == EXIT_INVALID
    with pytest.raises(SystemExit) as exc:
        main(["diffusion"])
    assert exc.value.code == 2


def test_cli_numerical_failure(tmp_path, capsys):
    raw, _ = _copy(tmp_path, "workfunction_demo")
    raw["electrostatics"]["flatness_tolerance"] = {"value": 1e-9, "unit": "meV"}
    raw["electrostatics"]["window"]["value"] = [5, 38]
    path = _write(tmp_path, raw)
    shutil.copy(shipped_scenario("workfunction_demo").parent / "workfunction_demo_clean.txt", tmp_path)
    shutil.copy(shipped_scenario("workfunction_demo").parent / "workfunction_demo_n.txt", tmp_path)
    with pytest.raises(StageError, match="electrostatics"):
        run_scenario(path, tmp_path / "lib")
    code = main(["workfunction", "--scenario", str(path), "--out", str(tmp_path / "o")])
    assert code == EXIT_NUMERICAL
    assert "electrostatics" in capsys.readouterr().err


def test_stochastic_check(tmp_path):
    raw, _ = _copy(tmp_path, "bare_au")
    raw["spectrum"]["temperatures"]["value"] = [300]
    raw["spectrum"]["n_levels"] = 3
    raw["spectrum"]["stochastic_check"] = {"n_segments": 100, "relaxation_times_per_segment": 100}
    for key in ("trap", "estimates"):
        raw.pop(key)
    report = run_scenario(_write(tmp_path, raw), tmp_path / "o", seed=5)
    chk = report["spectrum"][0]["stochastic_check"]
    assert chk["seed"] == 5 and chk["jumps"] > 0
    assert chk["max_abs_z"] < 4.0
    assert (tmp_path / "o" / chk["table"]).exists()
