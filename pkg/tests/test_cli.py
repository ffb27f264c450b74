import json

import numpy as np
import pytest

from ladder_eit import read_spectrum_csv
from ladder_eit.analysis import read_peak_table
from ladder_eit.cli import main

FIG3_CFG = {"ladder": {"gamma3": 3.5, "rabi_c": 7.5, "delta_c": 20.0},
            "distribution": {"kind": "lorentzian", "delta_v": 16.5}, "peak_absorption": 0.3}


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def fig3_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("fig3")
    cfg = write(d / "cfg.json", FIG3_CFG)
    assert run("simulate", "--config", cfg, "--grid", "-60:30:0.1", "--out", d / "sim") == 0
    return d


def test_simulate_outputs(fig3_run):
    sim = fig3_run / "sim"
    for name in ("transmission.csv", "transmission.json", "difference.csv", "simulate.svg", "manifest.json"):
        assert (sim / name).exists()
    manifest = json.loads((sim / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["config"]["grid"] == "-60:30:0.1"
    assert manifest["config"]["resolved_amplitude"] > 0
    svg = (sim / "simulate.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg
    assert read_spectrum_csv(sim / "difference.csv").kind == "difference"


def test_fig3_fwhm_via_analyze(fig3_run, tmp_path):
    cfg = write(tmp_path / "a.json", {"input": str(fig3_run / "sim" / "difference.csv"), "min_height": 1e-3})
    assert run("analyze", "--config", cfg, "--out", tmp_path) == 0
    peaks = read_peak_table(tmp_path / "peaks.csv")
    assert len(peaks) == 1
    assert peaks[0].fwhm_mhz == pytest.approx(5.0, abs=1.0)


def test_zero_amplitude_is_flat(tmp_path):
    cfg = write(tmp_path / "c.json", {"distribution": {"kind": "lorentzian", "delta_v": 16.5, "amplitude": 0.0},
                                      "grid": "-50:50:1"})
    assert run("simulate", "--config", cfg, "--out", tmp_path) == 0
    assert np.all(read_spectrum_csv(tmp_path / "transmission.csv").values == 1.0)


def test_determinism(tmp_path):
    cfg = write(tmp_path / "c.json", {**FIG3_CFG, "grid": "-40:10:0.5", "noise": 0.01})
    for out in ("a", "b"):
        assert run("simulate", "--config", cfg, "--seed", 7, "--out", tmp_path / out) == 0
    for name in ("transmission.csv", "difference.csv", "simulate.svg", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert run("simulate", "--config", cfg, "--seed", 8, "--out", tmp_path / "c") == 0
    assert (tmp_path / "a" / "transmission.csv").read_bytes() != (tmp_path / "c" / "transmission.csv").read_bytes()


def test_flags_override_config(tmp_path):
    cfg = write(tmp_path / "c.json", {"grid": "-10:10:1", "tol": 1e-4,
                                      "distribution": {"kind": "gaussian", "sigma_v": 6.3}})
    assert run("simulate", "--config", cfg, "--grid", "-5:5:1", "--tol", 1e-5, "--out", tmp_path) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["grid"] == "-5:5:1" and manifest["config"]["tol"] == 1e-5
    assert len(read_spectrum_csv(tmp_path / "transmission.csv")) == 11


def test_beam_distribution(tmp_path):
    cfg = write(tmp_path / "c.json", {"grid": "-10:10:5", "distribution": {
        "kind": "beam", "temperature_k": 900, "atomic_mass_u": 87.62, "half_divergence_rad": 0.0215}})
    assert run("simulate", "--config", cfg, "--out", tmp_path) == 0


@pytest.mark.parametrize("doc", [{"ladder": {"gamma2": -1}}, {"ladder": {"bogus": 1}},
                                 {"distribution": {"kind": "cauchy"}}, {"distribution": {"kind": "gaussian"}},
                                 {"grid": "1:0:1"}, {"coupling_active": {"90": True}},
                                 {"peak_absorption": 1.5}, {"tol": 0.5}])
def test_simulate_usage_errors(tmp_path, doc, capsys):
    assert run("simulate", "--config", write(tmp_path / "c.json", doc), "--out", tmp_path) == 1
    assert "usage error" in capsys.readouterr().err


def test_missing_config_is_input_error(tmp_path):
    assert run("simulate", "--config", tmp_path / "nope.json", "--out", tmp_path) == 2


def test_argparse_errors_exit_one():
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        main(["simulate", "--tol", "abc"])
    assert err.value.code == 1


@pytest.fixture(scope="module")
def satabs(tmp_path_factory):
    d = tmp_path_factory.mktemp("sat")
    cfg = write(d / "c.json", {"grid": "-10:10:5", "satabs": {"scaling": 1.07, "offset_mhz": -12.0,
                                                              "amplitude": 0.3, "raw_grid": "-300:150:0.5"}})
    assert run("simulate", "--config", cfg, "--out", d) == 0
    return d


def test_calibrate_recovers_truth(satabs, tmp_path):
    cfg = write(tmp_path / "c.json", {"input": str(satabs / "satabs.csv"),
                                      "init": {"scaling": 1.0, "offset_mhz": 0.0, "amplitude": 0.25}})
    assert run("calibrate", "--config", cfg, "--out", tmp_path) == 0
    res = json.loads((tmp_path / "calibration.json").read_text())
    np.testing.assert_allclose([res["scaling"], res["offset_mhz"], res["amplitude"]], [1.07, -12.0, 0.3], rtol=1e-6)
    assert res["residual_rms"] < 1e-12
    assert (tmp_path / "calibration.svg").exists()


def test_calibrate_empty_csv(tmp_path):
    (tmp_path / "empty.csv").write_text("")
    assert run("calibrate", "--input", tmp_path / "empty.csv", "--out", tmp_path) == 2
    assert run("calibrate", "--input", tmp_path / "missing.csv", "--out", tmp_path) == 2


def test_calibrate_flat_is_numerical_failure(tmp_path):
    x = np.arange(-100, 100, 1.0)
    (tmp_path / "flat.csv").write_text("raw_axis,signal\n" + "".join(f"{v},0.0\n" for v in x))
    assert run("calibrate", "--input", tmp_path / "flat.csv", "--out", tmp_path) == 3


FIT_INIT = {"gamma3": 3.5 * 1.2, "rabi_c": 7.5 * 0.8, "delta_c": 20 * 1.2, "delta_v": 16.5 * 0.8}


@pytest.fixture(scope="module")
def fit_data(tmp_path_factory):
    d = tmp_path_factory.mktemp("fitdata")
    cfg = write(d / "c.json", {**FIG3_CFG, "grid": "-60:30:0.5"})
    assert run("simulate", "--config", cfg, "--out", d) == 0
    amp = json.loads((d / "manifest.json").read_text())["config"]["resolved_amplitude"]
    return d, amp


def test_fit_recovers_truth(fit_data, tmp_path):
    d, amp = fit_data
    cfg = write(tmp_path / "f.json", {"input": str(d / "transmission.csv"),
                                      "init": {**FIT_INIT, "amplitude": amp * 1.2}})
    assert run("fit", "--config", cfg, "--out", tmp_path) == 0
    doc = json.loads((tmp_path / "fit.json").read_text())
    assert doc["converged"]
    truth = {"gamma3": 3.5, "rabi_c": 7.5, "delta_c": 20.0, "delta_v": 16.5, "amplitude": amp}
    for k, v in truth.items():
        assert doc["params"][k] == pytest.approx(v, rel=0.01)
    trace = (tmp_path / "fit_trace.csv").read_text().splitlines()
    assert trace[0] == "iteration,norm,gamma3,rabi_c,delta_c,delta_v,amplitude"
    assert (tmp_path / "fit.svg").exists()


def test_fit_init_outside_bounds(fit_data, tmp_path):
    d, amp = fit_data
    cfg = write(tmp_path / "f.json", {"input": str(d / "transmission.csv"),
                                      "init": {**FIT_INIT, "gamma3": -1.0, "amplitude": amp}})
    assert run("fit", "--config", cfg, "--out", tmp_path) == 1


def test_fit_missing_init(fit_data, tmp_path):
    d, _ = fit_data
    cfg = write(tmp_path / "f.json", {"input": str(d / "transmission.csv"), "init": FIT_INIT})
    assert run("fit", "--config", cfg, "--out", tmp_path) == 1


def test_fit_max_iter_zero(fit_data, tmp_path):
    d, amp = fit_data
    init = {**FIT_INIT, "amplitude": amp}
    cfg = write(tmp_path / "f.json", {"input": str(d / "transmission.csv"), "init": init})
    assert run("fit", "--config", cfg, "--max-iter", 0, "--out", tmp_path) == 3
    doc = json.loads((tmp_path / "fit.json").read_text())
    assert doc["converged"] is False
    assert doc["params"] == pytest.approx(init)


def test_pipeline_calibrate_then_fit(fit_data, tmp_path):
    d, amp = fit_data
    cfg = write(tmp_path / "s.json", {"grid": "-10:10:5", "satabs": {"scaling": 1.0, "offset_mhz": 0.0,
                                                                     "amplitude": 0.3, "raw_grid": "-300:150:0.5"}})
    assert run("simulate", "--config", cfg, "--out", tmp_path / "s") == 0
    assert run("calibrate", "--input", tmp_path / "s" / "satabs.csv", "--out", tmp_path / "c") == 0
    cfg = write(tmp_path / "f.json", {"input": str(d / "transmission.csv"),
                                      "calibration": str(tmp_path / "c" / "calibration.json"),
                                      "init": {"gamma3": 3.5, "rabi_c": 7.5, "delta_c": 20.0,
                                               "delta_v": 16.5, "amplitude": amp}})
    assert run("fit", "--config", cfg, "--out", tmp_path / "f", "--max-iter", 3) == 0


def _two_isotope(tmp_path, delta3_86):
    cfg = write(tmp_path / "s.json", {
        "ladder": {"gamma3": 3.5, "rabi_c": 7.5, "delta_c": 0.0},
        "distribution": {"kind": "lorentzian", "delta_v": 16.5, "amplitude": 0.4},
        "rydberg_shifts_mhz": {"86": delta3_86}, "coupling_active": {"88": True, "86": True},
        "grid": "-240:20:0.1"})
    assert run("simulate", "--config", cfg, "--out", tmp_path / "sim") == 0
    return write(tmp_path / "a.json", {
        "input": str(tmp_path / "sim" / "difference.csv"), "min_height": 2e-4, "min_separation_mhz": 10,
        "assignments": {"88": 0.0, "86": 0.911656 * delta3_86 - 0.088344 * 124.5}, "pairs": [[88, 86]]})


def test_analyze_19s_round_trip(tmp_path):
    cfg = _two_isotope(tmp_path, -213.0)
    assert run("analyze", "--config", cfg, "--out", tmp_path / "an") == 0
    shifts = json.loads((tmp_path / "an" / "shifts.json").read_text())
    assert shifts[0]["pair"] == "88-86"
    assert shifts[0]["shift_mhz"] == pytest.approx(213.0, abs=1.0)


def test_analyze_scaling_uncertainty_flag(tmp_path):
    cfg = _two_isotope(tmp_path, -226.0)
    assert run("analyze", "--config", cfg, "--scaling-uncertainty", 0.03, "--out", tmp_path / "an") == 0
    shift = json.loads((tmp_path / "an" / "shifts.json").read_text())[0]
    assert shift["shift_mhz"] == pytest.approx(226.0, abs=1.0)
    assert shift["uncertainty_mhz"] == pytest.approx(7.0, abs=0.5)


def test_analyze_flat_input(tmp_path):
    (tmp_path / "flat.csv").write_text("frequency_mhz,value\n" + "".join(f"{v},0.0\n" for v in range(20)))
    (tmp_path / "flat.json").write_text(json.dumps({"kind": "difference"}))
    assert run("analyze", "--input", tmp_path / "flat.csv", "--out", tmp_path) == 0
    assert (tmp_path / "peaks.csv").read_text().splitlines() == ["position_mhz,height,fwhm_mhz,isotope"]
    assert json.loads((tmp_path / "shifts.json").read_text()) == []


def test_catalog_commands(tmp_path, capsys):
    assert run("catalog", "show") == 0
    text = capsys.readouterr().out
    (tmp_path / "sr.json").write_text(text)
    assert run("catalog", "validate", tmp_path / "sr.json") == 0
    assert "4 isotopes, 6 components" in capsys.readouterr().out
    doc = json.loads(text)
    doc["isotopes"][0]["abundance"] = 0.5
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    assert run("catalog", "validate", tmp_path / "bad.json") == 2
    assert run("catalog", "validate") == 1
