import numpy as np
import pytest

from ladder_eit import (CalibrationModel, CalibrationResult, RankDeficiencyError, Spectrum,
                        apply_calibration, catalog_from_dict, fit_calibration, satabs_model)

TRUTH = (1.07, -12.0, 0.3)
RAW = np.arange(-300.0, 150.0, 0.5)


def synth(sr, a=TRUTH[0], b=TRUTH[1], amp=TRUTH[2], raw=RAW):
    return satabs_model(CalibrationModel(sr, 16.0, a, b, amp), raw)


def test_reference_isotope_dominates(sr):
    a, b = TRUTH[:2]
    x88 = (0.0 - b) / a
    model = CalibrationModel(sr, 16.0, a, b, 1.0)
    signal = satabs_model(model, RAW)
    assert RAW[np.argmax(signal)] == pytest.approx(x88, abs=0.5)
    # At the 88 position the other lines add their Lorentzian tails.
    peak = satabs_model(model, [x88])[0]
    assert peak > 0.8258
    assert peak - 0.8258 < 0.1


def test_single_isotope_is_one_lorentzian():
    cat = catalog_from_dict({"reference_mass_number": 1, "transition": "t",
                             "isotopes": [{"mass_number": 1, "abundance": 1,
                                           "components": [{"shift_mhz": 0}]}]})
    x = np.linspace(-50, 50, 101)
    y = satabs_model(CalibrationModel(cat, 16.0), x)
    np.testing.assert_allclose(y, 256 / (256 + x ** 2), rtol=1e-14)


def test_component_weight_ratio(sr):
    # Evaluate each component alone at its own centre.
    weights = {m: w for m, _, w in sr.lines() if m in (86, 88)}
    assert weights[88] / weights[86] == pytest.approx(82.58 / 9.86, rel=1e-12)


def test_axis_reparameterisation(sr):
    c = 2.7
    x = np.linspace(-200, 100, 301)
    a, b, amp = TRUTH
    y1 = satabs_model(CalibrationModel(sr, 16.0, a, b, amp), x)
    y2 = satabs_model(CalibrationModel(sr, 16.0, a / c, b, amp), c * x)
    np.testing.assert_allclose(y1, y2, rtol=1e-13)


def test_model_validation(sr):
    with pytest.raises(ValueError):
        CalibrationModel(sr, 0.0)
    with pytest.raises(ValueError):
        CalibrationModel(sr, 16.0, scaling=-1.0)


def test_noiseless_recovery(sr):
    data = Spectrum(RAW, synth(sr), kind="absorption")
    res = fit_calibration(data, sr, init=(1.0, 0.0, 0.25))
    assert res.converged
    np.testing.assert_allclose([res.scaling, res.offset_mhz, res.amplitude], TRUTH, rtol=1e-6)


@pytest.mark.parametrize("pert", [(1.2, 0.8, 1.2), (0.8, 1.2, 0.8), (1.2, 1.2, 0.8), (0.8, 0.8, 1.2)])
def test_recovery_from_perturbed_start(sr, pert):
    data = Spectrum(RAW, synth(sr), kind="absorption")
    init = tuple(t * p for t, p in zip(TRUTH, pert))
    res = fit_calibration(data, sr, init=init)
    np.testing.assert_allclose([res.scaling, res.offset_mhz, res.amplitude], TRUTH, rtol=1e-6)


def test_exact_fit_has_zero_residual(sr):
    data = Spectrum(RAW, synth(sr, 1.0, 0.0, 1.0), kind="absorption")
    res = fit_calibration(data, sr, init=(1.0, 0.0, 1.0))
    assert res.residual_rms == 0.0
    assert res.n_iterations == 0


def test_uncertainty_scales_with_noise(sr):
    clean = synth(sr)
    unc = []
    for level in (0.005, 0.01, 0.02):
        y = clean + np.random.default_rng(11).normal(0, level * TRUTH[2], RAW.size)
        unc.append(fit_calibration(Spectrum(RAW, y, kind="absorption"), sr, init=(1.0, 0.0, 0.25))
                   .scaling_rel_uncertainty)
    assert unc[1] / unc[0] == pytest.approx(2.0, rel=0.2)
    assert unc[2] / unc[1] == pytest.approx(2.0, rel=0.2)


def test_covariance_properties(sr):
    y = synth(sr) + np.random.default_rng(3).normal(0, 0.003, RAW.size)
    res = fit_calibration(Spectrum(RAW, y, kind="absorption"), sr, init=(1.0, 0.0, 0.25))
    assert res.covariance.shape == (3, 3)
    np.testing.assert_allclose(res.covariance, res.covariance.T)
    assert np.all(np.linalg.eigvalsh(res.covariance) >= 0)
    assert res.scaling_rel_uncertainty >= 0


def test_too_few_points(sr):
    with pytest.raises(ValueError):
        fit_calibration(Spectrum(RAW[:49], synth(sr)[:49], kind="absorption"), sr)


def test_bad_initial_scaling(sr):
    with pytest.raises(ValueError):
        fit_calibration(Spectrum(RAW, synth(sr), kind="absorption"), sr, init=(0.0, 0.0, 1.0))


def test_flat_signal_is_rank_deficient(sr):
    with pytest.raises(RankDeficiencyError):
        fit_calibration(Spectrum(RAW, np.zeros(RAW.size), kind="absorption"), sr)


def test_result_round_trip_and_apply(sr, tmp_path):
    res = fit_calibration(Spectrum(RAW, synth(sr), kind="absorption"), sr, init=(1.0, 0.0, 0.25))
    res.save(tmp_path / "cal.json")
    back = CalibrationResult.load(tmp_path / "cal.json")
    assert back.scaling == res.scaling and back.offset_mhz == res.offset_mhz
    raw = Spectrum(np.array([0.0, 10.0, 20.0]), np.array([0.9, 0.8, 0.95]), meta={"axis": "raw"})
    cal = apply_calibration(raw, back)
    np.testing.assert_allclose(cal.frequency_mhz, res.scaling * raw.frequency_mhz + res.offset_mhz)
    assert cal.meta["axis"] == "mhz"
