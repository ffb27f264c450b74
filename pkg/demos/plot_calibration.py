"""
Frequency axis from a saturated-absorption scan
===============================================

Six Doppler-free Lorentzians (one per isotope and hyperfine line) with
fixed positions and weights; only the linear axis map and the overall
amplitude are fitted.
"""

import numpy as np

from ladder_eit import (CalibrationModel, Spectrum, builtin_strontium_catalog, fit_calibration,
                        satabs_model)
from ladder_eit.plotting import overlay_svg

sr = builtin_strontium_catalog()
raw = np.arange(-300.0, 150.0, 0.5)
truth = CalibrationModel(sr, hwhm_mhz=16.0, scaling=1.07, offset_mhz=-12.0, amplitude=0.3)

rng = np.random.default_rng(0)
signal = satabs_model(truth, raw) + rng.normal(0.0, 0.003, raw.size)

result = fit_calibration(Spectrum(raw, signal, kind="absorption"), sr, init=(1.0, 0.0, 0.25))
print(f"scaling {result.scaling:.5f} +/- {100 * result.scaling_rel_uncertainty:.3f}%")
print(f"offset  {result.offset_mhz:.3f} MHz, amplitude {result.amplitude:.4f}")

###############################################################################
# Plot on the calibrated axis.

fitted = CalibrationModel(sr, 16.0, result.scaling, result.offset_mhz, result.amplitude)
freq = result.to_frequency(raw)
overlay_svg("calibration.svg", [(freq, signal, "scan", "dots"),
                                (freq, satabs_model(fitted, raw), "fit", "line")],
            ylabel="Signal")
