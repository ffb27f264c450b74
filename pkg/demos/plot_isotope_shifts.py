"""
Rydberg isotope shift from two EIT peaks
========================================

With the coupling laser acting on both 88 and 86, each isotope gives its
own EIT peak.  Their probe-frame separation mixes the ground-to-Rydberg
shift (scaled by ``lambda_c / lambda_p``) with the intermediate-state shift
(scaled by ``1 - lambda_c / lambda_p``); inverting that gives the Rydberg
isotope shift.
"""

import numpy as np

from ladder_eit import (LadderParams, LorentzianDistribution, MultiIsotopeSystem, ScalingContext,
                        builtin_strontium_catalog, difference_spectrum, eit_peak_position,
                        find_peaks, hyperfine_window_width, isotope_shifts_from_peaks)

sr = builtin_strontium_catalog()
ctx = ScalingContext()
delta3_86 = -213.0       # 86 Rydberg level relative to 88, MHz

system = MultiIsotopeSystem(sr, LadderParams(gamma3=3.5, rabi_c=7.5, delta_c=0.0),
                            LorentzianDistribution(16.5, 0.4),
                            rydberg_shifts_mhz={86: delta3_86},
                            coupling_active={88: True, 86: True})
grid = np.arange(-240.0, 20.0, 0.1)
diff = difference_spectrum(system, grid)

expected = {88: 0.0, 86: eit_peak_position(-124.5, delta3_86, 0.0, ctx)}
peaks = find_peaks(diff, min_height=2e-4, min_separation_mhz=10.0, expected_positions=expected)
for p in peaks:
    if p.isotope is not None:
        print(f"{p.isotope}: {p.position_mhz:8.2f} MHz  height {p.height:.2e}")

(result,) = isotope_shifts_from_peaks(peaks, sr, [(88, 86)], ctx, scaling_rel_uncertainty=0.03,
                                      transition_label="5s19s 1S0")
print(f"{result.pair_label}: {result.shift_mhz:.1f} +/- {result.uncertainty_mhz:.1f} MHz")

###############################################################################
# The three 87 hyperfine lines collapse into a window a few MHz wide.

print(f"87 hyperfine spread in the probe frame: {hyperfine_window_width([-9.7, -68.9, -51.9], ctx):.2f} MHz")
