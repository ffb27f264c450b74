"""
Peak finding in EIT difference spectra and the isotope-shift pipeline.

With counter-propagating beams, an EIT resonance appears at the probe
detuning where the velocity class resonant on the probe transition is also
two-photon resonant.  Intervals in the upper (Rydberg) state therefore show
up in the probe frame multiplied by ``ratio = lambda_c / lambda_p`` and
intervals in the intermediate state by ``complement = 1 - ratio``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .catalog import IsotopeCatalog
from .lineshape import LAMBDA_COUPLING_SR, LAMBDA_PROBE_SR
from .spectrum import Spectrum


@dataclass(frozen=True)
class PeakDescriptor:
    position_mhz: float
    height: float
    fwhm_mhz: float
    isotope: int | None = None


@dataclass(frozen=True)
class ScalingContext:
    lambda_p: float = LAMBDA_PROBE_SR
    lambda_c: float = LAMBDA_COUPLING_SR

    def __post_init__(self):
        if not (self.lambda_p > 0 and self.lambda_c > 0):
            raise ValueError("wavelengths must be positive")

    @property
    def ratio(self) -> float:
        return self.lambda_c / self.lambda_p

    @property
    def complement(self) -> float:
        return 1.0 - self.ratio


@dataclass(frozen=True)
class IsotopeShiftResult:
    transition_label: str
    pair: tuple[int, int]
    shift_mhz: float
    uncertainty_mhz: float

    @property
    def pair_label(self):
        return f"{self.pair[0]}-{self.pair[1]}"

    def as_dict(self):
        return {"transition": self.transition_label, "pair": self.pair_label,
                "shift_mhz": self.shift_mhz, "uncertainty_mhz": self.uncertainty_mhz}


# --- peaks -------------------------------------------------------------------

def _half_crossing(x, y, i, level, direction):
    j = i
    while 0 <= j + direction < len(y):
        k = j + direction
        if y[k] <= level:
            # Linear interpolation between samples j and k.
            t = (y[j] - level) / (y[j] - y[k])
            return x[j] + t * (x[k] - x[j])
        j = k
    return None


def find_peaks(diff: Spectrum, min_height=0.0, min_separation_mhz=0.0,
               expected_positions: Mapping[int, float] | None = None,
               attribution_window_mhz=None) -> list[PeakDescriptor]:
    """Local maxima of a difference spectrum, strongest first.

    Each maximum above ``min_height`` is refined with a parabola through the
    three samples around it; the FWHM comes from linearly interpolated
    half-height crossings (twice the one available half-width if the other
    crossing lies beyond the data).  Weaker maxima closer than
    ``min_separation_mhz`` to a stronger one are dropped.  When
    ``expected_positions`` maps mass numbers to approximate positions, each
    peak is attributed to the nearest unclaimed isotope within
    ``attribution_window_mhz`` (default: half the smallest spacing between
    expected positions, or 10 MHz).
    """
    if diff.kind != "difference":
        raise ValueError(f"expected a difference spectrum, got kind={diff.kind!r}")
    x, y = diff.frequency_mhz, diff.values
    if y.size < 3:
        return []
    inner = np.arange(1, y.size - 1)
    is_max = (y[inner] > y[inner - 1]) & (y[inner] >= y[inner + 1]) & (y[inner] > min_height)
    candidates = sorted(inner[is_max], key=lambda i: -y[i])

    peaks = []
    for i in candidates:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        curv = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / curv if curv < 0 else 0.0
        pos = x[i] + shift * 0.5 * (x[i + 1] - x[i - 1])
        height = y1 - 0.25 * (y0 - y2) * shift
        if any(abs(pos - p.position_mhz) < min_separation_mhz for p in peaks):
            continue
        left = _half_crossing(x, y, i, height / 2, -1)
        right = _half_crossing(x, y, i, height / 2, +1)
        if left is not None and right is not None:
            fwhm = right - left
        elif left is not None:
            fwhm = 2 * (pos - left)
        elif right is not None:
            fwhm = 2 * (right - pos)
        else:
            fwhm = float(x[-1] - x[0])
        peaks.append(PeakDescriptor(float(pos), float(height), float(fwhm)))

    if expected_positions:
        peaks = attribute_peaks(peaks, expected_positions, attribution_window_mhz)
    return peaks


def attribute_peaks(peaks: Sequence[PeakDescriptor], expected_positions: Mapping[int, float],
                    window_mhz=None) -> list[PeakDescriptor]:
    """Label peaks with the mass number whose expected position is nearest."""
    expected = {int(m): float(p) for m, p in expected_positions.items()}
    if window_mhz is None:
        pos = sorted(expected.values())
        gaps = np.diff(pos)
        window_mhz = 0.5 * gaps.min() if gaps.size else 10.0
    pairs = sorted((abs(p.position_mhz - e), k, m)
                   for k, p in enumerate(peaks) for m, e in expected.items())
    label, used = {}, set()
    for dist, k, m in pairs:
        if dist > window_mhz or k in label or m in used:
            continue
        label[k] = m
        used.add(m)
    return [PeakDescriptor(p.position_mhz, p.height, p.fwhm_mhz, label.get(k))
            for k, p in enumerate(peaks)]


# --- scaling laws ----------------------------------------------------------------

def eit_peak_position(delta2_mhz, delta3_mhz, delta_c_mhz, ctx: ScalingContext):
    """Probe detuning of the EIT resonance for one line component.

    ``delta2_mhz`` is the component's shift on the probe transition and
    ``delta3_mhz`` the isotope's ground-to-Rydberg shift.
    """
    return ctx.ratio * (delta3_mhz - delta_c_mhz) + ctx.complement * delta2_mhz


def extract_isotope_shift(interval_probe_mhz, delta2_a, delta2_b, ctx: ScalingContext,
                          scaling_rel_uncertainty=0.0, delta2_uncertainty=(0.0, 0.0),
                          interval_uncertainty_mhz=0.0, pair=(0, 0),
                          transition_label="") -> IsotopeShiftResult:
    """Rydberg isotope shift ``delta3_A - delta3_B`` from a probe-frame interval.

    ``interval_probe_mhz`` is ``position_A - position_B`` measured at a
    common coupling detuning.  The uncertainty combines in quadrature the
    axis-scaling error on the interval, any statistical error on the
    interval and the probe-transition shift errors.
    """
    r, c = ctx.ratio, ctx.complement
    if r == 0:
        raise ValueError("wavelength ratio must be non-zero")
    shift = (interval_probe_mhz - c * (delta2_a - delta2_b)) / r
    ua, ub = delta2_uncertainty
    var = ((scaling_rel_uncertainty * abs(interval_probe_mhz)) ** 2
           + interval_uncertainty_mhz ** 2
           + (c * ua) ** 2 + (c * ub) ** 2) / r ** 2
    return IsotopeShiftResult(transition_label, tuple(pair), float(shift), float(math.sqrt(var)))


def hyperfine_window_width(splittings_mhz: Sequence[float], ctx: ScalingContext) -> float:
    """Probe-frame spread of the EIT resonances of hyperfine components."""
    s = np.asarray(splittings_mhz, dtype=float)
    if s.size == 0:
        return 0.0
    scaled = ctx.complement * s
    return float(scaled.max() - scaled.min())


def isotope_probe_shift(catalog: IsotopeCatalog, mass: int):
    """Strength-weighted probe shift of an isotope and its uncertainty."""
    iso = catalog[mass]
    shift = iso.mean_shift_mhz
    var = sum((float(c.relative_strength) * c.shift_uncertainty_mhz) ** 2
              for c in iso.components if c.shift_uncertainty_mhz is not None)
    return shift, math.sqrt(var)


def isotope_shifts_from_peaks(peaks: Sequence[PeakDescriptor], catalog: IsotopeCatalog,
                              pairs: Sequence[tuple[int, int]], ctx: ScalingContext,
                              scaling_rel_uncertainty=0.0, transition_label="",
                              position_uncertainty_mhz=0.0) -> list[IsotopeShiftResult]:
    """Rydberg isotope shifts for every pair whose two peaks were attributed.

    Unresolved hyperfine components are represented by their
    strength-weighted centroid.  Pairs with a missing peak are skipped.
    """
    by_mass = {p.isotope: p for p in peaks if p.isotope is not None}
    out = []
    for a, b in pairs:
        if a not in by_mass or b not in by_mass:
            continue
        d2a, ua = isotope_probe_shift(catalog, a)
        d2b, ub = isotope_probe_shift(catalog, b)
        interval = by_mass[a].position_mhz - by_mass[b].position_mhz
        out.append(extract_isotope_shift(
            interval, d2a, d2b, ctx, scaling_rel_uncertainty, (ua, ub),
            math.sqrt(2) * position_uncertainty_mhz, (a, b), transition_label))
    return out


def write_peak_table(peaks: Sequence[PeakDescriptor], path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["position_mhz", "height", "fwhm_mhz", "isotope"])
        for p in peaks:
            w.writerow([repr(p.position_mhz), repr(p.height), repr(p.fwhm_mhz),
                        "" if p.isotope is None else p.isotope])
    return path


def read_peak_table(path) -> list[PeakDescriptor]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [PeakDescriptor(float(r["position_mhz"]), float(r["height"]), float(r["fwhm_mhz"]),
                           int(r["isotope"]) if r["isotope"] else None) for r in rows]


def write_shift_records(results: Sequence[IsotopeShiftResult], path):
    Path(path).write_text(json.dumps([r.as_dict() for r in results], indent=2))
    return path
