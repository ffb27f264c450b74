"""
Frequency-axis calibration from a Doppler-free saturated-absorption scan.

The scan is modelled as one Lorentzian per catalog component, each with
fixed position (its tabulated shift), fixed relative weight (abundance
times line strength) and a common fixed half-width.  Only the linear map
from raw scan units to MHz, ``f = scaling * x + offset``, and the overall
peak absorption are fitted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .catalog import IsotopeCatalog
from .fitting import FitProblem, least_squares
from .spectrum import Spectrum

DEFAULT_HWHM_MHZ = 16.0
MIN_POINTS = 50


@dataclass(frozen=True)
class CalibrationModel:
    catalog: IsotopeCatalog
    hwhm_mhz: float = DEFAULT_HWHM_MHZ
    scaling: float = 1.0
    offset_mhz: float = 0.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.hwhm_mhz > 0:
            raise ValueError("hwhm_mhz must be positive")
        if not self.scaling > 0:
            raise ValueError("scaling must be positive")


@dataclass
class CalibrationResult:
    scaling: float
    offset_mhz: float
    amplitude: float
    scaling_rel_uncertainty: float
    residual_rms: float
    covariance: np.ndarray
    hwhm_mhz: float = DEFAULT_HWHM_MHZ
    n_iterations: int = 0
    converged: bool = True

    def to_frequency(self, raw):
        return self.scaling * np.asarray(raw, dtype=float) + self.offset_mhz

    def as_dict(self):
        return {
            "scaling": self.scaling,
            "offset_mhz": self.offset_mhz,
            "amplitude": self.amplitude,
            "scaling_rel_uncertainty": self.scaling_rel_uncertainty,
            "residual_rms": self.residual_rms,
            "covariance": np.asarray(self.covariance).tolist(),
            "hwhm_mhz": self.hwhm_mhz,
            "n_iterations": self.n_iterations,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(scaling=float(doc["scaling"]), offset_mhz=float(doc["offset_mhz"]),
                   amplitude=float(doc["amplitude"]),
                   scaling_rel_uncertainty=float(doc["scaling_rel_uncertainty"]),
                   residual_rms=float(doc["residual_rms"]),
                   covariance=np.asarray(doc["covariance"], dtype=float),
                   hwhm_mhz=float(doc.get("hwhm_mhz", DEFAULT_HWHM_MHZ)),
                   n_iterations=int(doc.get("n_iterations", 0)),
                   converged=bool(doc.get("converged", True)))

    def save(self, path):
        Path(path).write_text(json.dumps(self.as_dict(), indent=2))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def _lines(catalog):
    shifts = np.array([c.shift_mhz for _, c, _ in catalog.lines()])
    weights = np.array([w for _, _, w in catalog.lines()])
    return shifts, weights


def _lorentz_sum(freq, shifts, weights, hwhm):
    h2 = hwhm * hwhm
    return (weights[:, None] * h2 / (h2 + (freq[None, :] - shifts[:, None]) ** 2)).sum(axis=0)


def satabs_model(model: CalibrationModel, raw_axis):
    """Predicted Doppler-free signal at raw scan positions."""
    raw_axis = np.asarray(raw_axis, dtype=float)
    shifts, weights = _lines(model.catalog)
    freq = model.scaling * raw_axis.ravel() + model.offset_mhz
    out = model.amplitude * _lorentz_sum(freq, shifts, weights, model.hwhm_mhz)
    return out.reshape(raw_axis.shape)


def fit_calibration(data: Spectrum, catalog: IsotopeCatalog, hwhm_mhz=DEFAULT_HWHM_MHZ,
                    init=(1.0, 0.0, 1.0), **lsq_options) -> CalibrationResult:
    """Fit scaling, offset and amplitude to a background-free scan.

    ``data.frequency_mhz`` holds raw scan positions.  ``init`` is
    ``(scaling, offset_mhz, amplitude)``.  The relative scaling uncertainty
    comes from the residual-scaled covariance of the fit.

    :raises ValueError: fewer than 50 samples or a non-positive initial scaling.
    :raises RankDeficiencyError: the data carry no information on the axis
        (e.g. a flat signal).
    """
    x = np.asarray(data.frequency_mhz, dtype=float)
    y = np.asarray(data.values, dtype=float)
    if x.size < MIN_POINTS:
        raise ValueError(f"calibration needs at least {MIN_POINTS} points, got {x.size}")
    init = np.asarray(init, dtype=float)
    if not init[0] > 0:
        raise ValueError("initial scaling must be positive")
    shifts, weights = _lines(catalog)

    def residuals(p):
        a, b, amp = p
        return amp * _lorentz_sum(a * x + b, shifts, weights, hwhm_mhz) - y

    problem = FitProblem(residuals, init, bounds=([1e-12, -np.inf, -np.inf], [np.inf, np.inf, np.inf]),
                         names=["scaling", "offset_mhz", "amplitude"])
    lsq_options.setdefault("max_iter", 200)
    res = least_squares(problem, **lsq_options)
    a, b, amp = res.params
    resid = residuals(res.params)
    return CalibrationResult(
        scaling=float(a), offset_mhz=float(b), amplitude=float(amp),
        scaling_rel_uncertainty=float(np.sqrt(res.covariance[0, 0]) / a),
        residual_rms=float(np.sqrt(np.mean(resid ** 2))),
        covariance=res.covariance, hwhm_mhz=hwhm_mhz,
        n_iterations=res.n_iterations, converged=res.converged)


def apply_calibration(raw: Spectrum, cal: CalibrationResult) -> Spectrum:
    """Map a raw-axis spectrum onto calibrated MHz."""
    meta = dict(raw.meta)
    meta.update(axis="mhz", scaling=cal.scaling, offset_mhz=cal.offset_mhz,
                scaling_rel_uncertainty=cal.scaling_rel_uncertainty)
    return Spectrum(cal.to_frequency(raw.frequency_mhz), raw.values, kind=raw.kind, meta=meta)
