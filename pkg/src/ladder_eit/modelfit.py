"""Five-parameter fit of the velocity-averaged EIT model to a transmission scan."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .catalog import IsotopeCatalog, builtin_strontium_catalog
from .fitting import FitProblem, FitResult, least_squares
from .lineshape import LadderParams, LorentzianDistribution, MultiIsotopeSystem, synthesize_spectrum
from .spectrum import Spectrum

PARAMETER_NAMES = ("gamma3", "rabi_c", "delta_c", "delta_v", "amplitude")

DEFAULT_BOUNDS = {
    "gamma3": (1e-3, 200.0),
    "rabi_c": (0.0, 500.0),
    "delta_c": (-2000.0, 2000.0),
    "delta_v": (0.1, 2000.0),
    "amplitude": (0.0, 100.0),
}


@dataclass(frozen=True)
class EITModel:
    """Fixed part of the model; the five fitted values come in as a vector.

    Order of the vector: gamma3 (MHz), rabi_c (MHz), delta_c (MHz),
    delta_v (Lorentzian velocity HWHM, m/s), amplitude (peak optical depth).
    """

    catalog: IsotopeCatalog = field(default_factory=builtin_strontium_catalog)
    template: LadderParams = field(default_factory=LadderParams)
    rydberg_shifts_mhz: Mapping[int, float] = field(default_factory=dict)
    coupling_active: Mapping[int, bool] | None = None

    def system(self, params) -> MultiIsotopeSystem:
        gamma3, rabi_c, delta_c, delta_v, amplitude = (float(p) for p in params)
        shared = replace(self.template, gamma3=gamma3, rabi_c=rabi_c, delta_c=delta_c)
        return MultiIsotopeSystem(self.catalog, shared, LorentzianDistribution(delta_v, amplitude),
                                  self.rydberg_shifts_mhz, self.coupling_active)

    def transmission(self, params, grid, tol=1e-6):
        return synthesize_spectrum(self.system(params), grid, tol).values


def params_vector(values) -> np.ndarray:
    """Accept a mapping keyed by :data:`PARAMETER_NAMES` or a sequence."""
    if isinstance(values, Mapping):
        missing = [k for k in PARAMETER_NAMES if k not in values]
        if missing:
            raise KeyError(f"missing parameters: {', '.join(missing)}")
        return np.array([float(values[k]) for k in PARAMETER_NAMES])
    vec = np.asarray(values, dtype=float).ravel()
    if vec.size != len(PARAMETER_NAMES):
        raise ValueError(f"expected {len(PARAMETER_NAMES)} parameters, got {vec.size}")
    return vec


def eit_problem(data: Spectrum, model: EITModel, init, bounds=None, tol=1e-6) -> FitProblem:
    grid = data.frequency_mhz
    y = data.values
    bounds = dict(DEFAULT_BOUNDS, **(bounds or {}))
    lo = [bounds[k][0] for k in PARAMETER_NAMES]
    hi = [bounds[k][1] for k in PARAMETER_NAMES]

    def residuals(p):
        return model.transmission(p, grid, tol) - y

    return FitProblem(residuals, params_vector(init), bounds=(lo, hi), names=list(PARAMETER_NAMES))


def fit_eit_spectrum(data: Spectrum, model: EITModel, init, bounds=None, rel_step=1e-4,
                     tol=None, **lsq_options) -> FitResult:
    """Least-squares fit of the five model parameters to ``data``.

    The quadrature tolerance defaults to ``rel_step / 100`` so that
    integration noise stays well below the finite-difference signal.
    """
    if tol is None:
        tol = 0.01 * rel_step
    problem = eit_problem(data, model, init, bounds, tol)
    lsq_options.setdefault("max_iter", 50)
    lsq_options.setdefault("gradient_tol", 1e-5)
    lsq_options.setdefault("step_tol", 1e-8)
    return least_squares(problem, rel_step=rel_step, **lsq_options)
