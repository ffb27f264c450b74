"""
Weak-probe susceptibility of a three-level ladder and its velocity average.

Rates and detunings enter as ordinary frequencies in MHz (``16`` stands for
an angular rate of 2 pi x 16 MHz); the conversion to angular units happens
inside :func:`susceptibility_at_velocity` and the batched integrand only.

The susceptibility is returned exactly as the weak-probe expression gives
it, with its leading ``-i``.  In this convention a passive medium has
``Im chi <= 0``; :func:`absorption_at_velocity` returns ``-Im chi``, which
is the non-negative absorption density used everywhere downstream.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np
import scipy.constants as sc
from scipy.special import wofz

from .catalog import IsotopeCatalog
from .errors import IntegrationError
from .quadrature import integrate_real_line
from .spectrum import Spectrum

TWO_PI_MHZ = 2e6 * math.pi

LAMBDA_PROBE_SR = 460.7e-9
LAMBDA_COUPLING_SR = 420e-9
GAMMA2_SR_MHZ = 16.0


class Geometry(str, enum.Enum):
    COUNTER = "counter_propagating"
    CO = "co_propagating"


@dataclass(frozen=True)
class LadderParams:
    gamma2: float = GAMMA2_SR_MHZ
    gamma3: float = 0.0
    rabi_c: float = 0.0
    delta_p: float = 0.0
    delta_c: float = 0.0
    lambda_p: float = LAMBDA_PROBE_SR
    lambda_c: float = LAMBDA_COUPLING_SR
    geometry: Geometry = Geometry.COUNTER

    def __post_init__(self):
        object.__setattr__(self, "geometry", Geometry(self.geometry))
        if not self.gamma2 > 0:
            raise ValueError("gamma2 must be positive")
        if self.gamma3 < 0 or self.rabi_c < 0:
            raise ValueError("gamma3 and rabi_c must be non-negative")
        if not (self.lambda_p > 0 and self.lambda_c > 0):
            raise ValueError("wavelengths must be positive")

    @property
    def k_p(self) -> float:
        return 2 * math.pi / self.lambda_p

    @property
    def k_c(self) -> float:
        return 2 * math.pi / self.lambda_c

    @property
    def two_photon_k(self) -> float:
        """Wavevector multiplying v in the two-photon detuning (rad/m)."""
        if self.geometry is Geometry.COUNTER:
            return self.k_p - self.k_c
        return self.k_p + self.k_c

    @property
    def prefactor(self) -> float:
        """3 lambda_p**2 / (4 pi), the on-resonance two-level magnitude."""
        return 3 * self.lambda_p ** 2 / (4 * math.pi)


# --- velocity distributions -----------------------------------------------

class VelocityDistribution:
    """Transverse velocity density ``N(v)``; subclasses fix the shape."""

    amplitude: float
    width: float

    def density(self, v):
        raise NotImplementedError

    def shape_integral(self) -> float:
        """Integral of the amplitude-1 shape over all velocities."""
        raise NotImplementedError

    def with_amplitude(self, amplitude):
        return replace(self, amplitude=amplitude)

    def _check(self):
        if not self.width > 0:
            raise ValueError("velocity width must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")


@dataclass(frozen=True)
class LorentzianDistribution(VelocityDistribution):
    """``amplitude / (1 + v**2 / delta_v**2)``; ``delta_v`` is the HWHM in m/s."""

    delta_v: float
    amplitude: float = 1.0

    def __post_init__(self):
        self._check()

    @property
    def width(self):
        return self.delta_v

    def density(self, v):
        v = np.asarray(v, dtype=float)
        return self.amplitude / (1.0 + (v / self.delta_v) ** 2)

    def shape_integral(self):
        return math.pi * self.delta_v


@dataclass(frozen=True)
class GaussianDistribution(VelocityDistribution):
    """``amplitude * exp(-v**2 / (2 sigma_v**2))``."""

    sigma_v: float
    amplitude: float = 1.0

    def __post_init__(self):
        self._check()

    @property
    def width(self):
        return self.sigma_v

    def density(self, v):
        v = np.asarray(v, dtype=float)
        return self.amplitude * np.exp(-0.5 * (v / self.sigma_v) ** 2)

    def shape_integral(self):
        return math.sqrt(2 * math.pi) * self.sigma_v


def velocity_density(dist: VelocityDistribution, v):
    return dist.density(v)


@dataclass(frozen=True)
class BeamGeometry:
    temperature_k: float
    atomic_mass_kg: float
    half_divergence_rad: float

    def __post_init__(self):
        if not (self.temperature_k > 0 and self.atomic_mass_kg > 0 and self.half_divergence_rad > 0):
            raise ValueError("beam geometry fields must be positive")
        if self.half_divergence_rad > math.pi / 2:
            raise ValueError("half divergence must not exceed pi/2")


def gaussian_from_beam(geom: BeamGeometry, amplitude=1.0) -> GaussianDistribution:
    """Effusive-beam transverse distribution: thermal 1-D spread times sin(eps)."""
    sigma = math.sin(geom.half_divergence_rad) * math.sqrt(sc.k * geom.temperature_k / geom.atomic_mass_kg)
    return GaussianDistribution(sigma, amplitude)


# --- susceptibility ----------------------------------------------------------

def _chi_kernel(x_p, two, gamma2, gamma3, half_rabi_sq, prefactor):
    """Vectorised weak-probe susceptibility in angular units.

    ``x_p`` is the single-photon detuning of the velocity class, ``two`` the
    two-photon detuning; both rad/s.
    """
    d = gamma2 - 1j * np.asarray(x_p)
    lower = gamma3 - 1j * np.asarray(two)
    # Multiplied through by ``lower`` so the dark limit gamma3 -> 0 stays finite.
    off = np.asarray(half_rabi_sq) == 0
    if np.all(off):
        return -1j * prefactor * gamma2 / d
    chi = -1j * prefactor * gamma2 * lower / (d * lower + half_rabi_sq)
    if np.any(off):
        chi = np.where(off, -1j * prefactor * gamma2 / d, chi)
    return chi


def susceptibility_at_velocity(p: LadderParams, v):
    """Complex susceptibility per unit N(v) for velocity class ``v`` (m/s)."""
    v = np.asarray(v, dtype=float)
    x_p = TWO_PI_MHZ * p.delta_p - p.k_p * v
    two = TWO_PI_MHZ * (p.delta_p + p.delta_c) - p.two_photon_k * v
    out = _chi_kernel(x_p, two, TWO_PI_MHZ * p.gamma2, TWO_PI_MHZ * p.gamma3,
                      (TWO_PI_MHZ * p.rabi_c / 2) ** 2, p.prefactor)
    return out[()] if out.ndim == 0 else out


def absorption_at_velocity(p: LadderParams, v):
    """``-Im chi(v)``: non-negative for every passive configuration."""
    return -np.imag(susceptibility_at_velocity(p, v))


# --- velocity integration ------------------------------------------------------

def _integrate_batch(p: LadderParams, dist: VelocityDistribution, delta_p, delta_c, rabi_c,
                     tol=1e-6, chunk=48):
    """Velocity-integrate chi(v) N(v) for a batch of detunings.

    ``delta_p``, ``delta_c`` and ``rabi_c`` are broadcast to a common 1-D
    shape; every other parameter comes from ``p``.  Members are grouped by
    their single-photon resonance velocity so that each group shares a
    compact adaptive partition.  Returns the complex integrals.
    """
    delta_p, delta_c, rabi_c = np.broadcast_arrays(
        np.atleast_1d(np.asarray(delta_p, dtype=float)),
        np.atleast_1d(np.asarray(delta_c, dtype=float)),
        np.atleast_1d(np.asarray(rabi_c, dtype=float)))
    n = delta_p.size
    out = np.empty(n, dtype=complex)
    if dist.amplitude == 0:
        out[:] = 0.0
        return out

    g2 = TWO_PI_MHZ * p.gamma2
    g3 = TWO_PI_MHZ * p.gamma3
    kp, kq = p.k_p, p.two_photon_k
    unit = dist.with_amplitude(1.0)
    v_res = TWO_PI_MHZ * delta_p / kp
    v_natural = g2 / kp
    order = np.argsort(v_res, kind="stable")

    for start in range(0, n, chunk):
        idx = order[start:start + chunk]
        xp0 = TWO_PI_MHZ * delta_p[idx][:, None]
        two0 = TWO_PI_MHZ * (delta_p[idx] + delta_c[idx])[:, None]
        hrs = ((TWO_PI_MHZ * rabi_c[idx] / 2) ** 2)[:, None]

        def integrand(v, xp0=xp0, two0=two0, hrs=hrs):
            chi = _chi_kernel(xp0 - kp * v, two0 - kq * v, g2, g3, hrs, p.prefactor)
            return chi * unit.density(v)

        lo, hi = v_res[idx].min(), v_res[idx].max()
        half_width = max(abs(lo), abs(hi)) + 8 * v_natural + 8 * dist.width
        breaks = np.array([0.0, lo, hi])
        try:
            res = integrate_real_line(integrand, tol=tol, half_width=half_width,
                                      breakpoints=breaks, n_initial=24)
        except IntegrationError as exc:
            bad = idx[exc.index] if exc.index is not None else None
            raise IntegrationError(str(exc), estimate=exc.estimate, error=exc.error,
                                   index=None if bad is None else int(bad)) from None
        out[idx] = res.value
    return out * dist.amplitude


def integrated_susceptibility(p: LadderParams, dist: VelocityDistribution, tol=1e-6) -> complex:
    """Integral of ``chi(v) N(v)`` over all transverse velocities."""
    if not 0 < tol <= 1e-2:
        raise ValueError("tol must lie in (0, 1e-2]")
    return complex(_integrate_batch(p, dist, p.delta_p, p.delta_c, p.rabi_c, tol)[0])


def doppler_peak_absorption(p: LadderParams, dist: VelocityDistribution) -> float:
    """Closed-form ``-Im`` of the velocity integral at Omega_c = 0, Delta_p = 0.

    Lorentzian N(v): two Lorentzians convolve into one with summed widths.
    Gaussian N(v): the Voigt value from the Faddeeva function.
    """
    g2 = TWO_PI_MHZ * p.gamma2
    c = p.prefactor * g2
    if isinstance(dist, LorentzianDistribution):
        return dist.amplitude * c * math.pi * dist.delta_v / (g2 + p.k_p * dist.delta_v)
    if isinstance(dist, GaussianDistribution):
        s = p.k_p * dist.sigma_v
        return dist.amplitude * c * (math.pi / p.k_p) * float(np.real(wofz(1j * g2 / (s * math.sqrt(2)))))
    raise TypeError(f"no closed form for {type(dist).__name__}")


def lorentzian_doppler_profile(p: LadderParams, dist: LorentzianDistribution, delta_p):
    """``-Im`` velocity integral at Omega_c = 0 for a Lorentzian N(v), closed form.

    HWHM of the result (angular) is gamma2 + k_p * delta_v.
    """
    g2 = TWO_PI_MHZ * p.gamma2
    width = g2 + p.k_p * dist.delta_v
    x = TWO_PI_MHZ * np.asarray(delta_p, dtype=float)
    return dist.amplitude * p.prefactor * g2 * math.pi * dist.delta_v * width / (width ** 2 + x ** 2)


# --- multi-isotope synthesis ---------------------------------------------------

@dataclass(frozen=True)
class MultiIsotopeSystem:
    """Everything needed to synthesise a spectrum.

    ``shared.delta_p`` is ignored (the grid supplies it).  ``rydberg_shifts_mhz``
    gives the ground-to-Rydberg isotope shift per mass number; when absent for
    an isotope its coupling transition is taken as unshifted, i.e. the
    Rydberg shift equals each component's probe shift.  ``coupling_active``
    defaults to the reference isotope only.  ``distribution.amplitude`` is the
    peak optical depth of a single unit-weight line with the coupling off.
    """

    catalog: IsotopeCatalog
    shared: LadderParams
    distribution: VelocityDistribution
    rydberg_shifts_mhz: Mapping[int, float] = field(default_factory=dict)
    coupling_active: Mapping[int, bool] | None = None

    def __post_init__(self):
        for name, mapping in (("rydberg_shifts_mhz", self.rydberg_shifts_mhz),
                              ("coupling_active", self.coupling_active or {})):
            for mass in mapping:
                if mass not in self.catalog:
                    raise ValueError(f"{name}: mass number {mass} not in catalog")

    def is_active(self, mass):
        if self.coupling_active is None:
            return mass == self.catalog.reference_mass_number
        return bool(self.coupling_active.get(mass, False))

    def with_coupling_off(self):
        return replace(self, coupling_active={m: False for m in self.catalog.mass_numbers})

    def replace(self, **changes):
        return replace(self, **changes)

    def components(self):
        """Yield ``(mass, weight, probe_shift, coupling_detuning, rabi)`` per line."""
        p = self.shared
        for mass, comp, w in self.catalog.lines():
            d2 = comp.shift_mhz
            d3 = self.rydberg_shifts_mhz.get(mass, d2)
            rabi = p.rabi_c if self.is_active(mass) else 0.0
            yield mass, w, d2, p.delta_c - (d3 - d2), rabi


def optical_depth(sys: MultiIsotopeSystem, grid, tol=1e-6):
    """Optical depth on ``grid`` (MHz): amplitude times the normalised absorption."""
    grid = np.asarray(grid, dtype=float)
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("grid must be strictly increasing")
    dist = sys.distribution
    if dist.amplitude == 0:
        return np.zeros_like(grid)
    unit = dist.with_amplitude(1.0)
    comps = list(sys.components())
    weights = np.array([c[1] for c in comps])
    dp = np.concatenate([grid - c[2] for c in comps])
    dc = np.concatenate([np.full(grid.size, c[3]) for c in comps])
    rabi = np.concatenate([np.full(grid.size, c[4]) for c in comps])
    try:
        chi = _integrate_batch(sys.shared, unit, dp, dc, rabi, tol)
    except IntegrationError as exc:
        idx = None if exc.index is None else exc.index % grid.size
        raise IntegrationError(f"grid point {idx}: {exc}", exc.estimate, exc.error, idx) from None
    absorption = -chi.imag.reshape(len(comps), grid.size)
    norm = doppler_peak_absorption(sys.shared, unit)
    return dist.amplitude * (weights @ absorption) / norm


def synthesize_spectrum(sys: MultiIsotopeSystem, grid, tol=1e-6) -> Spectrum:
    """Probe transmission ``exp(-optical depth)`` on ``grid``."""
    grid = np.asarray(grid, dtype=float)
    trans = np.exp(-optical_depth(sys, grid, tol))
    return Spectrum(grid, np.clip(trans, 0.0, 1.0), kind="transmission",
                    meta={"tol": tol})


def difference_spectrum(sys: MultiIsotopeSystem, grid, tol=1e-6) -> Spectrum:
    """Transmission with coupling minus the same system with coupling off."""
    on = synthesize_spectrum(sys, grid, tol)
    off = synthesize_spectrum(sys.with_coupling_off(), grid, tol)
    return Spectrum(on.frequency_mhz, on.values - off.values, kind="difference",
                    meta={"tol": tol})


def amplitude_for_peak_absorption(sys: MultiIsotopeSystem, target, grid, tol=1e-6) -> float:
    """Amplitude giving ``1 - min(T) = target`` with the coupling off.

    Optical depth is linear in the amplitude, so this is a single rescale.
    """
    if not 0 < target < 1:
        raise ValueError("target peak absorption must lie in (0, 1)")
    base = sys.with_coupling_off().replace(distribution=sys.distribution.with_amplitude(1.0))
    od_max = optical_depth(base, grid, tol).max()
    return -math.log1p(-target) / od_max
