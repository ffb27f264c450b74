"""
Isotope and hyperfine line data for a single optical transition.

Shifts are ordinary frequencies in MHz relative to the reference isotope.
Relative strengths are kept as :class:`fractions.Fraction` whenever the
source gives them as rationals, so the per-isotope normalisation check is
exact.

The JSON document accepted by :func:`load_catalog` looks like::

    {
      "transition": "5s2 1S0 -> 5s5p 1P1",
      "reference_mass_number": 88,
      "isotopes": [
        {"mass_number": 87, "abundance_percent": 7.00, "nuclear_spin": "9/2",
         "components": [{"label": "7/2", "shift_mhz": -9.7,
                         "relative_strength": "4/15"}, ...]},
        ...
      ]
    }

``abundance`` (a fraction) may be given instead of ``abundance_percent``.
A component may carry an optional ``shift_uncertainty_mhz``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Union

from .errors import CatalogError, CatalogValidationError

Rational = Union[Fraction, float]

ABUNDANCE_TOLERANCE = 3e-3
STRENGTH_TOLERANCE = 1e-12


@dataclass(frozen=True)
class LineComponent:
    shift_mhz: float
    relative_strength: Rational = Fraction(1)
    label: str | None = None
    shift_uncertainty_mhz: float | None = None

    def __post_init__(self):
        if not self.relative_strength > 0:
            raise CatalogValidationError(
                f"relative strength must be positive, got {self.relative_strength}",
                "relative_strength")


@dataclass(frozen=True)
class IsotopeSpec:
    mass_number: int
    abundance: float
    components: tuple[LineComponent, ...]
    nuclear_spin: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        where = f"isotopes[{self.mass_number}]"
        if not self.components:
            raise CatalogValidationError("needs at least one component", where)
        if not 0.0 <= self.abundance <= 1.0:
            raise CatalogValidationError(
                f"abundance {self.abundance} outside [0, 1]", where + ".abundance")
        if self.nuclear_spin < 0:
            raise CatalogValidationError("nuclear spin must be >= 0", where + ".nuclear_spin")
        total = sum(c.relative_strength for c in self.components)
        if self.nuclear_spin == 0:
            if len(self.components) != 1 or self.components[0].relative_strength != 1:
                raise CatalogValidationError(
                    "I = 0 requires exactly one component of strength 1", where)
        elif abs(float(total) - 1.0) > STRENGTH_TOLERANCE:
            raise CatalogValidationError(
                f"relative strengths sum to {float(total):.12g}, expected 1", where)

    @property
    def weights(self) -> list[float]:
        """Abundance times relative strength, one entry per component."""
        return [self.abundance * float(c.relative_strength) for c in self.components]

    @property
    def mean_shift_mhz(self) -> float:
        """Strength-weighted centroid of the component shifts."""
        return float(sum(float(c.relative_strength) * c.shift_mhz for c in self.components))


@dataclass(frozen=True)
class IsotopeCatalog:
    reference_mass_number: int
    isotopes: tuple[IsotopeSpec, ...]
    transition_label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "isotopes", tuple(self.isotopes))
        masses = [iso.mass_number for iso in self.isotopes]
        if len(set(masses)) != len(masses):
            raise CatalogValidationError("duplicate mass numbers", "isotopes")
        total = sum(iso.abundance for iso in self.isotopes)
        if abs(total - 1.0) > ABUNDANCE_TOLERANCE:
            raise CatalogValidationError(
                f"abundances sum to {total:.6f}, outside 1 +/- {ABUNDANCE_TOLERANCE}",
                "isotopes.abundance")
        ref = [iso for iso in self.isotopes if iso.mass_number == self.reference_mass_number]
        if len(ref) != 1:
            raise CatalogValidationError(
                f"reference isotope {self.reference_mass_number} not present",
                "reference_mass_number")
        if not any(c.shift_mhz == 0.0 for c in ref[0].components):
            raise CatalogValidationError(
                "reference isotope needs a zero-shift component", "reference_mass_number")

    def __getitem__(self, mass_number: int) -> IsotopeSpec:
        for iso in self.isotopes:
            if iso.mass_number == mass_number:
                return iso
        raise KeyError(mass_number)

    def __contains__(self, mass_number) -> bool:
        return any(iso.mass_number == mass_number for iso in self.isotopes)

    @property
    def mass_numbers(self) -> list[int]:
        return [iso.mass_number for iso in self.isotopes]

    def lines(self):
        """Yield ``(mass_number, component, weight)`` for every component."""
        for iso in self.isotopes:
            for comp, w in zip(iso.components, iso.weights):
                yield iso.mass_number, comp, w


def builtin_strontium_catalog() -> IsotopeCatalog:
    """Naturally occurring Sr on the 460.7 nm 5s2 1S0 -> 5s5p 1P1 line."""

    def single(mass, percent, shift):
        return IsotopeSpec(mass, percent / 100.0, (LineComponent(shift),))

    sr87 = IsotopeSpec(
        87, 7.00 / 100.0,
        (LineComponent(-9.7, Fraction(4, 15), "7/2"),
         LineComponent(-68.9, Fraction(1, 3), "9/2"),
         LineComponent(-51.9, Fraction(2, 5), "11/2")),
        nuclear_spin=Fraction(9, 2),
    )
    return IsotopeCatalog(
        reference_mass_number=88,
        isotopes=(single(84, 0.56, -270.8), single(86, 9.86, -124.5), sr87,
                  single(88, 82.58, 0.0)),
        transition_label="5s2 1S0 -> 5s5p 1P1 (460.7 nm)",
    )


# --- serialisation ---------------------------------------------------------

def _rational_to_json(x):
    if isinstance(x, Fraction):
        return str(x)
    return x


def _parse_rational(value, where) -> Rational:
    if isinstance(value, bool):
        raise CatalogError("expected a number or 'p/q' string", where)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise CatalogError("must be finite", where)
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise CatalogError(f"cannot parse rational {value!r}", where) from None
    raise CatalogError("expected a number or 'p/q' string", where)


def _parse_float(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CatalogError("expected a number", where)
    value = float(value)
    if not math.isfinite(value):
        raise CatalogError("must be finite", where)
    return value


def catalog_to_dict(catalog: IsotopeCatalog) -> dict:
    isotopes = []
    for iso in catalog.isotopes:
        comps = []
        for c in iso.components:
            entry = {"label": c.label, "shift_mhz": c.shift_mhz,
                     "relative_strength": _rational_to_json(c.relative_strength)}
            if c.shift_uncertainty_mhz is not None:
                entry["shift_uncertainty_mhz"] = c.shift_uncertainty_mhz
            comps.append(entry)
        isotopes.append({"mass_number": iso.mass_number, "abundance": iso.abundance,
                         "nuclear_spin": str(iso.nuclear_spin), "components": comps})
    return {"transition": catalog.transition_label,
            "reference_mass_number": catalog.reference_mass_number,
            "isotopes": isotopes}


def dumps_catalog(catalog: IsotopeCatalog) -> str:
    return json.dumps(catalog_to_dict(catalog), indent=2)


def catalog_from_dict(doc) -> IsotopeCatalog:
    if not isinstance(doc, dict):
        raise CatalogError("document must be an object", "<root>")
    for key in ("reference_mass_number", "isotopes"):
        if key not in doc:
            raise CatalogError("missing required field", key)
    ref = doc["reference_mass_number"]
    if isinstance(ref, bool) or not isinstance(ref, int):
        raise CatalogError("expected an integer", "reference_mass_number")
    if not isinstance(doc["isotopes"], list) or not doc["isotopes"]:
        raise CatalogError("expected a non-empty list", "isotopes")

    isotopes = []
    for i, entry in enumerate(doc["isotopes"]):
        where = f"isotopes[{i}]"
        if not isinstance(entry, dict):
            raise CatalogError("expected an object", where)
        mass = entry.get("mass_number")
        if isinstance(mass, bool) or not isinstance(mass, int):
            raise CatalogError("expected an integer", where + ".mass_number")
        if "abundance" in entry:
            abundance = _parse_float(entry["abundance"], where + ".abundance")
        elif "abundance_percent" in entry:
            abundance = _parse_float(entry["abundance_percent"], where + ".abundance_percent") / 100.0
        else:
            raise CatalogError("missing abundance or abundance_percent", where)
        spin = _parse_rational(entry.get("nuclear_spin", 0), where + ".nuclear_spin")
        if not isinstance(spin, Fraction):
            spin = Fraction(spin).limit_denominator(2)
        comps_doc = entry.get("components")
        if not isinstance(comps_doc, list):
            raise CatalogError("expected a list", where + ".components")
        comps = []
        for j, c in enumerate(comps_doc):
            cw = f"{where}.components[{j}]"
            if not isinstance(c, dict):
                raise CatalogError("expected an object", cw)
            if "shift_mhz" not in c:
                raise CatalogError("missing required field", cw + ".shift_mhz")
            label = c.get("label")
            if label is not None and not isinstance(label, str):
                label = str(label)
            unc = c.get("shift_uncertainty_mhz")
            comps.append(LineComponent(
                shift_mhz=_parse_float(c["shift_mhz"], cw + ".shift_mhz"),
                relative_strength=_parse_rational(c.get("relative_strength", 1),
                                                  cw + ".relative_strength"),
                label=label,
                shift_uncertainty_mhz=None if unc is None else _parse_float(
                    unc, cw + ".shift_uncertainty_mhz"),
            ))
        isotopes.append(IsotopeSpec(mass, abundance, tuple(comps), nuclear_spin=spin))
    label = doc.get("transition", "")
    return IsotopeCatalog(ref, tuple(isotopes), str(label))


def load_catalog(source) -> IsotopeCatalog:
    """Parse and validate a catalog.

    ``source`` may be a JSON string, a path to a JSON file, or an already
    decoded mapping.
    """
    if isinstance(source, dict):
        return catalog_from_dict(source)
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        source = Path(source).read_text()
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"invalid JSON ({exc.msg})", f"line {exc.lineno}") from None
    return catalog_from_dict(doc)
