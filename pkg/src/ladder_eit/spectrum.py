"""Spectrum container and its CSV / JSON-sidecar representation."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

KINDS = ("transmission", "difference", "absorption")


@dataclass
class Spectrum:
    """Samples on a strictly increasing frequency grid.

    ``frequency_mhz`` holds probe detunings relative to the reference
    isotope, or raw scan units when ``meta["axis"] == "raw"``.
    """

    frequency_mhz: np.ndarray
    values: np.ndarray
    kind: str = "transmission"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.frequency_mhz = np.asarray(self.frequency_mhz, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.kind not in KINDS:
            raise ValueError(f"unknown spectrum kind {self.kind!r}")
        if self.frequency_mhz.ndim != 1 or self.frequency_mhz.shape != self.values.shape:
            raise ValueError("frequency grid and values must be 1-D and of equal length")
        if self.frequency_mhz.size > 1 and not np.all(np.diff(self.frequency_mhz) > 0):
            raise ValueError("frequency grid must be strictly increasing")
        if self.kind == "transmission" and self.values.size:
            if self.values.min() < -1e-12 or self.values.max() > 1 + 1e-12:
                raise ValueError("transmission values must lie in [0, 1]")

    def __len__(self):
        return self.frequency_mhz.size

    @property
    def step_mhz(self) -> float:
        return float(np.median(np.diff(self.frequency_mhz)))


def parse_grid(text: str) -> np.ndarray:
    """Parse ``start:stop:step`` (MHz, stop inclusive) into a grid."""
    try:
        start, stop, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise ValueError(f"grid must look like start:stop:step, got {text!r}") from None
    if not step > 0 or not stop > start:
        raise ValueError(f"grid needs stop > start and step > 0, got {text!r}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def write_spectrum_csv(spec: Spectrum, path, header=("frequency_mhz", "value"), sidecar=True):
    """Write ``spec`` as two-column CSV plus a ``.json`` metadata sidecar.

    Floats are written with ``repr`` so a re-read reproduces them exactly.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for x, y in zip(spec.frequency_mhz, spec.values):
            w.writerow((repr(float(x)), repr(float(y))))
    if sidecar:
        meta = {"kind": spec.kind, "columns": list(header), "n_points": len(spec)}
        meta.update(spec.meta)
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=_jsonable))
    return path


def read_spectrum_csv(path, kind=None) -> Spectrum:
    """Read a two-column CSV written by :func:`write_spectrum_csv`.

    The sidecar, when present, supplies ``kind`` and metadata.  Raises
    ``ValueError`` on empty or malformed files.
    """
    path = Path(path)
    meta = {}
    side = path.with_suffix(".json")
    if side.exists() and side != path:
        meta = json.loads(side.read_text())
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise ValueError(f"{path}: no data rows")
    header, body = rows[0], rows[1:]
    try:
        data = np.array([[float(a), float(b)] for a, b in body])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from None
    if kind is None:
        kind = meta.pop("kind", None) or ("transmission" if header[0] == "frequency_mhz" else "absorption")
    else:
        meta.pop("kind", None)
    meta.setdefault("columns", header)
    if header[0] == "raw_axis":
        meta.setdefault("axis", "raw")
    return Spectrum(data[:, 0], data[:, 1], kind=kind, meta=meta)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return str(obj)
