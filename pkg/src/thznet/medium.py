"""Propagation medium: molecular absorption lines and the coefficient k(f).

A medium is a constant baseline plus a superposition of Lorentzian lines,
each described by its center, its value at the center and its half-width
at half-maximum. All quantities are SI base units (Hz, 1/m).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .errors import DomainError, MediumParseError

ArrayLike = Union[float, np.ndarray]

_TOP_KEYS = {"name", "baseline_coefficient", "lines"}
_LINE_KEYS = {"center_hz", "peak_per_m", "hwhm_hz"}


@dataclass(frozen=True)
class AbsorptionLine:
    center_frequency: float
    peak_coefficient: float
    half_width: float

    def __post_init__(self):
        if not self.center_frequency > 0:
            raise ValueError(f"center_frequency must be > 0, got {self.center_frequency!r}")
        if not self.peak_coefficient >= 0:
            raise ValueError(f"peak_coefficient must be >= 0, got {self.peak_coefficient!r}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be > 0, got {self.half_width!r}")

    def __call__(self, f):
        x = (f - self.center_frequency) / self.half_width
        return self.peak_coefficient / (1.0 + x * x)


def canonical_lines(lines: Iterable[AbsorptionLine]) -> tuple[AbsorptionLine, ...]:
    """Sort lines by center and merge exact duplicates by summing peaks.

    Duplicate centers are only merged when their half-widths agree too;
    otherwise the superposition would change shape, so it is rejected.
    """
    merged: dict[float, AbsorptionLine] = {}
    for line in lines:
        prev = merged.get(line.center_frequency)
        if prev is None:
            merged[line.center_frequency] = line
        elif prev.half_width == line.half_width:
            merged[line.center_frequency] = AbsorptionLine(
                line.center_frequency,
                prev.peak_coefficient + line.peak_coefficient,
                line.half_width,
            )
        else:
            raise ValueError(
                f"duplicate line center {line.center_frequency!r} Hz with differing half-widths"
            )
    return tuple(merged[c] for c in sorted(merged))


@dataclass(frozen=True)
class MediumSpec:
    name: str
    baseline_coefficient: float = 0.0
    lines: tuple[AbsorptionLine, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        if not self.baseline_coefficient >= 0:
            raise ValueError(
                f"baseline_coefficient must be >= 0, got {self.baseline_coefficient!r}"
            )
        centers = [ln.center_frequency for ln in self.lines]
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise ValueError("line centers must be strictly increasing; use MediumSpec.build")

    @classmethod
    def build(cls, name, baseline_coefficient=0.0, lines=()):
        """Construct from lines in any order (duplicates merged)."""
        return cls(name, baseline_coefficient, canonical_lines(lines))

    def with_line(self, line: AbsorptionLine) -> "MediumSpec":
        return MediumSpec.build(self.name, self.baseline_coefficient, (*self.lines, line))

    @cached_property
    def _arrays(self):
        centers = np.array([ln.center_frequency for ln in self.lines], dtype=float)
        peaks = np.array([ln.peak_coefficient for ln in self.lines], dtype=float)
        widths = np.array([ln.half_width for ln in self.lines], dtype=float)
        return centers, peaks, widths

    @property
    def is_vacuum(self) -> bool:
        return self.baseline_coefficient == 0 and all(ln.peak_coefficient == 0 for ln in self.lines)


def vacuum() -> MediumSpec:
    return MediumSpec("vacuum")


def absorption_coefficient(medium: MediumSpec, f: ArrayLike) -> ArrayLike:
    """Absorption coefficient k(f) in 1/m.

    Accepts a scalar or an array of frequencies; a scalar returns a float.
    """
    scalar = np.ndim(f) == 0
    fa = np.asarray(f, dtype=float)
    if not np.all(fa > 0):
        raise DomainError("frequency must be > 0 Hz")
    centers, peaks, widths = medium._arrays
    if centers.size == 0:
        k = np.full(fa.shape, medium.baseline_coefficient)
    else:
        x = (fa[..., None] - centers) / widths
        k = medium.baseline_coefficient + np.sum(peaks / (1.0 + x * x), axis=-1)
    return float(k) if scalar else k


# -- file format --------------------------------------------------------------


def _number(value, where, *, positive=False, nonnegative=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MediumParseError(f"{where}: expected a number, got {value!r}")
    value = float(value)
    if not np.isfinite(value):
        raise MediumParseError(f"{where}: must be finite, got {value!r}")
    if positive and not value > 0:
        raise MediumParseError(f"{where}: must be > 0, got {value!r}")
    if nonnegative and not value >= 0:
        raise MediumParseError(f"{where}: must be >= 0, got {value!r}")
    return value


def medium_from_dict(doc) -> MediumSpec:
    if not isinstance(doc, dict):
        raise MediumParseError("medium document must be a JSON object")
    unknown = sorted(set(doc) - _TOP_KEYS)
    if unknown:
        raise MediumParseError(f"unknown key(s) in medium document: {', '.join(unknown)}")
    if "name" not in doc or not isinstance(doc["name"], str):
        raise MediumParseError("name: required string field")
    baseline = _number(doc.get("baseline_coefficient", 0.0), "baseline_coefficient", nonnegative=True)
    raw_lines = doc.get("lines", [])
    if not isinstance(raw_lines, list):
        raise MediumParseError("lines: expected a list")
    lines = []
    for i, entry in enumerate(raw_lines):
        where = f"lines[{i}]"
        if not isinstance(entry, dict):
            raise MediumParseError(f"{where}: expected an object")
        unknown = sorted(set(entry) - _LINE_KEYS)
        if unknown:
            raise MediumParseError(f"{where}: unknown key(s): {', '.join(unknown)}")
        missing = sorted(_LINE_KEYS - set(entry))
        if missing:
            raise MediumParseError(f"{where}: missing key(s): {', '.join(missing)}")
        lines.append(
            AbsorptionLine(
                _number(entry["center_hz"], f"{where}.center_hz", positive=True),
                _number(entry["peak_per_m"], f"{where}.peak_per_m", nonnegative=True),
                _number(entry["hwhm_hz"], f"{where}.hwhm_hz", positive=True),
            )
        )
    try:
        return MediumSpec.build(doc["name"], baseline, lines)
    except ValueError as exc:
        raise MediumParseError(f"lines: {exc}") from None


def parse_medium_spec(text: str) -> MediumSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MediumParseError(f"malformed JSON: {exc}") from None
    return medium_from_dict(doc)


def medium_to_dict(medium: MediumSpec) -> dict:
    return {
        "name": medium.name,
        "baseline_coefficient": medium.baseline_coefficient,
        "lines": [
            {"center_hz": ln.center_frequency, "peak_per_m": ln.peak_coefficient, "hwhm_hz": ln.half_width}
            for ln in medium.lines
        ],
    }


def serialize_medium_spec(medium: MediumSpec) -> str:
    return json.dumps(medium_to_dict(medium), indent=2)


BUILTIN_MEDIA = {"vacuum": None, "synthetic-air": "synthetic_air.json"}


def load_medium(ref: Union[str, Path], base_dir: Union[str, Path, None] = None) -> MediumSpec:
    """Load a medium from a file path or a ``builtin:<name>`` reference.

    Relative paths resolve against ``base_dir`` when given.
    """
    ref = str(ref)
    if ref.startswith("builtin:"):
        name = ref[len("builtin:"):]
        if name not in BUILTIN_MEDIA:
            raise MediumParseError(f"unknown builtin medium {name!r}")
        if BUILTIN_MEDIA[name] is None:
            return vacuum()
        text = resources.files("thznet").joinpath("data", BUILTIN_MEDIA[name]).read_text()
        return parse_medium_spec(text)
    path = Path(ref)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    return parse_medium_spec(path.read_text())


def synthetic_air() -> MediumSpec:
    """Bundled air-like medium with eight lines spread over 0.1-10 THz."""
    return load_medium("builtin:synthetic-air")
