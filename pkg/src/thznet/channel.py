"""Terahertz channel: path loss, molecular noise, usable bandwidth, capacity.

Total loss combines spreading and absorption multiplicatively in linear
scale (additively in dB). Band-level scalars evaluate the medium at the
band midpoint; the spectral functions work on frequency grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .constants import (
    BOLTZMANN,
    DEFAULT_ELECTRONIC_NOISE_TEMPERATURE,
    DEFAULT_GRID_STEP,
    DEFAULT_REFERENCE_TEMPERATURE,
    SPEED_OF_LIGHT,
)
from .errors import DomainError
from .medium import MediumSpec, absorption_coefficient

ArrayLike = Union[float, np.ndarray]

_DB_PER_NEPER_POWER = 10.0 / math.log(10.0)  # 10*log10(e)


@dataclass(frozen=True)
class FrequencyBand:
    f_low: float
    f_high: float

    def __post_init__(self):
        if not (0 < self.f_low < self.f_high):
            raise DomainError(f"band needs 0 < f_low < f_high, got ({self.f_low!r}, {self.f_high!r})")

    @property
    def width(self) -> float:
        return self.f_high - self.f_low

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.f_low + self.f_high)

    def subbands(self, step: float) -> tuple[np.ndarray, float]:
        """Split into equal sub-bands no wider than ``step``.

        Returns (sub-band midpoints, sub-band width).
        """
        if not step > 0:
            raise DomainError(f"grid step must be > 0, got {step!r}")
        if step > self.width * (1 + 1e-12):
            raise DomainError(f"grid step {step!r} Hz exceeds band width {self.width!r} Hz")
        n = max(1, math.ceil(self.width / step - 1e-9))
        df = self.width / n
        mids = self.f_low + df * (np.arange(n) + 0.5)
        return mids, df

    def contains(self, other: "FrequencyBand") -> bool:
        return self.f_low <= other.f_low and other.f_high <= self.f_high


@dataclass(frozen=True)
class LinkGeometry:
    distance: float

    def __post_init__(self):
        if not self.distance > 0:
            raise DomainError(f"distance must be > 0 m, got {self.distance!r}")


@dataclass(frozen=True)
class NoiseEnvironment:
    reference_temperature: float = DEFAULT_REFERENCE_TEMPERATURE
    electronic_noise_temperature: float = DEFAULT_ELECTRONIC_NOISE_TEMPERATURE

    def __post_init__(self):
        if self.reference_temperature < 0 or self.electronic_noise_temperature < 0:
            raise DomainError("noise temperatures must be >= 0 K")


@dataclass(frozen=True)
class LinkBudget:
    band: FrequencyBand
    geometry: LinkGeometry
    tx_psd: float
    path_loss_db: float
    noise_power: float
    snr: float
    capacity: float


def _check_positive(name, value):
    if not np.all(np.asarray(value) > 0):
        raise DomainError(f"{name} must be > 0")


def _out(value, scalar):
    return float(value) if scalar else value


def spreading_loss(f: ArrayLike, d: ArrayLike) -> ArrayLike:
    """Free-space spreading loss (4*pi*f*d/c)**2, linear."""
    _check_positive("frequency", f)
    _check_positive("distance", d)
    scalar = np.ndim(f) == 0 and np.ndim(d) == 0
    x = 4.0 * np.pi * np.asarray(f, dtype=float) * np.asarray(d, dtype=float) / SPEED_OF_LIGHT
    return _out(x * x, scalar)


def spreading_loss_db(f: ArrayLike, d: ArrayLike) -> ArrayLike:
    _check_positive("frequency", f)
    _check_positive("distance", d)
    scalar = np.ndim(f) == 0 and np.ndim(d) == 0
    x = 4.0 * np.pi * np.asarray(f, dtype=float) * np.asarray(d, dtype=float) / SPEED_OF_LIGHT
    return _out(20.0 * np.log10(x), scalar)


def absorption_loss(k: ArrayLike, d: ArrayLike) -> ArrayLike:
    """Molecular absorption loss exp(k*d), linear."""
    if not np.all(np.asarray(k) >= 0):
        raise DomainError("absorption coefficient must be >= 0")
    _check_positive("distance", d)
    scalar = np.ndim(k) == 0 and np.ndim(d) == 0
    return _out(np.exp(np.asarray(k, dtype=float) * np.asarray(d, dtype=float)), scalar)


def absorption_loss_db(k: ArrayLike, d: ArrayLike) -> ArrayLike:
    # computed directly so large k*d does not overflow exp()
    if not np.all(np.asarray(k) >= 0):
        raise DomainError("absorption coefficient must be >= 0")
    _check_positive("distance", d)
    scalar = np.ndim(k) == 0 and np.ndim(d) == 0
    return _out(_DB_PER_NEPER_POWER * np.asarray(k, dtype=float) * np.asarray(d, dtype=float), scalar)


def total_path_loss_db(medium: MediumSpec, f: ArrayLike, d: float) -> ArrayLike:
    k = absorption_coefficient(medium, f)
    return spreading_loss_db(f, d) + absorption_loss_db(k, d)


def molecular_noise_temperature(
    medium: MediumSpec, f: ArrayLike, d: float, reference_temperature: float = DEFAULT_REFERENCE_TEMPERATURE
) -> ArrayLike:
    """Emissivity model T0 * (1 - exp(-k(f) d)); zero in vacuum, saturates at T0."""
    _check_positive("distance", d)
    k = absorption_coefficient(medium, f)
    return _out(reference_temperature * -np.expm1(-np.asarray(k) * d), np.ndim(k) == 0)


def noise_power(env: NoiseEnvironment, medium: MediumSpec, band: FrequencyBand, d: float) -> float:
    """k_B * B * (T_molecular(f_mid, d) + T_else), in W."""
    t_mol = molecular_noise_temperature(medium, band.midpoint, d, env.reference_temperature)
    return BOLTZMANN * band.width * (t_mol + env.electronic_noise_temperature)


def noise_psd_curve(env: NoiseEnvironment, medium: MediumSpec, f_grid, d: float) -> np.ndarray:
    grid = np.asarray(f_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("frequency grid must be a non-empty 1-D sequence")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("frequency grid must be strictly increasing")
    t_mol = molecular_noise_temperature(medium, grid, d, env.reference_temperature)
    return BOLTZMANN * (t_mol + env.electronic_noise_temperature)


def usable_bandwidth(
    medium: MediumSpec,
    band: FrequencyBand,
    d: float,
    loss_threshold_db: float,
    grid_step: float = DEFAULT_GRID_STEP,
) -> list[FrequencyBand]:
    """Maximal sub-bands where absorption loss alone stays <= threshold.

    The band is split into cells no wider than ``grid_step``; each cell is
    classified by its midpoint and adjacent passing cells are merged.
    """
    if not loss_threshold_db > 0:
        raise DomainError(f"loss threshold must be > 0 dB, got {loss_threshold_db!r}")
    LinkGeometry(d)
    mids, df = band.subbands(grid_step)
    ok = absorption_loss_db(absorption_coefficient(medium, mids), d) <= loss_threshold_db
    out = []
    n = ok.size
    i = 0
    while i < n:
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and ok[j + 1]:
            j += 1
        lo = band.f_low + i * df
        hi = band.f_high if j == n - 1 else band.f_low + (j + 1) * df
        out.append(FrequencyBand(lo, hi))
        i = j + 1
    return out


def coverage(intervals, band: FrequencyBand) -> float:
    """Fraction of ``band`` covered by disjoint ``intervals``."""
    return sum(iv.width for iv in intervals) / band.width


def subband_snr(
    medium: MediumSpec, env: NoiseEnvironment, f: ArrayLike, d: float, tx_psd: float
) -> ArrayLike:
    """Per-Hz SNR tx_psd / (L(f) * k_B * (T_mol(f) + T_else)); the sub-band width cancels."""
    if tx_psd < 0:
        raise DomainError(f"tx_psd must be >= 0, got {tx_psd!r}")
    with np.errstate(over="ignore"):
        loss = 10.0 ** (total_path_loss_db(medium, f, d) / 10.0)
    t = molecular_noise_temperature(medium, f, d, env.reference_temperature) + env.electronic_noise_temperature
    if tx_psd == 0:
        return np.zeros_like(np.asarray(f, dtype=float)) if np.ndim(f) else 0.0
    if np.any(np.asarray(t) == 0):
        raise DomainError("total noise temperature is zero; SNR is unbounded")
    return tx_psd / (loss * BOLTZMANN * t)


def channel_capacity(
    medium: MediumSpec,
    env: NoiseEnvironment,
    band: FrequencyBand,
    d: float,
    tx_psd: float,
    grid_step: float = DEFAULT_GRID_STEP,
) -> float:
    """Shannon capacity summed over equal sub-bands, in bit/s."""
    LinkGeometry(d)
    mids, df = band.subbands(grid_step)
    snr = subband_snr(medium, env, mids, d, tx_psd)
    return float(df * np.sum(np.log2(1.0 + snr)))


def tx_psd_for_midband_snr(
    medium: MediumSpec, env: NoiseEnvironment, band: FrequencyBand, d: float, snr: float
) -> float:
    """Flat transmit PSD (W/Hz) that yields ``snr`` at the band midpoint."""
    f = band.midpoint
    loss = 10.0 ** (total_path_loss_db(medium, f, d) / 10.0)
    t = molecular_noise_temperature(medium, f, d, env.reference_temperature) + env.electronic_noise_temperature
    return snr * loss * BOLTZMANN * t


def link_budget(
    medium: MediumSpec,
    env: NoiseEnvironment,
    band: FrequencyBand,
    d: float,
    tx_power: float,
    grid_step: float = DEFAULT_GRID_STEP,
) -> LinkBudget:
    """Budget for a transmitter spreading ``tx_power`` flat over ``band``."""
    geometry = LinkGeometry(d)
    if tx_power < 0:
        raise DomainError(f"tx_power must be >= 0, got {tx_power!r}")
    tx_psd = tx_power / band.width
    loss_db = total_path_loss_db(medium, band.midpoint, d)
    p_noise = noise_power(env, medium, band, d)
    received = tx_power / 10.0 ** (loss_db / 10.0)
    if received == 0:
        snr = 0.0
    elif p_noise == 0:
        raise DomainError("noise power is zero; SNR is unbounded")
    else:
        snr = received / p_noise
    cap = channel_capacity(medium, env, band, d, tx_psd, grid_step)
    return LinkBudget(band, geometry, tx_psd, loss_db, p_noise, snr, cap)
