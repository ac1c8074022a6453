"""Daubechies-8 periodized DWT and the dyadic level -> EEG band map.

The filter pair is built by spectral factorization instead of being
copied from a table, then checked against the orthonormality and
vanishing-moment identities in the test-suite.

Band layout at fs = 250 Hz (five levels)::

    delta  A5  [0, 3.91)      theta  D5  [3.91, 7.81)
    alpha  D4  [7.81, 15.63)  beta   D3  [15.63, 31.25)
    gamma  D2  [31.25, 62.5)  (D1 above 62.5 Hz is discarded)

Nominal physiological ranges are delta 0-3.5, theta 4-7, alpha 8-13,
beta 14-30 and gamma 30-60 Hz; the dyadic edges are the closest a DWT
cascade can get.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Dict, List, Tuple

import numpy as np

from .errors import ConfigurationError, SignalLengthError

BAND_NAMES = ("delta", "theta", "alpha", "beta", "gamma")

NOMINAL_BANDS_HZ: Dict[str, Tuple[float, float]] = {
    "delta": (0.0, 3.5),
    "theta": (4.0, 7.0),
    "alpha": (8.0, 13.0),
    "beta": (14.0, 30.0),
    "gamma": (30.0, 60.0),
}

# The approximation edge must land at or below this frequency.
DELTA_EDGE_HZ = 4.0
MIN_FS_HZ = 128.0
MIN_SIGNAL_LENGTH = 64


@dataclass(frozen=True)
class WaveletFilterPair:
    lowpass: np.ndarray
    highpass: np.ndarray

    @property
    def length(self) -> int:
        return len(self.lowpass)


def daubechies_lowpass(n_moments: int) -> np.ndarray:
    """Extremal-phase Daubechies scaling filter with ``2*n_moments`` taps.

    Factor ``|m0|^2 = cos^2N(w/2) P(sin^2(w/2))`` with
    ``P(y) = sum_k C(N-1+k, k) y^k`` and keep the roots inside the unit
    circle. Normalized so that the taps sum to sqrt(2).
    """
    N = n_moments
    # numpy.roots wants highest degree first
    p_coeffs = [comb(N - 1 + k, k) for k in range(N)][::-1]
    y_roots = np.roots(p_coeffs) if N > 1 else np.array([])
    # y = (2 - z - 1/z)/4  =>  z^2 - (2 - 4y) z + 1 = 0
    z_roots = []
    for y in y_roots:
        pair = np.roots([1.0, -(2.0 - 4.0 * y), 1.0])
        z_roots.append(pair[np.argmin(np.abs(pair))])
    h = np.array([1.0])
    for _ in range(N):
        h = np.convolve(h, [1.0, 1.0])
    for z in z_roots:
        h = np.convolve(h, [1.0, -z])
    h = np.real(h)
    h = h * (np.sqrt(2.0) / h.sum())
    # minimum-phase orientation: energy concentrated in the leading taps
    half = len(h) // 2
    if np.dot(h[:half], h[:half]) < np.dot(h[half:], h[half:]):
        h = h[::-1].copy()
    return h


def quadrature_mirror(lowpass: np.ndarray) -> np.ndarray:
    """g_k = (-1)^k h_{L-1-k}."""
    L = len(lowpass)
    signs = np.where(np.arange(L) % 2 == 0, 1.0, -1.0)
    return signs * lowpass[::-1]


@lru_cache(maxsize=None)
def _db8() -> WaveletFilterPair:
    h = daubechies_lowpass(8)
    h.setflags(write=False)
    g = quadrature_mirror(h)
    g.setflags(write=False)
    return WaveletFilterPair(h, g)


def db8_filters() -> WaveletFilterPair:
    return _db8()


def _analysis_index(n: int, L: int) -> np.ndarray:
    # row m, tap k reads x[(2m + k) mod n]
    return (2 * np.arange(n // 2)[:, None] + np.arange(L)[None, :]) % n


def dwt_step(signal, filters: WaveletFilterPair | None = None) -> Tuple[np.ndarray, np.ndarray]:
    """One periodized analysis step along the last axis.

    ``approx[m] = sum_k h[k] x[(2m+k) mod n]`` and likewise for the
    detail with the highpass filter.
    """
    filters = filters or db8_filters()
    x = np.asarray(signal, dtype=np.float64)
    n = x.shape[-1]
    if n < 2 or n % 2:
        raise SignalLengthError(f"dwt_step needs an even length >= 2, got {n}")
    windows = x[..., _analysis_index(n, filters.length)]
    return windows @ filters.lowpass, windows @ filters.highpass


def idwt_step(approx, detail, filters: WaveletFilterPair | None = None) -> np.ndarray:
    """Inverse of :func:`dwt_step` (transpose of the orthonormal analysis)."""
    filters = filters or db8_filters()
    a = np.asarray(approx, dtype=np.float64)
    d = np.asarray(detail, dtype=np.float64)
    if a.shape != d.shape:
        raise SignalLengthError(f"approx/detail length mismatch: {a.shape} vs {d.shape}")
    n = 2 * a.shape[-1]
    out = np.zeros(a.shape[:-1] + (n,))
    two_m = 2 * np.arange(a.shape[-1])
    # for a fixed tap the targets (2m + k) mod n are distinct, so += is safe
    for k in range(filters.length):
        out[..., (two_m + k) % n] += a * filters.lowpass[k] + d * filters.highpass[k]
    return out


def n_levels(fs_hz: float) -> int:
    """Smallest L with fs / 2^(L+1) <= 4 Hz."""
    if fs_hz < MIN_FS_HZ:
        raise ConfigurationError(
            f"fs={fs_hz} Hz is too low to realize five bands below 60 Hz (need >= {MIN_FS_HZ})"
        )
    L = 1
    while fs_hz / 2 ** (L + 1) > DELTA_EDGE_HZ:
        L += 1
    return L


def band_edges(fs_hz: float) -> Dict[str, Tuple[float, float]]:
    """Dyadic frequency range of each named band at this sampling rate."""
    L = n_levels(fs_hz)
    edges = {"delta": (0.0, fs_hz / 2 ** (L + 1))}
    for name, level in zip(BAND_NAMES[1:], range(L, L - 4, -1)):
        edges[name] = (fs_hz / 2 ** (level + 1), fs_hz / 2 ** level)
    return edges


@dataclass(frozen=True, eq=False)
class BandDecomposition:
    bands: Dict[str, np.ndarray]
    discarded_hf: List[np.ndarray]
    original_length: int
    fs_hz: float
    levels: int

    def energy(self, band: str) -> float:
        c = self.bands[band]
        return float(np.dot(c, c))

    @property
    def total_energy(self) -> float:
        kept = sum(self.energy(b) for b in BAND_NAMES)
        return kept + sum(float(np.dot(d, d)) for d in self.discarded_hf)


def wavedec(signal, levels: int, filters: WaveletFilterPair | None = None) -> List[np.ndarray]:
    """Full cascade; returns ``[A_L, D_L, D_{L-1}, ..., D_1]``."""
    x = np.asarray(signal, dtype=np.float64)
    if x.shape[-1] % 2 ** levels:
        raise SignalLengthError(f"length {x.shape[-1]} is not a multiple of 2^{levels}")
    details = []
    a = x
    for _ in range(levels):
        a, d = dwt_step(a, filters)
        details.append(d)
    return [a] + details[::-1]


def waverec(coeffs: List[np.ndarray], filters: WaveletFilterPair | None = None) -> np.ndarray:
    a = coeffs[0]
    for d in coeffs[1:]:
        a = idwt_step(a, d, filters)
    return a


def pad_to_multiple(signal, multiple: int) -> np.ndarray:
    x = np.asarray(signal, dtype=np.float64)
    n = x.shape[-1]
    target = -(-n // multiple) * multiple
    if target == n:
        return x.copy()
    pad = [(0, 0)] * (x.ndim - 1) + [(0, target - n)]
    return np.pad(x, pad)


def decompose_bands(signal, fs_hz: float) -> BandDecomposition:
    """Split one channel into the five EEG bands.

    The signal is zero-padded to a multiple of ``2^L``; ``discarded_hf``
    holds the finer details ``[D_{L-4}, ..., D_1]`` above the gamma band.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise SignalLengthError("decompose_bands expects a 1-D signal")
    L = n_levels(fs_hz)
    if x.size < MIN_SIGNAL_LENGTH:
        raise SignalLengthError(f"signal length {x.size} < {MIN_SIGNAL_LENGTH}")
    coeffs = wavedec(pad_to_multiple(x, 2 ** L), L)
    bands = dict(zip(BAND_NAMES, coeffs[:5]))
    return BandDecomposition(bands, coeffs[5:], x.size, float(fs_hz), L)


def reconstruct(decomp: BandDecomposition) -> np.ndarray:
    """Inverse cascade; returns the padded signal."""
    coeffs = [decomp.bands[b] for b in BAND_NAMES] + list(decomp.discarded_hf)
    return waverec(coeffs)
