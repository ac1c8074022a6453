"""Filtering, channel screening, epoch rejection and re-referencing.

This is a small, fully testable replacement for an ASR-style cleaning
pipeline:

1. zero-phase Butterworth band-pass (default 0.5-60 Hz, order 4)
2. flat / extreme-variance channel screening
3. absolute-amplitude epoch rejection (default 150 uV)
4. common average reference over good channels
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import signal as sps

from .core import ChannelInfo, ChannelStatus, Epoch, Recording
from .errors import (
    FilterDesignError,
    NoUsableChannelsError,
    ReReferenceError,
    SignalLengthError,
    ValidationError,
)


class FilterKind(str, Enum):
    BANDPASS = "bandpass"
    HIGHPASS = "highpass"
    LOWPASS = "lowpass"


@dataclass(frozen=True)
class FilterSpec:
    kind: FilterKind = FilterKind.BANDPASS
    low_hz: float = 0.5
    high_hz: float = 60.0
    order: int = 4

    def __post_init__(self):
        object.__setattr__(self, "kind", FilterKind(self.kind))
        if self.low_hz < 0:
            raise ValidationError(f"low_hz must be >= 0, got {self.low_hz}")
        if not self.high_hz > self.low_hz:
            raise ValidationError(f"high_hz ({self.high_hz}) must exceed low_hz ({self.low_hz})")
        if self.order not in (2, 4, 6, 8):
            raise ValidationError(f"order must be one of 2, 4, 6, 8; got {self.order}")


@dataclass(frozen=True, eq=False)
class FilterCoefficients:
    """Second-order-section cascade plus the order it was designed with."""

    sos: np.ndarray
    order: int
    fs_hz: float

    @property
    def padlen(self) -> int:
        return 3 * self.order

    def response(self, freqs_hz) -> np.ndarray:
        _, h = sps.sosfreqz(self.sos, worN=np.atleast_1d(np.asarray(freqs_hz, float)), fs=self.fs_hz)
        return h


class RejectReason(str, Enum):
    FLAT = "flat"
    EXTREME_VARIANCE = "extreme_variance"


@dataclass
class RejectionReport:
    rejected_channels: List[Tuple[str, RejectReason, float]] = field(default_factory=list)
    rejected_epochs: List[Tuple[str, int, float]] = field(default_factory=list)

    def __bool__(self):
        return bool(self.rejected_channels or self.rejected_epochs)

    def merge(self, other: "RejectionReport") -> "RejectionReport":
        return RejectionReport(
            self.rejected_channels + other.rejected_channels,
            self.rejected_epochs + other.rejected_epochs,
        )

    def to_dict(self) -> dict:
        return {
            "rejected_channels": [
                {"name": n, "reason": RejectReason(r).value, "value": v}
                for n, r, v in self.rejected_channels
            ],
            "rejected_epochs": [
                {"subject_id": s, "trial_index": t, "value": v} for s, t, v in self.rejected_epochs
            ],
        }

    def write(self, path: str | Path, extra: Optional[dict] = None) -> None:
        payload = self.to_dict()
        if extra:
            payload.update(extra)
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# Filters
# --------------------------------------------------------------------------

def design_butterworth(spec: FilterSpec, fs_hz: float) -> FilterCoefficients:
    nyquist = fs_hz / 2.0
    if spec.kind is FilterKind.LOWPASS:
        edges, top = spec.high_hz, spec.high_hz
    elif spec.kind is FilterKind.HIGHPASS:
        edges, top = spec.low_hz, spec.low_hz
    else:
        edges, top = [spec.low_hz, spec.high_hz], spec.high_hz
    if top >= nyquist:
        raise FilterDesignError(f"cutoff {top} Hz is at or above Nyquist ({nyquist} Hz)")
    if spec.kind is not FilterKind.LOWPASS and spec.low_hz <= 0:
        raise FilterDesignError(f"{spec.kind.value} needs low_hz > 0")
    sos = sps.butter(spec.order, edges, btype=spec.kind.value, fs=fs_hz, output="sos")
    return FilterCoefficients(sos, spec.order, float(fs_hz))


def design_notch(fs_hz: float, freq_hz: float = 50.0, quality: float = 30.0) -> FilterCoefficients:
    if freq_hz >= fs_hz / 2:
        raise FilterDesignError(f"notch at {freq_hz} Hz is at or above Nyquist")
    b, a = sps.iirnotch(freq_hz, quality, fs=fs_hz)
    sos = sps.tf2sos(b, a)
    return FilterCoefficients(sos, 2, float(fs_hz))


def _forward_backward(x: np.ndarray, coeffs: FilterCoefficients) -> np.ndarray:
    pad = coeffs.padlen
    ext = np.concatenate([x[..., pad:0:-1], x, x[..., -2:-pad - 2:-1]], axis=-1)
    zi = sps.sosfilt_zi(coeffs.sos)
    zi_shape = (coeffs.sos.shape[0],) + (1,) * (x.ndim - 1) + (2,)
    zi = zi.reshape(zi_shape)
    y = sps.sosfilt(coeffs.sos, ext, axis=-1, zi=zi * ext[..., :1])[0]
    y = y[..., ::-1]
    y = sps.sosfilt(coeffs.sos, y, axis=-1, zi=zi * y[..., :1])[0]
    return y[..., ::-1][..., pad:-pad]


def filtfilt(signal, coeffs: FilterCoefficients) -> np.ndarray:
    """Zero-phase filtering along the last axis.

    Runs a forward-then-reverse pass on a reflect-padded copy (pad of
    ``3 * order`` samples), and averages it with the same operation applied
    to the time-reversed input. A single forward-backward pass is not
    exactly symmetric under time reversal near the edges; the average is.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.shape[-1] <= coeffs.padlen:
        raise SignalLengthError(
            f"signal length {x.shape[-1]} must exceed 3 x filter order ({coeffs.padlen})"
        )
    fb = _forward_backward(x, coeffs)
    bf = _forward_backward(x[..., ::-1], coeffs)[..., ::-1]
    return 0.5 * (fb + bf)


# --------------------------------------------------------------------------
# Channel screening / epoch rejection / re-referencing
# --------------------------------------------------------------------------

def detect_bad_channels(rec: Recording, flat_fraction: float = 0.5, var_lo: float = 0.1,
                        var_hi: float = 10.0) -> RejectionReport:
    """Flag flat channels and channels whose SD is far from the median SD.

    A channel can carry both reasons; each is reported separately.
    """
    if rec.n_channels < 2:
        raise ValidationError("detect_bad_channels needs at least two channels")
    x = rec.samples.astype(np.float64)
    if x.shape[1] > 1:
        same = np.mean(x[:, 1:] == x[:, :-1], axis=1)
    else:
        same = np.zeros(x.shape[0])
    sd = x.std(axis=1)
    median_sd = float(np.median(sd))
    report = RejectionReport()
    flagged = set()
    for i, name in enumerate(rec.channel_names):
        if same[i] > flat_fraction:
            report.rejected_channels.append((name, RejectReason.FLAT, float(same[i])))
            flagged.add(i)
        ratio = sd[i] / median_sd if median_sd > 0 else (np.inf if sd[i] > 0 else 0.0)
        if not var_lo <= ratio <= var_hi:
            report.rejected_channels.append((name, RejectReason.EXTREME_VARIANCE, float(ratio)))
            flagged.add(i)
    if len(flagged) == rec.n_channels:
        raise NoUsableChannelsError(f"subject {rec.subject_id}: no usable channels, all {rec.n_channels} flagged")
    return report


def mark_rejected(rec: Recording, report: RejectionReport) -> Recording:
    bad = {name for name, _, _ in report.rejected_channels}
    channels = tuple(
        ChannelInfo(c.name, ChannelStatus.REJECTED if c.name in bad else c.status) for c in rec.channels
    )
    return replace(rec, channels=channels)


def filter_epoch(epoch: Epoch, coeffs: Sequence[FilterCoefficients]) -> Epoch:
    x = epoch.samples
    for c in coeffs:
        x = filtfilt(x, c)
    return epoch.with_samples(x)


def reject_epochs(epochs: Sequence[Epoch], peak_uV: float = 150.0) -> Tuple[List[Epoch], RejectionReport]:
    """Drop any epoch whose good channels exceed ``peak_uV`` in magnitude."""
    kept: List[Epoch] = []
    report = RejectionReport()
    for ep in epochs:
        good = ep.samples[ep.good_mask]
        peak = float(np.max(np.abs(good))) if good.size else 0.0
        if peak > peak_uV:
            report.rejected_epochs.append((ep.subject_id, ep.trial_index, peak))
        else:
            kept.append(ep)
    return kept, report


def common_average_reference(epoch: Epoch) -> Epoch:
    good = epoch.good_mask
    if good.sum() < 2:
        raise ReReferenceError(
            f"epoch {epoch.key}: common average reference needs >= 2 good channels, has {int(good.sum())}"
        )
    x = epoch.samples.copy()
    x[good] -= x[good].mean(axis=0)
    return epoch.with_samples(x)
