"""Band power / wavelet entropy features and feature-matrix assembly."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core import Epoch, LabelScheme, make_class_label
from .errors import AssemblyError, DegenerateSignalError, ValidationError
from .wavelet import BAND_NAMES, BandDecomposition, decompose_bands

LOG_EPS = 1e-12


class PowerMode(str, Enum):
    RELATIVE = "relative"
    LOG_ABSOLUTE = "log_absolute"


class ChannelPolicy(str, Enum):
    AVERAGE = "average"
    PER_CHANNEL = "per_channel"


def feature_names(suffix: str = "") -> List[str]:
    names = [f"{b}_power" for b in BAND_NAMES] + [f"{b}_entropy" for b in BAND_NAMES]
    return [f"{n}_{suffix}" for n in names] if suffix else names


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    names: Tuple[str, ...]
    epoch_key: Tuple[str, int]

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "names", tuple(self.names))
        if len(self.values) != len(self.names):
            raise ValidationError(f"{len(self.values)} values for {len(self.names)} names")
        if len(set(self.names)) != len(self.names):
            raise ValidationError("feature names must be unique")

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Rows are epochs in (subject, trial) order, columns are named features."""

    X: np.ndarray
    y: np.ndarray
    names: Tuple[str, ...]
    keys: Tuple[Tuple[str, int], ...]
    scheme: LabelScheme = LabelScheme.BINARY

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2:
            raise ValidationError(f"feature matrix must be 2-D, got shape {X.shape}")
        if X.shape[0] != y.shape[0] or X.shape[0] != len(self.keys):
            raise ValidationError(f"{X.shape[0]} rows, {y.shape[0]} labels, {len(self.keys)} keys")
        if X.shape[1] != len(self.names):
            raise ValidationError(f"{X.shape[1]} columns for {len(self.names)} names")
        if not np.all(np.isfinite(X)):
            raise AssemblyError("feature matrix contains non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "keys", tuple(tuple(k) for k in self.keys))
        object.__setattr__(self, "scheme", LabelScheme(self.scheme))

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    def subset(self, rows: Sequence[int]) -> "FeatureMatrix":
        rows = np.asarray(rows, dtype=int)
        return FeatureMatrix(self.X[rows], self.y[rows], self.names,
                             [self.keys[i] for i in rows], self.scheme)

    def with_labels(self, y) -> "FeatureMatrix":
        return FeatureMatrix(self.X, y, self.names, self.keys, self.scheme)

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(list(self.names) + ["label"])
            for row, label in zip(self.X, self.y):
                w.writerow([repr(float(v)) for v in row] + [int(label)])

    @classmethod
    def from_csv(cls, path: str | Path, scheme: LabelScheme | str = LabelScheme.BINARY) -> "FeatureMatrix":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][-1] != "label":
            raise AssemblyError(f"{path}: last column must be 'label'")
        names = rows[0][:-1]
        body = [r for r in rows[1:] if r]
        X = np.array([[float(v) for v in r[:-1]] for r in body]).reshape(len(body), len(names))
        y = np.array([int(r[-1]) for r in body], dtype=np.int64)
        keys = [("row", i + 1) for i in range(len(body))]
        return cls(X, y, names, keys, scheme)


# --------------------------------------------------------------------------
# Per-band features
# --------------------------------------------------------------------------

def band_power(decomp: BandDecomposition, band: str, mode: PowerMode | str = PowerMode.RELATIVE) -> float:
    mode = PowerMode(mode)
    if band not in decomp.bands:
        raise ValidationError(f"unknown band {band!r}")
    e_band = decomp.energy(band)
    if mode is PowerMode.LOG_ABSOLUTE:
        return float(np.log10(e_band + LOG_EPS))
    total = sum(decomp.energy(b) for b in BAND_NAMES)
    if total == 0:
        raise DegenerateSignalError("all five bands have zero energy; relative power undefined")
    return e_band / total


def normalized_entropy(coeffs) -> float:
    """Shannon entropy of ``c^2 / sum(c^2)`` divided by ``ln(N)``."""
    c = np.asarray(coeffs, dtype=np.float64)
    if c.size < 2:
        raise ValidationError("entropy needs at least two coefficients")
    peak = np.max(np.abs(c))
    if peak == 0:
        return 0.0
    # rescale first so c^2 cannot overflow or underflow
    sq = (c / peak) ** 2
    p = sq / sq.sum()
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)) / np.log(c.size))


def band_entropy(decomp: BandDecomposition, band: str) -> float:
    if band not in decomp.bands:
        raise ValidationError(f"unknown band {band!r}")
    return normalized_entropy(decomp.bands[band])


def channel_features(signal, fs_hz: float, power_mode: PowerMode | str = PowerMode.RELATIVE) -> np.ndarray:
    decomp = decompose_bands(signal, fs_hz)
    powers = [band_power(decomp, b, power_mode) for b in BAND_NAMES]
    entropies = [band_entropy(decomp, b) for b in BAND_NAMES]
    return np.array(powers + entropies)


def epoch_features(epoch: Epoch, fs_hz: Optional[float] = None,
                   channel_policy: ChannelPolicy | str = ChannelPolicy.AVERAGE,
                   power_mode: PowerMode | str = PowerMode.RELATIVE):
    """Features of one epoch over its good channels.

    ``average`` returns one FeatureVector (per-feature mean over good
    channels); ``per_channel`` returns a list, one vector per good
    channel, with the channel name appended to each feature name.
    """
    fs_hz = epoch.fs_hz if fs_hz is None else fs_hz
    policy = ChannelPolicy(channel_policy)
    good = [i for i, c in enumerate(epoch.channels) if c.is_good]
    if not good:
        raise ValidationError(f"epoch {epoch.key} has no good channels")
    per = np.array([channel_features(epoch.samples[i], fs_hz, power_mode) for i in good])
    if policy is ChannelPolicy.AVERAGE:
        return FeatureVector(per.mean(axis=0), feature_names(), epoch.key)
    return [
        FeatureVector(per[j], feature_names(epoch.channels[i].name), epoch.key)
        for j, i in enumerate(good)
    ]


def assemble_matrix(epochs: Sequence[Epoch], scheme: LabelScheme | str = LabelScheme.BINARY,
                    threshold: int = 4, channel_policy: ChannelPolicy | str = ChannelPolicy.AVERAGE,
                    power_mode: PowerMode | str = PowerMode.RELATIVE) -> FeatureMatrix:
    """One row per epoch, sorted by (subject, trial).

    Under ``per_channel`` the per-channel vectors of an epoch are
    concatenated into a single wide row, so every epoch must expose the
    same good channels.
    """
    if not epochs:
        raise AssemblyError("cannot assemble a feature matrix from an empty epoch list")
    scheme = LabelScheme(scheme)
    policy = ChannelPolicy(channel_policy)
    ordered = sorted(epochs, key=lambda e: (e.subject_id, e.trial_index))
    rows, labels, keys, names = [], [], [], None
    for ep in ordered:
        fv = epoch_features(ep, ep.fs_hz, policy, power_mode)
        if policy is ChannelPolicy.PER_CHANNEL:
            fv = FeatureVector(np.concatenate([v.values for v in fv]),
                               sum((v.names for v in fv), ()), ep.key)
        if names is None:
            names = fv.names
        elif fv.names != names:
            raise AssemblyError(f"epoch {ep.key}: feature layout differs from earlier epochs")
        bad = ~np.isfinite(fv.values)
        if bad.any():
            raise AssemblyError(f"epoch {ep.key}: non-finite feature {fv.names[int(np.argmax(bad))]}")
        rows.append(fv.values)
        labels.append(make_class_label(ep.labels, scheme, threshold).value)
        keys.append(ep.key)
    return FeatureMatrix(np.vstack(rows), labels, names, keys, scheme)
