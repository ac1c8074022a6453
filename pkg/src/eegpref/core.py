"""Domain types, on-disk formats and dataset assembly.

Two file formats are handled here:

* EEGR recordings: one JSON header line followed by a little-endian
  float32 payload, channel-major.
* Labels CSV with one row per (subject, trial).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DuplicateKeyError,
    FormatError,
    PayloadLengthError,
    ValidationError,
)

EEGR_MAGIC = "EEGR"
EEGR_VERSION = 1
LABEL_COLUMNS = (
    "subject_id",
    "trial_index",
    "rating",
    "familiarity",
    "purchase_intent",
    "willingness_to_spend",
    "preference_rank",
)
LIKERT_FIELDS = ("rating", "familiarity", "purchase_intent", "willingness_to_spend")


class ChannelStatus(str, Enum):
    GOOD = "good"
    REJECTED = "rejected"


class LabelScheme(str, Enum):
    BINARY = "binary_like_dislike"
    MULTICLASS = "multiclass_rating"


@dataclass(frozen=True)
class ChannelInfo:
    name: str
    status: ChannelStatus = ChannelStatus.GOOD

    def __post_init__(self):
        if not self.name:
            raise ValidationError("channel name must be nonempty")
        object.__setattr__(self, "status", ChannelStatus(self.status))

    @property
    def is_good(self) -> bool:
        return self.status is ChannelStatus.GOOD


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Recording:
    """Continuous multi-channel EEG for one subject.

    ``samples`` is stored as float32 (the on-disk precision) so that a
    write/load round trip is bit-exact.
    """

    subject_id: str
    fs_hz: float
    channels: Tuple[ChannelInfo, ...]
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        samples = np.array(self.samples, dtype=np.float32, copy=True)
        if not self.fs_hz > 0:
            raise ValidationError(f"fs_hz must be > 0, got {self.fs_hz}")
        if samples.ndim != 2:
            raise ValidationError(f"samples must be 2-D (channels x samples), got {samples.ndim}-D")
        if len(self.channels) < 1 or samples.shape[0] < 1:
            raise ValidationError("a Recording needs n_channels >= 1")
        if samples.shape[0] != len(self.channels):
            raise ValidationError(
                f"{len(self.channels)} channel descriptors for {samples.shape[0]} sample rows"
            )
        names = [c.name for c in self.channels]
        if len(set(names)) != len(names):
            raise ValidationError(f"channel names must be unique: {names}")
        object.__setattr__(self, "samples", _readonly(samples))

    @property
    def n_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def channel_names(self) -> List[str]:
        return [c.name for c in self.channels]

    def __eq__(self, other):
        if not isinstance(other, Recording):
            return NotImplemented
        return (
            self.subject_id == other.subject_id
            and self.fs_hz == other.fs_hz
            and self.channels == other.channels
            and self.samples.shape == other.samples.shape
            and self.samples.tobytes() == other.samples.tobytes()
        )


@dataclass(frozen=True)
class BehavioralLabels:
    rating: int
    familiarity: int
    purchase_intent: int
    willingness_to_spend: int
    preference_rank: Optional[int] = None

    def __post_init__(self):
        for name in LIKERT_FIELDS:
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 1 <= v <= 5:
                raise ValidationError(f"{name} must be an integer in 1..5, got {v!r}")
        if self.preference_rank is not None and self.preference_rank < 1:
            raise ValidationError(f"preference_rank must be >= 1, got {self.preference_rank}")


@dataclass(frozen=True, eq=False)
class Epoch:
    """One trial window. ``channels`` carries good/rejected status."""

    subject_id: str
    trial_index: int
    samples: np.ndarray
    fs_hz: float
    labels: BehavioralLabels
    channels: Tuple[ChannelInfo, ...] = ()

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64, copy=True)
        if samples.ndim == 1:
            samples = samples[None, :]
        if self.trial_index < 1:
            raise ValidationError(f"trial_index must be >= 1, got {self.trial_index}")
        if samples.size == 0:
            raise ValidationError("epoch sample array is empty")
        if not self.fs_hz > 0:
            raise ValidationError(f"fs_hz must be > 0, got {self.fs_hz}")
        channels = tuple(self.channels) or tuple(
            ChannelInfo(f"ch{i}") for i in range(samples.shape[0])
        )
        if len(channels) != samples.shape[0]:
            raise ValidationError(
                f"{len(channels)} channel descriptors for {samples.shape[0]} sample rows"
            )
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "samples", _readonly(samples))

    @property
    def key(self) -> Tuple[str, int]:
        return (self.subject_id, self.trial_index)

    @property
    def good_mask(self) -> np.ndarray:
        return np.array([c.is_good for c in self.channels], dtype=bool)

    def with_samples(self, samples: np.ndarray) -> "Epoch":
        return replace(self, samples=samples)


@dataclass(frozen=True)
class ClassLabel:
    value: int
    scheme: LabelScheme

    def __post_init__(self):
        object.__setattr__(self, "scheme", LabelScheme(self.scheme))
        allowed = range(2) if self.scheme is LabelScheme.BINARY else range(5)
        if self.value not in allowed:
            raise ValidationError(f"class value {self.value} invalid for scheme {self.scheme.value}")


def make_class_label(labels: BehavioralLabels, scheme: LabelScheme | str = LabelScheme.BINARY,
                     threshold: int = 4) -> ClassLabel:
    """Map a likert rating to a class: binary like/dislike or 5-way."""
    scheme = LabelScheme(scheme)
    if scheme is LabelScheme.BINARY:
        if not 2 <= threshold <= 5:
            raise ValidationError(f"binary threshold must be in 2..5, got {threshold}")
        return ClassLabel(int(labels.rating >= threshold), scheme)
    return ClassLabel(labels.rating - 1, scheme)


# --------------------------------------------------------------------------
# EEGR container
# --------------------------------------------------------------------------

def write_recording(rec: Recording, path: str | Path) -> None:
    header = {
        "magic": EEGR_MAGIC,
        "version": EEGR_VERSION,
        "subject_id": rec.subject_id,
        "fs_hz": rec.fs_hz,
        "n_channels": rec.n_channels,
        "n_samples": rec.n_samples,
        "channel_names": rec.channel_names,
    }
    payload = np.ascontiguousarray(rec.samples, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=False).encode("utf-8") + b"\n")
        fh.write(payload)


def _header_field(header: dict, name: str, kind):
    if name not in header:
        raise FormatError(f"EEGR header missing field '{name}'", field=name)
    value = header[name]
    if kind is float:
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
    elif kind is int:
        ok = isinstance(value, int) and not isinstance(value, bool)
    else:
        ok = isinstance(value, kind)
    if not ok:
        raise FormatError(f"EEGR header field '{name}' has wrong type: {value!r}", field=name)
    return value


def load_recording(path: str | Path) -> Recording:
    raw = Path(path).read_bytes()
    nl = raw.find(b"\n")
    if nl < 0:
        raise FormatError(f"{path}: no header line terminator", field="header")
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: header is not valid JSON ({exc})", field="header") from exc
    if not isinstance(header, dict):
        raise FormatError(f"{path}: header must be a JSON object", field="header")
    if header.get("magic") != EEGR_MAGIC:
        raise FormatError(f"{path}: bad magic {header.get('magic')!r}", field="magic")
    if header.get("version") != EEGR_VERSION:
        raise FormatError(f"{path}: unsupported version {header.get('version')!r}", field="version")
    subject_id = _header_field(header, "subject_id", str)
    fs_hz = float(_header_field(header, "fs_hz", float))
    n_channels = _header_field(header, "n_channels", int)
    n_samples = _header_field(header, "n_samples", int)
    names = _header_field(header, "channel_names", list)
    if n_channels < 0 or n_samples < 0:
        raise FormatError(f"{path}: negative dimensions", field="n_channels" if n_channels < 0 else "n_samples")
    if len(names) != n_channels or not all(isinstance(n, str) for n in names):
        raise FormatError(f"{path}: channel_names does not list {n_channels} strings", field="channel_names")
    if fs_hz <= 0:
        raise ValidationError(f"{path}: fs_hz must be > 0, got {fs_hz}")

    payload = raw[nl + 1:]
    expected = 4 * n_channels * n_samples
    if len(payload) != expected:
        raise PayloadLengthError(
            f"{path}: payload holds {len(payload)} bytes, header declares {expected}",
            field="n_samples",
        )
    samples = np.frombuffer(payload, dtype="<f4").reshape(n_channels, n_samples)
    return Recording(subject_id, fs_hz, tuple(ChannelInfo(n) for n in names), samples)


# --------------------------------------------------------------------------
# Labels CSV
# --------------------------------------------------------------------------

LabelEntry = Tuple[str, int, BehavioralLabels]


def _parse_int(text: str, name: str, row: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValidationError(f"row {row}: {name} is not an integer: {text!r}") from None


def load_labels(path: str | Path) -> List[LabelEntry]:
    """Read the labels CSV; rows are numbered from 1 after the header."""
    entries: List[LabelEntry] = []
    seen = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != LABEL_COLUMNS:
            raise FormatError(f"{path}: header must be {','.join(LABEL_COLUMNS)}", field="header")
        for row_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(LABEL_COLUMNS):
                raise FormatError(f"{path}: row {row_no} has {len(row)} fields", field="row")
            subject = row[0].strip()
            trial = _parse_int(row[1], "trial_index", row_no)
            values = {n: _parse_int(row[i + 2], n, row_no) for i, n in enumerate(LIKERT_FIELDS)}
            for name, v in values.items():
                if not 1 <= v <= 5:
                    raise ValidationError(f"row {row_no}: {name} {v} outside 1..5")
            rank = _parse_int(row[6], "preference_rank", row_no) if row[6].strip() else None
            key = (subject, trial)
            if key in seen:
                raise DuplicateKeyError(f"row {row_no}: duplicate (subject, trial) key {key}")
            seen.add(key)
            try:
                labels = BehavioralLabels(preference_rank=rank, **values)
            except ValidationError as exc:
                raise ValidationError(f"row {row_no}: {exc}") from None
            entries.append((subject, trial, labels))
    _check_rank_blocks(entries)
    return entries


def _check_rank_blocks(entries: Iterable[LabelEntry]) -> None:
    by_subject: Dict[str, List[Optional[int]]] = {}
    for subject, _, labels in entries:
        by_subject.setdefault(subject, []).append(labels.preference_rank)
    for subject, ranks in by_subject.items():
        present = [r for r in ranks if r is not None]
        if not present:
            continue
        if len(present) != len(ranks) or sorted(present) != list(range(1, len(ranks) + 1)):
            raise ValidationError(
                f"subject {subject}: preference ranks must be a permutation of 1..{len(ranks)} or absent"
            )


def write_labels(entries: Sequence[LabelEntry], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LABEL_COLUMNS)
        for subject, trial, lab in entries:
            writer.writerow([
                subject, trial, lab.rating, lab.familiarity, lab.purchase_intent,
                lab.willingness_to_spend, "" if lab.preference_rank is None else lab.preference_rank,
            ])


# --------------------------------------------------------------------------
# Dataset assembly
# --------------------------------------------------------------------------

def epochs_from_recording(rec: Recording, entries: Sequence[LabelEntry]) -> List[Epoch]:
    """Cut a continuous recording into equal, consecutive trial windows.

    The recording holds its subject's trials back to back, so trial ``t``
    occupies samples ``[(t-1)*w, t*w)`` where ``w = n_samples / n_trials``.
    """
    mine = sorted((e for e in entries if e[0] == rec.subject_id), key=lambda e: e[1])
    if not mine:
        raise ValidationError(f"no labels for subject {rec.subject_id}")
    n_trials = max(t for _, t, _ in mine)
    if rec.n_samples % n_trials:
        raise ValidationError(
            f"subject {rec.subject_id}: {rec.n_samples} samples do not split into {n_trials} equal trials"
        )
    width = rec.n_samples // n_trials
    epochs = []
    for subject, trial, labels in mine:
        window = rec.samples[:, (trial - 1) * width: trial * width]
        epochs.append(Epoch(subject, trial, window, rec.fs_hz, labels, rec.channels))
    return epochs


def load_dataset(data_dir: str | Path, labels_path: str | Path | None = None) -> Tuple[List[Recording], List[LabelEntry]]:
    data_dir = Path(data_dir)
    labels_path = Path(labels_path) if labels_path else data_dir / "labels.csv"
    if not labels_path.exists():
        raise FileNotFoundError(f"labels file not found: {labels_path}")
    entries = load_labels(labels_path)
    recordings = [load_recording(p) for p in sorted(data_dir.glob("*.eegr"))]
    if not recordings:
        raise FileNotFoundError(f"no .eegr recordings in {data_dir}")
    return recordings, entries
