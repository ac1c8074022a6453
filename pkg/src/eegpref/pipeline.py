"""Recording -> cleaned epochs -> feature matrix."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from .core import Epoch, LabelEntry, LabelScheme, Recording, epochs_from_recording
from .errors import StageError
from .features import ChannelPolicy, FeatureMatrix, PowerMode, assemble_matrix
from .preprocess import (
    FilterSpec,
    RejectionReport,
    common_average_reference,
    design_butterworth,
    design_notch,
    detect_bad_channels,
    filter_epoch,
    mark_rejected,
    reject_epochs,
)


@dataclass(frozen=True)
class PreprocessConfig:
    filter: FilterSpec = field(default_factory=FilterSpec)
    notch_50hz: bool = False
    flat_fraction: float = 0.5
    var_lo: float = 0.1
    var_hi: float = 10.0
    peak_uV: float = 150.0
    reference: bool = True


def clean_epochs(recordings: Sequence[Recording], labels: Sequence[LabelEntry],
                 config: PreprocessConfig = PreprocessConfig()) -> Tuple[List[Epoch], RejectionReport]:
    """Screen channels, filter, reject by amplitude, then re-reference.

    Rejection runs before re-referencing: a frontal blink spread by the
    average reference would otherwise be diluted below threshold.
    """
    report = RejectionReport()
    filtered: List[Epoch] = []
    for rec in recordings:
        try:
            if rec.n_channels >= 2:
                ch_report = detect_bad_channels(rec, config.flat_fraction, config.var_lo, config.var_hi)
                report = report.merge(RejectionReport(
                    [(f"{rec.subject_id}:{n}", r, v) for n, r, v in ch_report.rejected_channels]
                ))
                rec = mark_rejected(rec, ch_report)
        except Exception as exc:
            raise StageError("channel-screening", exc) from exc
        try:
            coeffs = [design_butterworth(config.filter, rec.fs_hz)]
            if config.notch_50hz:
                coeffs.append(design_notch(rec.fs_hz, 50.0))
            filtered.extend(filter_epoch(ep, coeffs) for ep in epochs_from_recording(rec, labels))
        except Exception as exc:
            raise StageError("filtering", exc) from exc
    kept, ep_report = reject_epochs(filtered, config.peak_uV)
    report = report.merge(ep_report)
    if config.reference:
        try:
            kept = [common_average_reference(ep) if ep.good_mask.sum() >= 2 else ep for ep in kept]
        except Exception as exc:
            raise StageError("re-reference", exc) from exc
    return kept, report


def extract_features(recordings: Sequence[Recording], labels: Sequence[LabelEntry],
                     preprocess: PreprocessConfig = PreprocessConfig(),
                     scheme: LabelScheme | str = LabelScheme.BINARY, threshold: int = 4,
                     channel_policy: ChannelPolicy | str = ChannelPolicy.AVERAGE,
                     power_mode: PowerMode | str = PowerMode.RELATIVE) -> Tuple[FeatureMatrix, RejectionReport]:
    epochs, report = clean_epochs(recordings, labels, preprocess)
    try:
        matrix = assemble_matrix(epochs, scheme, threshold, channel_policy, power_mode)
    except Exception as exc:
        raise StageError("features", exc) from exc
    return matrix, report
