"""Seeded synthetic EEG with a class-dependent beta effect.

Each trial's channel signal is a sum of band-limited noise components
(one per EEG band, white noise masked to the band's nominal range in
the frequency domain) plus 1/f noise. Amplitudes are peak amplitudes of
the equivalent sinusoid, so each component has RMS ``a / sqrt(2)``.

"Like" trials (latent class 1) have their beta component scaled by
``1 + beta_effect``. Ratings are drawn from {4, 5} for class 1 and
{1, 2, 3} for class 0, so a binary threshold of 4 recovers the class.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .core import BehavioralLabels, ChannelInfo, LabelEntry, Recording
from .errors import ConfigurationError
from .wavelet import BAND_NAMES, NOMINAL_BANDS_HZ

TEN_TWENTY = ("Fp1", "Fp2", "F7", "F3", "Fz", "F4", "F8", "T7", "C3", "Cz",
              "C4", "T8", "P7", "P3", "Pz", "P4", "P8", "O1", "O2")

DEFAULT_BAND_AMPLITUDES = {"delta": 20.0, "theta": 10.0, "alpha": 15.0, "beta": 8.0, "gamma": 4.0}

BLINK_PEAK_UV = 200.0
BLINK_SIGMA_S = 0.05
# without 10-20 names the transient goes on the first two channels
BLINK_FALLBACK_CHANNELS = 2


@dataclass(frozen=True)
class SynthConfig:
    n_subjects: int = 18
    n_trials: int = 12
    fs_hz: float = 250.0
    n_channels: int = 8
    epoch_seconds: float = 30.0
    band_amplitudes: Dict[str, float] = field(default_factory=lambda: dict(DEFAULT_BAND_AMPLITUDES))
    pink_noise_uV: float = 10.0
    beta_effect: float = 0.5
    artifact_rate: float = 0.0
    seed: int = 42

    def __post_init__(self):
        amps = {**DEFAULT_BAND_AMPLITUDES, **dict(self.band_amplitudes)}
        object.__setattr__(self, "band_amplitudes", amps)
        if set(amps) != set(BAND_NAMES):
            raise ConfigurationError(f"band_amplitudes keys must be {BAND_NAMES}, got {sorted(amps)}")
        if any(a < 0 for a in amps.values()) or self.pink_noise_uV < 0:
            raise ConfigurationError("amplitudes must be >= 0")
        if self.beta_effect < 0:
            raise ConfigurationError(f"beta_effect must be >= 0, got {self.beta_effect}")
        if not 0 <= self.artifact_rate <= 1:
            raise ConfigurationError(f"artifact_rate must be in [0, 1], got {self.artifact_rate}")
        if self.n_subjects < 1 or self.n_trials < 1:
            raise ConfigurationError("n_subjects and n_trials must be >= 1")
        if not 1 <= self.n_channels <= 128:
            raise ConfigurationError(f"n_channels must be in 1..128, got {self.n_channels}")
        if self.fs_hz <= 0:
            raise ConfigurationError(f"fs_hz must be > 0, got {self.fs_hz}")
        if self.epoch_seconds * self.fs_hz < 64:
            raise ConfigurationError("epoch_seconds * fs_hz must be >= 64 samples")
        top = max(hi for _, hi in NOMINAL_BANDS_HZ.values())
        if self.fs_hz / 2 <= top:
            raise ConfigurationError(f"fs_hz must exceed {2 * top} Hz to hold every band")

    @property
    def epoch_samples(self) -> int:
        return int(round(self.epoch_seconds * self.fs_hz))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(eq=False)
class SynthDataset:
    recordings: List[Recording]
    labels: List[LabelEntry]
    artifacts: List[Tuple[str, int]]
    latent_class: Dict[Tuple[str, int], int]


def channel_names(n: int) -> List[str]:
    if n <= len(TEN_TWENTY):
        return list(TEN_TWENTY[:n])
    return [f"E{i + 1:03d}" for i in range(n)]


def blink_channels(names: List[str]) -> List[int]:
    """Frontal sites (Fp*, F*) carry the blink transient."""
    frontal = [i for i, n in enumerate(names) if n.startswith("F")]
    return frontal or list(range(min(BLINK_FALLBACK_CHANNELS, len(names))))


def subject_id(index: int) -> str:
    return f"s{index + 1:02d}"


def _unit_rms(x: np.ndarray) -> np.ndarray:
    rms = np.sqrt(np.mean(x * x, axis=-1, keepdims=True))
    return x / np.where(rms > 0, rms, 1.0)


def band_noise(rng: np.random.Generator, shape, fs_hz: float, lo: float, hi: float) -> np.ndarray:
    """Unit-RMS white noise restricted to ``[lo, hi]`` Hz (DC excluded)."""
    n = shape[-1]
    spec = np.fft.rfft(rng.standard_normal(shape), axis=-1)
    freqs = np.fft.rfftfreq(n, 1.0 / fs_hz)
    spec[..., ~((freqs >= lo) & (freqs <= hi) & (freqs > 0))] = 0.0
    return _unit_rms(np.fft.irfft(spec, n=n, axis=-1))


def pink_noise(rng: np.random.Generator, shape, fs_hz: float) -> np.ndarray:
    """Unit-RMS 1/f noise (power spectrum ~ 1/f, DC removed)."""
    n = shape[-1]
    spec = np.fft.rfft(rng.standard_normal(shape), axis=-1)
    freqs = np.fft.rfftfreq(n, 1.0 / fs_hz)
    scale = np.zeros_like(freqs)
    scale[1:] = 1.0 / np.sqrt(freqs[1:])
    return _unit_rms(np.fft.irfft(spec * scale, n=n, axis=-1))


def blink(n: int, fs_hz: float, center: float) -> np.ndarray:
    t = np.arange(n) / fs_hz
    return BLINK_PEAK_UV * np.exp(-0.5 * ((t - center) / BLINK_SIGMA_S) ** 2)


def _subject(config: SynthConfig, index: int):
    rng = np.random.default_rng([config.seed, index])
    sid = subject_id(index)
    n_tr, n_ch, n = config.n_trials, config.n_channels, config.epoch_samples

    n_like = n_tr // 2 + (int(rng.integers(2)) if n_tr % 2 else 0)
    classes = rng.permutation(np.array([1] * n_like + [0] * (n_tr - n_like)))
    ratings = np.where(classes == 1, rng.integers(4, 6, size=n_tr), rng.integers(1, 4, size=n_tr))
    others = rng.integers(1, 6, size=(n_tr, 3))
    order = np.lexsort((rng.random(n_tr), -ratings))
    ranks = np.empty(n_tr, dtype=int)
    ranks[order] = np.arange(1, n_tr + 1)

    shape = (n_tr, n_ch, n)
    signal = np.zeros(shape)
    for band in BAND_NAMES:
        lo, hi = NOMINAL_BANDS_HZ[band]
        amp = np.full(n_tr, config.band_amplitudes[band] / np.sqrt(2))
        if band == "beta":
            amp = amp * np.where(classes == 1, 1.0 + config.beta_effect, 1.0)
        signal += amp[:, None, None] * band_noise(rng, shape, config.fs_hz, lo, hi)
    signal += config.pink_noise_uV / np.sqrt(2) * pink_noise(rng, shape, config.fs_hz)

    # drawn for every trial so the background does not depend on artifact_rate
    planted_draw = rng.random(n_tr)
    margin = min(2.0, config.epoch_seconds / 4)
    centers = rng.uniform(margin, config.epoch_seconds - margin, size=n_tr)
    names = channel_names(n_ch)
    frontal = blink_channels(names)
    artifacts = []
    for t in range(n_tr):
        if planted_draw[t] < config.artifact_rate:
            signal[t, frontal] += blink(n, config.fs_hz, centers[t])
            artifacts.append((sid, t + 1))

    samples = signal.transpose(1, 0, 2).reshape(n_ch, n_tr * n)
    rec = Recording(sid, config.fs_hz, tuple(ChannelInfo(c) for c in names), samples)
    labels = [
        (sid, t + 1, BehavioralLabels(int(ratings[t]), int(others[t, 0]), int(others[t, 1]),
                                      int(others[t, 2]), int(ranks[t])))
        for t in range(n_tr)
    ]
    latent = {(sid, t + 1): int(classes[t]) for t in range(n_tr)}
    return rec, labels, artifacts, latent


def generate(config: SynthConfig) -> SynthDataset:
    """Build every subject; subject ``i`` draws from ``SeedSequence([seed, i])``."""
    recordings, labels, artifacts, latent = [], [], [], {}
    for i in range(config.n_subjects):
        rec, lab, art, lat = _subject(config, i)
        recordings.append(rec)
        labels.extend(lab)
        artifacts.extend(art)
        latent.update(lat)
    return SynthDataset(recordings, labels, artifacts, latent)
