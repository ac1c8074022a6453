import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from eegpref.core import BehavioralLabels, ChannelInfo, ChannelStatus, Epoch
from eegpref.errors import AssemblyError, DegenerateSignalError, ValidationError
from eegpref.features import (
    FeatureMatrix,
    band_entropy,
    band_power,
    channel_features,
    epoch_features,
    assemble_matrix,
    feature_names,
    normalized_entropy,
)
from eegpref.pipeline import clean_epochs
from eegpref.wavelet import BAND_NAMES, BandDecomposition, waverec

FS = 250.0
SIZES = {"delta": 32, "theta": 32, "alpha": 64, "beta": 128, "gamma": 256}


def _decomp(bands):
    full = {b: np.zeros(2) for b in BAND_NAMES}
    full.update({b: np.asarray(v, float) for b, v in bands.items()})
    return BandDecomposition(full, [], 10, FS, 5)


def signal_with_band_energies(energies, rng):
    """Build a length-1024 signal whose db8 band energies are exactly ``energies``."""
    coeffs = []
    for b in BAND_NAMES:
        c = rng.standard_normal(SIZES[b])
        coeffs.append(c * np.sqrt(energies[b] / (c @ c)))
    coeffs.append(np.zeros(512))
    return waverec(coeffs)


def _epoch(samples, trial=1, rating=4, sid="s01", channels=()):
    return Epoch(sid, trial, samples, FS, BehavioralLabels(rating, 3, 3, 3), channels)


def entropy_oracle(c):
    p = np.asarray(c, float) ** 2
    p = p[p > 0] / p.sum()
    return -sum(pi * np.log(pi) for pi in p) / np.log(len(c))


class TestBandPower:
    def test_single_band(self):
        assert band_power(_decomp({"alpha": [2, 0]}), "alpha") == 1.0

    def test_equal_energies(self):
        dec = _decomp({b: [1, 0] for b in BAND_NAMES})
        assert [band_power(dec, b) for b in BAND_NAMES] == [0.2] * 5

    def test_relative_sums_to_one(self, rng):
        dec = channel_features(rng.standard_normal(1500), FS)
        assert abs(dec[:5].sum() - 1) < 1e-12

    def test_log_absolute(self):
        dec = _decomp({"beta": [3, 4]})
        assert band_power(dec, "beta", "log_absolute") == pytest.approx(np.log10(25 + 1e-12), abs=1e-15)
        assert band_power(dec, "delta", "log_absolute") == pytest.approx(-12.0)

    def test_degenerate(self):
        with pytest.raises(DegenerateSignalError):
            band_power(_decomp({}), "alpha")

    def test_unknown_band(self):
        with pytest.raises(ValidationError):
            band_power(_decomp({}), "mu")


class TestEntropy:
    def test_uniform(self):
        assert band_entropy(_decomp({"theta": [1, 1, 1, 1]}), "theta") == pytest.approx(1.0, abs=1e-15)

    def test_single_atom(self):
        assert band_entropy(_decomp({"theta": [5, 0, 0, 0]}), "theta") == 0.0

    def test_formula_oracle(self):
        value = band_entropy(_decomp({"gamma": [1, 2, 3, 4]}), "gamma")
        assert 0 < value < 1
        assert value == pytest.approx(entropy_oracle([1, 2, 3, 4]), abs=1e-15)

    def test_zero_energy(self):
        assert normalized_entropy([0.0, 0.0, 0.0]) == 0.0

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.float64, st.integers(2, 64), elements=st.floats(-1e3, 1e3)),
           st.floats(1e-3, 1e3), st.booleans())
    def test_bounds_and_scale_invariance(self, c, k, negate):
        k = -k if negate else k
        h = normalized_entropy(c)
        assert 0.0 <= h <= 1.0 + 1e-12
        if np.dot(c, c) > 1e-200:
            assert abs(normalized_entropy(k * c) - h) < 1e-12


class TestEpochFeatures:
    def test_single_channel_average(self, rng):
        x = rng.standard_normal(1000)
        fv = epoch_features(_epoch(x))
        np.testing.assert_array_equal(fv.values, channel_features(x, FS))
        assert fv.names == tuple(feature_names())

    def test_identical_channels(self, rng):
        x = rng.standard_normal(1000)
        avg = epoch_features(_epoch(np.stack([x, x])))
        per = epoch_features(_epoch(np.stack([x, x])), channel_policy="per_channel")
        np.testing.assert_allclose(avg.values, per[0].values, atol=1e-15)
        assert per[1].names[0] == "delta_power_ch1"

    def test_alpha_mean_of_two_channels(self, rng):
        base = {"delta": 1.0, "theta": 1.0, "beta": 1.0, "gamma": 1.0}
        # alpha / (alpha + 4) = 0.2 -> 1; = 0.4 -> 8/3
        a = signal_with_band_energies({**base, "alpha": 1.0}, rng)
        b = signal_with_band_energies({**base, "alpha": 8.0 / 3.0}, rng)
        per = epoch_features(_epoch(np.stack([a, b])), channel_policy="per_channel")
        assert per[0]["alpha_power_ch0"] == pytest.approx(0.2, abs=1e-12)
        assert per[1]["alpha_power_ch1"] == pytest.approx(0.4, abs=1e-12)
        assert abs(epoch_features(_epoch(np.stack([a, b])))["alpha_power"] - 0.3) < 1e-12

    def test_rejected_channels_skipped(self, rng):
        x = rng.standard_normal((2, 1000))
        chans = (ChannelInfo("a"), ChannelInfo("b", ChannelStatus.REJECTED))
        np.testing.assert_array_equal(epoch_features(_epoch(x, channels=chans)).values,
                                      channel_features(x[0], FS))

    def test_no_good_channels(self, rng):
        chans = (ChannelInfo("a", ChannelStatus.REJECTED),)
        with pytest.raises(ValidationError):
            epoch_features(_epoch(rng.standard_normal(500), channels=chans))

    @pytest.mark.parametrize("k", [-3.0, 1e-3, 250.0])
    def test_amplitude_scaling(self, rng, k):
        x = rng.standard_normal((3, 900))
        np.testing.assert_allclose(epoch_features(_epoch(k * x)).values,
                                   epoch_features(_epoch(x)).values, atol=1e-9)


class TestAssembly:
    def test_default_dataset_shape(self, default_matrix):
        assert default_matrix.X.shape == (216, 10)
        assert default_matrix.names == tuple(feature_names())
        assert np.all(np.isfinite(default_matrix.X))
        assert default_matrix.keys[0] == ("s01", 1) and default_matrix.keys[-1] == ("s18", 12)

    def test_labels_follow_ratings(self, default_matrix, default_dataset):
        ratings = {(s, t): lab.rating for s, t, lab in default_dataset.labels}
        assert [int(ratings[k] >= 4) for k in default_matrix.keys] == default_matrix.y.tolist()

    def test_empty(self):
        with pytest.raises(AssemblyError):
            assemble_matrix([])

    def test_one_rejected_upstream(self, default_dataset):
        rec = default_dataset.recordings[1]
        labels = [e for e in default_dataset.labels if e[0] == rec.subject_id]
        epochs, _ = clean_epochs([rec], labels)
        full = assemble_matrix(epochs)
        dropped = epochs[:4] + epochs[5:]
        part = assemble_matrix(dropped)
        assert part.n_rows == len(epochs) - 1
        assert (rec.subject_id, 5) not in part.keys
        keep = [i for i, key in enumerate(full.keys) if key != (rec.subject_id, 5)]
        np.testing.assert_array_equal(part.X, full.X[keep])
        np.testing.assert_array_equal(part.y, full.y[keep])

    def test_permutation_invariance(self, rng):
        epochs = [_epoch(rng.standard_normal((2, 500)), trial=t, rating=1 + t % 5, sid=s)
                  for s in ("s02", "s01") for t in range(1, 6)]
        a = assemble_matrix(epochs)
        order = rng.permutation(len(epochs))
        b = assemble_matrix([epochs[i] for i in order])
        assert a.keys == b.keys
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.y, b.y)

    def test_non_finite_names_epoch_and_feature(self):
        with pytest.raises(AssemblyError, match="non-finite feature"):
            assemble_matrix([_epoch(np.full((1, 200), np.nan))])

    def test_per_channel_layout(self, rng):
        epochs = [_epoch(rng.standard_normal((3, 500)), trial=t) for t in (1, 2)]
        m = assemble_matrix(epochs, channel_policy="per_channel")
        assert m.X.shape == (2, 30)
        assert m.names[10] == "delta_power_ch1"

    def test_csv_round_trip(self, default_matrix, tmp_path):
        path = tmp_path / "f.csv"
        default_matrix.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0].split(",") == list(feature_names()) + ["label"]
        assert len(lines) == 217 and all(len(line.split(",")) == 11 for line in lines)
        back = FeatureMatrix.from_csv(path)
        assert back.X.tobytes() == default_matrix.X.tobytes()
        np.testing.assert_array_equal(back.y, default_matrix.y)
