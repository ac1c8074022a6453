import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eegpref.errors import ConfigurationError, SignalLengthError
from eegpref.wavelet import (
    BAND_NAMES,
    band_edges,
    daubechies_lowpass,
    db8_filters,
    decompose_bands,
    dwt_step,
    idwt_step,
    n_levels,
    reconstruct,
    wavedec,
)

FS = 250.0
# first taps of the published db8 scaling filter (minimum-phase ordering)
PUBLISHED_DB8_HEAD = [0.0544158422, 0.3128715909, 0.6756307363, 0.5853546837]


def fft_band_fractions(x, fs):
    """Independent oracle: share of periodogram energy inside each dyadic band."""
    power = np.abs(np.fft.rfft(x)) ** 2
    freqs = np.fft.rfftfreq(len(x), 1 / fs)
    edges = band_edges(fs)
    total = power.sum()
    return {b: power[(freqs >= lo) & (freqs < hi)].sum() / total for b, (lo, hi) in edges.items()}


class TestFilters:
    def test_sums(self):
        h = db8_filters().lowpass
        assert len(h) == 16
        assert abs(h.sum() - np.sqrt(2)) < 1e-10
        assert abs(np.dot(h, h) - 1) < 1e-10

    @pytest.mark.parametrize("m", range(1, 8))
    def test_even_shift_orthogonality(self, m):
        h = db8_filters().lowpass
        assert abs(np.dot(h[: 16 - 2 * m], h[2 * m:])) < 1e-10

    def test_quadrature_mirror(self):
        f = db8_filters()
        k = np.arange(16)
        np.testing.assert_array_equal(f.highpass, (-1.0) ** k * f.lowpass[15 - k])

    @pytest.mark.parametrize("m", range(8))
    def test_vanishing_moments(self, m):
        g = db8_filters().highpass
        k = np.arange(16, dtype=float)
        assert abs(np.sum(k ** m * g)) < 1e-6

    def test_matches_published_taps(self):
        np.testing.assert_allclose(db8_filters().lowpass[:4], PUBLISHED_DB8_HEAD, atol=1e-9)

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_factorization_matches_closed_forms(self, n):
        known = {1: [1, 1], 2: [1 + np.sqrt(3), 3 + np.sqrt(3), 3 - np.sqrt(3), 1 - np.sqrt(3)]}
        h = daubechies_lowpass(n)
        if n in known:
            ref = np.array(known[n], dtype=float)
            ref *= np.sqrt(2) / ref.sum()
            np.testing.assert_allclose(h, ref, atol=1e-12)
        assert abs(h.sum() - np.sqrt(2)) < 1e-10


class TestSteps:
    def test_constant_signal(self):
        a, d = dwt_step(np.full(32, 3.0))
        assert np.max(np.abs(d)) < 1e-10
        np.testing.assert_allclose(a, 3.0 * np.sqrt(2), atol=1e-10)

    def test_energy_conservation(self, rng):
        x = rng.standard_normal(256)
        a, d = dwt_step(x)
        assert len(a) == len(d) == 128
        assert abs((a @ a + d @ d) / (x @ x) - 1) < 1e-9

    def test_round_trip(self, rng):
        x = rng.standard_normal(512)
        np.testing.assert_allclose(idwt_step(*dwt_step(x)), x, atol=1e-9)

    def test_zero_inputs(self):
        assert not np.any(idwt_step(np.zeros(8), np.zeros(8)))

    def test_impulse_synthesis(self):
        approx = np.zeros(16)
        approx[0] = 1.0
        y = idwt_step(approx, np.zeros(16))
        assert abs(y @ y - 1.0) < 1e-12
        np.testing.assert_allclose(y[:16], db8_filters().lowpass, atol=1e-15)

    def test_odd_length(self):
        with pytest.raises(SignalLengthError):
            dwt_step(np.zeros(31))

    def test_length_mismatch(self):
        with pytest.raises(SignalLengthError):
            idwt_step(np.zeros(8), np.zeros(4))

    @given(st.integers(1, 64), st.integers(0, 2**31 - 1))
    @settings(max_examples=50, deadline=None)
    def test_round_trip_property(self, half, seed):
        x = np.random.default_rng(seed).standard_normal(2 * half)
        a, d = dwt_step(x)
        np.testing.assert_allclose(idwt_step(a, d), x, atol=1e-9)
        assert abs(a @ a + d @ d - x @ x) <= 1e-9 * max(x @ x, 1e-300)


class TestDecomposition:
    def test_levels_and_edges(self):
        assert n_levels(250) == 5
        edges = band_edges(250)
        expected = {"delta": (0, 3.90625), "theta": (3.90625, 7.8125), "alpha": (7.8125, 15.625),
                    "beta": (15.625, 31.25), "gamma": (31.25, 62.5)}
        for band, (lo, hi) in expected.items():
            assert edges[band] == pytest.approx((lo, hi))

    def test_level_rule_generalizes(self):
        for fs in (128, 200, 256, 500, 1000, 2048):
            L = n_levels(fs)
            assert fs / 2 ** (L + 1) <= 4 < fs / 2 ** L
            assert band_edges(fs)["delta"] == (0.0, fs / 2 ** (L + 1))

    def test_fs_too_low(self):
        with pytest.raises(ConfigurationError):
            decompose_bands(np.zeros(256), 100.0)

    def test_short_signal(self):
        with pytest.raises(SignalLengthError):
            decompose_bands(np.zeros(63), FS)

    def test_structure(self, rng):
        dec = decompose_bands(rng.standard_normal(1000), FS)
        assert set(dec.bands) == set(BAND_NAMES)
        assert dec.original_length == 1000
        # padded to 1024 = 32 * 32
        assert [len(dec.bands[b]) for b in BAND_NAMES] == [32, 32, 64, 128, 256]
        assert [len(d) for d in dec.discarded_hf] == [512]

    @pytest.mark.parametrize("freq,band", [(2, "delta"), (5, "theta"), (10, "alpha"), (20, "beta"), (45, "gamma")])
    def test_tone_localization_against_fft_oracle(self, freq, band):
        x = np.sin(2 * np.pi * freq * np.arange(2048) / FS)
        dec = decompose_bands(x, FS)
        share = dec.energy(band) / dec.total_energy
        fft_share = fft_band_fractions(x, FS)
        assert share >= 0.80
        assert max(fft_share, key=fft_share.get) == band
        assert fft_share[band] >= 0.80

    def test_white_noise_partition(self, rng):
        x = rng.standard_normal(3000)
        dec = decompose_bands(x, FS)
        assert all(dec.energy(b) > 0 for b in BAND_NAMES)
        assert abs(dec.total_energy / (x @ x) - 1) < 1e-9

    def test_perfect_reconstruction(self, rng):
        x = rng.standard_normal(777)
        rec = reconstruct(decompose_bands(x, FS))
        np.testing.assert_allclose(rec[:777], x, atol=1e-8)
        assert np.max(np.abs(rec[777:])) < 1e-8

    def test_shift_property(self, rng):
        L = 5
        x = rng.standard_normal(2 ** L * 16)
        a = wavedec(x, L)[0]
        a_shift = wavedec(np.roll(x, 2 ** L), L)[0]
        np.testing.assert_allclose(a_shift, np.roll(a, 1), atol=1e-10)

    def test_deterministic_and_channel_independent(self, rng):
        sig = rng.standard_normal((3, 500))
        forward = [decompose_bands(s, FS) for s in sig]
        backward = [decompose_bands(s, FS) for s in sig[::-1]][::-1]
        for d1, d2 in zip(forward, backward):
            for b in BAND_NAMES:
                assert d1.bands[b].tobytes() == d2.bands[b].tobytes()
