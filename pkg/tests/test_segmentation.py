import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as npst
from scipy.signal import butter, freqz

from stopgo.segmentation import (
    Frame,
    MotionSignal,
    SegmentationError,
    SignalDiagnostics,
    StopTimings,
    detect_stops,
    frame_to_sample,
    load_motion_csv,
    lowpass,
    luminance_of,
    motion_signal,
    remove_outliers,
    rgb_to_luminance,
    run_signal_chain,
    save_diagnostics,
    slice_audio,
    slice_segments,
    spatial_smooth,
)

# --- independent references -----------------------------------------------------


def brute_force_smooth(plane: np.ndarray, window: int) -> np.ndarray:
    """Per-pixel truncated window mean, summed directly (no integral image)."""
    h, w = plane.shape
    big = plane.astype(np.int64)
    out = np.empty((h, w), dtype=np.float64)
    for i in range(h):
        r0 = max(0, i - (window - 1) // 2)
        r1 = min(h - 1, i + window // 2)
        for j in range(w):
            c0 = max(0, j - (window - 1) // 2)
            c1 = min(w - 1, j + window // 2)
            total = int(big[r0 : r1 + 1, c0 : c1 + 1].sum())
            out[i, j] = total / ((r1 - r0 + 1) * (c1 - c0 + 1))
    return out


def brute_force_motion(frames, window: int) -> np.ndarray:
    smoothed = [brute_force_smooth(f.plane, window) for f in frames]
    return np.array(
        [np.mean(np.abs(b - a)) for a, b in zip(smoothed, smoothed[1:])], dtype=np.float64
    )


def make_frames(planes, fps=30.0):
    return [Frame(plane=p, timestamp=i / fps) for i, p in enumerate(planes)]


# --- luminance -------------------------------------------------------------------


class TestLuminance:
    @pytest.mark.parametrize(
        "rgb,expected", [((255, 255, 255), 255), ((0, 0, 0), 0), ((255, 0, 0), 76)]
    )
    def test_reference_values(self, rgb, expected):
        assert luminance_of(*rgb) == expected

    def test_rejects_out_of_range(self):
        with pytest.raises(SegmentationError):
            luminance_of(256, 0, 0)

    @given(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255))
    def test_matches_weighted_sum(self, r, g, b):
        y = luminance_of(r, g, b)
        assert abs(y - (0.299 * r + 0.587 * g + 0.114 * b)) <= 0.5
        assert 0 <= y <= 255

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(0)
        image = rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
        plane = rgb_to_luminance(image)
        for i in range(5):
            for j in range(7):
                assert plane[i, j] == luminance_of(*image[i, j])


# --- spatial smoothing -------------------------------------------------------------


class TestSpatialSmooth:
    def test_constant_plane_unchanged(self):
        plane = np.full((60, 60), 77, dtype=np.uint8)
        assert np.array_equal(spatial_smooth(plane, 50), np.full((60, 60), 77.0))

    def test_window_one_is_identity(self):
        rng = np.random.default_rng(1)
        plane = rng.integers(0, 256, size=(8, 13), dtype=np.uint8)
        assert np.array_equal(spatial_smooth(plane, 1), plane.astype(np.float64))

    def test_single_bright_pixel_center_value(self):
        plane = np.zeros((100, 100), dtype=np.uint8)
        plane[50, 50] = 255
        smoothed = spatial_smooth(plane, 50)
        assert smoothed[50, 50] == 255 / 2500

    def test_window_larger_than_image_rejected(self):
        with pytest.raises(SegmentationError):
            spatial_smooth(np.zeros((10, 10), dtype=np.uint8), 11)

    @settings(max_examples=25, deadline=None)
    @given(
        npst.arrays(np.uint8, npst.array_shapes(min_dims=2, max_dims=2, min_side=2, max_side=24)),
        st.integers(1, 24),
        st.data(),
    )
    def test_exactly_matches_brute_force(self, plane, window, data):
        window = min(window, min(plane.shape))
        assert np.array_equal(spatial_smooth(plane, window), brute_force_smooth(plane, window))


# --- motion signal -----------------------------------------------------------------


class TestMotionSignal:
    def test_identical_frames_give_zero(self):
        plane = np.random.default_rng(2).integers(0, 256, size=(32, 32), dtype=np.uint8)
        signal = motion_signal(make_frames([plane, plane.copy(), plane.copy()]), window=5)
        assert np.array_equal(signal.values, np.zeros(2))

    def test_uniform_shift_measures_delta(self):
        rng = np.random.default_rng(3)
        base = rng.integers(0, 200, size=(20, 20), dtype=np.uint8)
        shifted = (base + 17).astype(np.uint8)
        signal = motion_signal(make_frames([base, shifted]), window=7)
        assert signal.values[0] == pytest.approx(17.0, abs=1e-9)

    def test_sample_rate_from_timestamps(self):
        plane = np.zeros((8, 8), dtype=np.uint8)
        frames = [Frame(plane=plane, timestamp=i / 25.0) for i in range(5)]
        assert motion_signal(frames, window=3).sample_rate == pytest.approx(25.0)

    def test_dimension_mismatch_rejected(self):
        a = np.zeros((8, 8), dtype=np.uint8)
        b = np.zeros((8, 9), dtype=np.uint8)
        with pytest.raises(SegmentationError, match="dimension"):
            motion_signal(make_frames([a, b]))

    def test_needs_two_frames(self):
        with pytest.raises(SegmentationError):
            motion_signal(make_frames([np.zeros((8, 8), dtype=np.uint8)]))

    def test_matches_brute_force_on_random_sequences(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            h, w = int(rng.integers(4, 64)), int(rng.integers(4, 64))
            n = int(rng.integers(2, 8))
            window = int(rng.integers(1, min(h, w) + 1))
            frames = make_frames(
                [rng.integers(0, 256, size=(h, w), dtype=np.uint8) for _ in range(n)]
            )
            got = motion_signal(frames, window=window).values
            want = brute_force_motion(frames, window)
            assert np.array_equal(got, want)  # bit-exact, not approximate

    def test_invariant_to_constant_offset(self):
        rng = np.random.default_rng(5)
        planes = [rng.integers(0, 100, size=(24, 24), dtype=np.uint8) for _ in range(4)]
        lifted = [(p + 90).astype(np.uint8) for p in planes]
        a = motion_signal(make_frames(planes), window=6).values
        b = motion_signal(make_frames(lifted), window=6).values
        assert np.allclose(a, b, atol=1e-12)


# --- outlier removal ----------------------------------------------------------------


class TestRemoveOutliers:
    def test_constant_signal_unchanged(self):
        signal = MotionSignal(values=np.full(40, 3.5), sample_rate=30.0)
        assert np.array_equal(remove_outliers(signal).values, signal.values)

    def test_spike_replaced_by_local_median(self):
        values = np.full(30, 1.0)
        values[13] = 50.0
        cleaned = remove_outliers(MotionSignal(values=values, sample_rate=30.0))
        assert cleaned.values[13] == 1.0
        assert np.array_equal(np.delete(cleaned.values, 13), np.full(29, 1.0))

    def test_short_signal_truncated_windows(self):
        values = np.array([1.0, 9.0, 1.0])
        cleaned = remove_outliers(MotionSignal(values=values, sample_rate=30.0), half_window=5)
        assert cleaned.values[1] == 1.0  # deviates from median 1.0 with MAD 0

    def test_inliers_survive_noise(self):
        rng = np.random.default_rng(6)
        values = 5.0 + rng.normal(0, 0.3, size=200)
        cleaned = remove_outliers(MotionSignal(values=values, sample_rate=30.0))
        assert np.mean(cleaned.values != values) < 0.05

    def test_empty_rejected(self):
        with pytest.raises(SegmentationError):
            remove_outliers(MotionSignal(values=np.array([]), sample_rate=30.0))


# --- low-pass filter ------------------------------------------------------------------


def designed_attenuation(freq: float, fs: float, cutoff: float = 0.5) -> float:
    """|H(f)|^2 of the designed biquad: the forward+backward amplitude response."""
    b, a = butter(2, cutoff / (fs / 2), btype="low")
    _, h = freqz(b, a, worN=[freq], fs=fs)
    return float(np.abs(h[0]) ** 2)


def tone(freq: float, fs: float, seconds: float = 20.0) -> MotionSignal:
    t = np.arange(int(seconds * fs)) / fs
    return MotionSignal(values=np.sin(2 * np.pi * freq * t), sample_rate=fs)


def midsection_amplitude(values: np.ndarray) -> float:
    mid = values[len(values) // 4 : -len(values) // 4]
    return float((mid.max() - mid.min()) / 2)


class TestLowpass:
    def test_constant_passes_unchanged(self):
        signal = MotionSignal(values=np.full(300, 2.25), sample_rate=30.0)
        assert np.allclose(lowpass(signal).values, 2.25, atol=1e-9)

    def test_attenuates_5hz_tone_below_designed_response(self):
        out = lowpass(tone(5.0, 30.0))
        measured = midsection_amplitude(out.values)
        analytic = designed_attenuation(5.0, 30.0)
        assert measured < 0.01
        assert measured == pytest.approx(analytic, rel=0.25, abs=1e-6)

    def test_passes_low_frequency_tone(self):
        out = lowpass(tone(0.1, 30.0, seconds=60.0))
        measured = midsection_amplitude(out.values)
        analytic = designed_attenuation(0.1, 30.0)
        assert measured >= 0.95
        assert measured == pytest.approx(analytic, rel=0.02)

    def test_zero_phase_preserves_valley_position(self):
        t = np.arange(600) / 30.0
        bump = np.exp(-((t - 10.0) ** 2) / 0.5)
        signal = MotionSignal(values=1.0 - bump, sample_rate=30.0)
        out = lowpass(signal)
        assert abs(int(np.argmin(out.values)) - 300) <= 1

    def test_cutoff_at_nyquist_rejected(self):
        with pytest.raises(SegmentationError):
            lowpass(MotionSignal(values=np.zeros(50), sample_rate=30.0), cutoff=15.0)

    def test_short_signal_survives_padding(self):
        signal = MotionSignal(values=np.linspace(0, 1, 6), sample_rate=30.0)
        assert len(lowpass(signal).values) == 6


# --- stop detection --------------------------------------------------------------------


class TestDetectStops:
    def test_monotone_signal_has_no_stops(self):
        signal = MotionSignal(values=np.linspace(0.0, 1.0, 90), sample_rate=30.0)
        assert detect_stops(signal).indices == ()

    def test_twin_valleys_keep_the_deeper(self):
        values = np.ones(90)
        values[40] = 0.05
        values[46] = 0.01  # 0.2 s away at 30 Hz
        stops = detect_stops(MotionSignal(values=values, sample_rate=30.0))
        assert stops.indices == (46,)

    def test_far_valleys_both_kept(self):
        values = np.ones(120)
        values[30] = 0.04
        values[90] = 0.02
        stops = detect_stops(MotionSignal(values=values, sample_rate=30.0))
        assert stops.indices == (30, 90)

    def test_scale_invariance(self):
        rng = np.random.default_rng(7)
        values = np.abs(np.sin(np.arange(300) / 20.0)) + 0.02 * rng.random(300)
        base = detect_stops(MotionSignal(values=values, sample_rate=30.0))
        for factor in (0.001, 3.7, 2500.0):
            scaled = detect_stops(MotionSignal(values=values * factor, sample_rate=30.0))
            assert scaled.indices == base.indices

    def test_wide_flat_valley_reports_center(self):
        values = np.ones(200)
        values[80:121] = 0.0
        stops = detect_stops(MotionSignal(values=values, sample_rate=30.0))
        assert len(stops.indices) == 1
        assert abs(stops.indices[0] - 100) <= 1

    def test_too_short_rejected(self):
        with pytest.raises(SegmentationError):
            detect_stops(MotionSignal(values=np.array([1.0, 0.5]), sample_rate=30.0))


# --- slicing -----------------------------------------------------------------------------


class TestSliceSegments:
    def test_two_stops_three_segments(self):
        segs = slice_segments(StopTimings(indices=(10, 20)), 30)
        assert [(s.start, s.end) for s in segs] == [(0, 10), (10, 20), (20, 30)]
        assert all(s.active for s in segs)

    def test_no_stops_single_segment(self):
        segs = slice_segments(StopTimings(indices=()), 12)
        assert [(s.start, s.end) for s in segs] == [(0, 12)]

    def test_stop_at_zero_suppressed(self):
        segs = slice_segments(StopTimings(indices=(0, 7)), 12)
        assert [(s.start, s.end) for s in segs] == [(0, 7), (7, 12)]

    def test_out_of_range_stop_rejected(self):
        with pytest.raises(SegmentationError):
            slice_segments(StopTimings(indices=(40,)), 30)

    @settings(max_examples=50, deadline=None)
    @given(st.data())
    def test_always_tiles_frame_range(self, data):
        count = data.draw(st.integers(1, 400))
        stops = sorted(data.draw(st.sets(st.integers(0, count - 1), max_size=8)))
        segs = slice_segments(StopTimings(indices=tuple(stops)), count)
        covered = []
        for s in segs:
            covered.extend(range(s.start, s.end))
        assert covered == list(range(count))  # disjoint union, in order


class TestSliceAudio:
    def test_boundary_at_one_second(self):
        ranges = slice_audio(96000, 48000, StopTimings(indices=(30,)), 30)
        assert ranges == [(0, 48000), (48000, 96000)]

    def test_no_stops(self):
        assert slice_audio(5000, 48000, StopTimings(indices=()), 30) == [(0, 5000)]

    def test_cd_rate_boundary(self):
        ranges = slice_audio(44100 * 2, 44100, StopTimings(indices=(15,)), 30)
        assert ranges[0] == (0, 22050)

    def test_frame_to_sample_rounds_half_up(self):
        assert frame_to_sample(1, 44100, 30) == 1470
        assert frame_to_sample(0, 44100, 30) == 0

    def test_bad_rates_rejected(self):
        with pytest.raises(SegmentationError):
            slice_audio(100, 0, StopTimings(indices=()), 30)


# --- diagnostics file round trip -----------------------------------------------------------


def test_diagnostics_csv_and_motion_csv(tmp_path):
    rng = np.random.default_rng(8)
    raw = MotionSignal(values=np.abs(rng.normal(1, 0.3, size=120)), sample_rate=30.0)
    diag = run_signal_chain(raw)
    out = tmp_path / "diag.csv"
    save_diagnostics(out, diag)
    header = out.read_text().splitlines()[0]
    assert header == "frame_index,raw,deoutliered,filtered,is_stop"

    plain = tmp_path / "signal.csv"
    plain.write_text("".join(f"{float(v)!r}\n" for v in raw.values))
    loaded = load_motion_csv(plain, sample_rate=30.0)
    assert np.array_equal(loaded.values, raw.values)
    assert isinstance(diag, SignalDiagnostics)
