"""Luminance-change motion signal and hand-stop detection.

The chain: per-frame 50x50 box smoothing of the luminance plane, mean absolute
difference between adjacent smoothed frames, Hampel outlier removal, zero-phase
0.5 Hz Butterworth low-pass, then qualified local minima as stop timings.
Window sums are kept in exact integer arithmetic so the optimized integral-image
path is bit-identical to a naive per-pixel reference.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.signal import butter, filtfilt, find_peaks, peak_widths

__all__ = [
    "SegmentationError",
    "Frame",
    "MotionSignal",
    "StopTimings",
    "SegmentStatus",
    "Segment",
    "luminance_of",
    "rgb_to_luminance",
    "spatial_smooth",
    "motion_signal",
    "remove_outliers",
    "lowpass",
    "detect_stops",
    "slice_segments",
    "frame_to_sample",
    "slice_audio",
    "save_diagnostics",
    "load_motion_csv",
]


class SegmentationError(ValueError):
    pass


@dataclass(frozen=True)
class Frame:
    """One luminance frame: (height, width) uint8 plane plus a timestamp in seconds."""

    plane: np.ndarray
    timestamp: float

    def __post_init__(self):
        if self.plane.ndim != 2:
            raise SegmentationError("frame plane must be 2-D")
        if self.plane.dtype != np.uint8:
            raise SegmentationError("frame plane must be uint8")

    @property
    def width(self) -> int:
        return self.plane.shape[1]

    @property
    def height(self) -> int:
        return self.plane.shape[0]


@dataclass(frozen=True)
class MotionSignal:
    """Scalar luminance-change series, one value per adjacent frame pair."""

    values: np.ndarray
    sample_rate: float

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.values.ndim != 1:
            raise SegmentationError("motion signal must be 1-D")
        if self.sample_rate <= 0:
            raise SegmentationError("sample rate must be positive")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class StopTimings:
    """Strictly increasing frame indices where the hand paused."""

    indices: tuple[int, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise SegmentationError("stop indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.indices)


class SegmentStatus(enum.Enum):
    ACTIVE = "active"
    IGNORED = "ignored"


@dataclass(frozen=True)
class Segment:
    """Half-open frame range [start, end) with review status and transcript."""

    start: int
    end: int
    status: SegmentStatus = SegmentStatus.ACTIVE
    transcript: str | None = None

    def __post_init__(self):
        if not self.start < self.end:
            raise SegmentationError(f"empty segment [{self.start}, {self.end})")

    @property
    def active(self) -> bool:
        return self.status is SegmentStatus.ACTIVE

    def merged_with(self, other: "Segment") -> "Segment":
        if self.end != other.start:
            raise SegmentationError("can only merge adjacent segments")
        return replace(self, end=other.end, transcript=None)


def luminance_of(r: int, g: int, b: int) -> int:
    """BT.601 luminance of one 8-bit RGB triple, rounded and clamped to [0, 255]."""
    for v in (r, g, b):
        if not 0 <= v <= 255:
            raise SegmentationError(f"channel value {v} outside [0, 255]")
    y = int(round(0.299 * r + 0.587 * g + 0.114 * b))
    return min(255, max(0, y))


def rgb_to_luminance(image: np.ndarray) -> np.ndarray:
    """Vectorized luminance_of over a (h, w, 3) uint8 image."""
    if image.ndim != 3 or image.shape[2] != 3:
        raise SegmentationError("expected (h, w, 3) RGB image")
    rgb = image.astype(np.float64)
    y = np.rint(0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2])
    return np.clip(y, 0, 255).astype(np.uint8)


def _window_bounds(n: int, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Inclusive [lo, hi] index bounds of a centered window, truncated at borders.

    A window of size w around index i spans [i - (w-1)//2, i + w//2]; interior
    indices therefore cover exactly w samples.
    """
    idx = np.arange(n)
    lo = np.maximum(idx - (window - 1) // 2, 0)
    hi = np.minimum(idx + window // 2, n - 1)
    return lo, hi


def spatial_smooth(plane: np.ndarray, window: int = 50) -> np.ndarray:
    """Box-average a uint8 plane with border-truncated windows; returns float64.

    Sums are accumulated in int64 via an integral image, so every output value
    is an exact integer ratio sum/count.
    """
    if plane.ndim != 2:
        raise SegmentationError("plane must be 2-D")
    h, w = plane.shape
    if window < 1:
        raise SegmentationError("window must be >= 1")
    if window > min(h, w):
        raise SegmentationError(f"window {window} exceeds image size {w}x{h}")
    ii = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(plane.astype(np.int64), axis=0), axis=1, out=ii[1:, 1:])
    rlo, rhi = _window_bounds(h, window)
    clo, chi = _window_bounds(w, window)
    sums = (
        ii[rhi + 1][:, chi + 1]
        - ii[rlo][:, chi + 1]
        - ii[rhi + 1][:, clo]
        + ii[rlo][:, clo]
    )
    counts = np.outer(rhi - rlo + 1, chi - clo + 1)
    return sums / counts


def motion_signal(frames: list[Frame], window: int = 50) -> MotionSignal:
    """Mean absolute difference of adjacent box-smoothed frames.

    The sample rate is derived from the frame timestamps (nominally 30 Hz).
    """
    if len(frames) < 2:
        raise SegmentationError("need at least two frames")
    shape = frames[0].plane.shape
    for i, f in enumerate(frames):
        if f.plane.shape != shape:
            raise SegmentationError(f"frame {i} dimension mismatch {f.plane.shape} != {shape}")
    times = [f.timestamp for f in frames]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise SegmentationError("timestamps must be strictly increasing")
    span = times[-1] - times[0]
    rate = (len(frames) - 1) / span
    values = np.empty(len(frames) - 1, dtype=np.float64)
    prev = spatial_smooth(frames[0].plane, window)
    for t in range(1, len(frames)):
        cur = spatial_smooth(frames[t].plane, window)
        values[t - 1] = np.mean(np.abs(cur - prev))
        prev = cur
    return MotionSignal(values=values, sample_rate=rate)


def remove_outliers(signal: MotionSignal, half_window: int = 5, k: float = 3.0) -> MotionSignal:
    """Hampel filter: replace samples deviating more than k scaled MADs from the
    median of their (2*half_window+1)-sample neighborhood (truncated at the ends)."""
    x = signal.values
    if len(x) == 0:
        raise SegmentationError("signal is empty")
    out = x.copy()
    n = len(x)
    for i in range(n):
        lo = max(0, i - half_window)
        hi = min(n, i + half_window + 1)
        med = np.median(x[lo:hi])
        mad = np.median(np.abs(x[lo:hi] - med))
        if np.abs(x[i] - med) > k * 1.4826 * mad:
            out[i] = med
    return replace(signal, values=out)


def lowpass(signal: MotionSignal, cutoff: float = 0.5) -> MotionSignal:
    """Zero-phase 2nd-order Butterworth low-pass (applied forward and backward)."""
    if cutoff <= 0:
        raise SegmentationError("cutoff must be positive")
    nyquist = signal.sample_rate / 2.0
    if cutoff >= nyquist:
        raise SegmentationError(f"cutoff {cutoff} Hz >= Nyquist {nyquist} Hz")
    b, a = butter(2, cutoff / nyquist, btype="low")
    n = len(signal.values)
    padlen = min(3 * max(len(a), len(b)), n - 1)
    filtered = filtfilt(b, a, signal.values, padlen=padlen)
    return replace(signal, values=filtered)


def detect_stops(
    signal: MotionSignal,
    min_spacing: float = 0.5,
    rel_threshold: float = 0.085,
    valley_height: float = 0.25,
) -> StopTimings:
    """Centers of the qualified low-motion valleys of the signal.

    A valley qualifies when its prominence (depth below the lower of its
    bounding maxima) is at least rel_threshold times the signal's 90th
    percentile; relative scaling makes the result invariant to positive
    rescaling of the signal. Valleys closer together than min_spacing seconds
    are thinned, keeping the deeper one. Each surviving valley reports the
    rounded midpoint of its width measured valley_height of the way up its
    prominence, rather than the pointwise minimum: a filtered pause is a
    wide, nearly flat bowl whose minima wander with numerical ripple, while
    the low-region midpoint tracks the pause center that downstream slicing
    relies on.
    """
    x = signal.values
    n = len(x)
    if n < 3:
        raise SegmentationError("signal too short for minima detection")
    prominence_floor = max(rel_threshold * float(np.percentile(x, 90)), 1e-12)
    distance = max(1, int(round(min_spacing * signal.sample_rate)))
    peaks, _ = find_peaks(-x, prominence=prominence_floor, distance=distance)
    if len(peaks) == 0:
        return StopTimings(indices=())
    _, _, left_ips, right_ips = peak_widths(-x, peaks, rel_height=valley_height)
    centers = sorted({int(round((l + r) / 2.0)) for l, r in zip(left_ips, right_ips)})
    return StopTimings(indices=tuple(centers))


def slice_segments(stops: StopTimings, frame_count: int) -> list[Segment]:
    """Cut [0, frame_count) at the stop indices; k usable stops give k+1 segments."""
    if frame_count <= 0:
        raise SegmentationError("frame count must be positive")
    for s in stops.indices:
        if not 0 <= s < frame_count:
            raise SegmentationError(f"stop index {s} outside [0, {frame_count})")
    bounds = [0, *stops.indices, frame_count]
    segments = []
    for a, b in zip(bounds, bounds[1:]):
        if a < b:  # a stop at 0 (or duplicates) would create an empty range; drop it
            segments.append(Segment(start=a, end=b))
    return segments


def frame_to_sample(frame: int, audio_rate: float, video_rate: float) -> int:
    """Audio sample index matching a video frame index (round half up)."""
    if audio_rate <= 0 or video_rate <= 0:
        raise SegmentationError("rates must be positive")
    return int(np.floor(frame * audio_rate / video_rate + 0.5))


def slice_audio(
    sample_count: int,
    audio_rate: float,
    stops: StopTimings,
    video_rate: float,
) -> list[tuple[int, int]]:
    """Map frame-index stops to audio sample ranges tiling [0, sample_count)."""
    if audio_rate <= 0 or video_rate <= 0:
        raise SegmentationError("rates must be positive")
    bounds = [0]
    for s in stops.indices:
        sample = frame_to_sample(s, audio_rate, video_rate)
        bounds.append(min(max(sample, 0), sample_count))
    bounds.append(sample_count)
    ranges = []
    for a, b in zip(bounds, bounds[1:]):
        if a < b:
            ranges.append((a, b))
    return ranges


@dataclass(frozen=True)
class SignalDiagnostics:
    """The three signal-chain stages plus detected stops, for CSV export and UI plots."""

    raw: MotionSignal
    deoutliered: MotionSignal
    filtered: MotionSignal
    stops: StopTimings = field(default_factory=lambda: StopTimings(indices=()))


def run_signal_chain(
    raw: MotionSignal,
    half_window: int = 5,
    k: float = 3.0,
    cutoff: float = 0.5,
    min_spacing: float = 0.5,
    rel_threshold: float = 0.085,
) -> SignalDiagnostics:
    """Outlier removal, low-pass, stop detection, bundled for the pipeline."""
    deoutliered = remove_outliers(raw, half_window=half_window, k=k)
    filtered = lowpass(deoutliered, cutoff=cutoff)
    stops = detect_stops(filtered, min_spacing=min_spacing, rel_threshold=rel_threshold)
    return SignalDiagnostics(raw=raw, deoutliered=deoutliered, filtered=filtered, stops=stops)


def save_diagnostics(path: str | Path, diag: SignalDiagnostics) -> None:
    stops = set(diag.stops.indices)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame_index", "raw", "deoutliered", "filtered", "is_stop"])
        for i in range(len(diag.raw)):
            writer.writerow(
                [
                    i,
                    repr(float(diag.raw.values[i])),
                    repr(float(diag.deoutliered.values[i])),
                    repr(float(diag.filtered.values[i])),
                    1 if i in stops else 0,
                ]
            )


def load_motion_csv(path: str | Path, sample_rate: float) -> MotionSignal:
    """Read a precomputed motion signal: one value per line, optional header."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            if lineno == 1 and not _is_number(text.split(",")[0]):
                continue  # header row
            values.append(float(text.split(",")[0]))
    if not values:
        raise SegmentationError(f"no samples in {path}")
    return MotionSignal(values=np.array(values), sample_rate=sample_rate)


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False
