"""Seeded synthetic demonstrations: stop-and-go videos, arcs, and full scenario bundles.

Everything here is reproducible: the same seed yields byte-identical output,
and every generated bundle carries its ground truth alongside.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import pnm
from .segmentation import Frame
from .skillparams import CameraIntrinsics, project
from .taskmodel import TaskLabel

__all__ = [
    "SynthError",
    "StopGoVideo",
    "gen_stopgo",
    "gen_arc",
    "gen_scenario",
    "SCENARIO_NAMES",
    "write_stopgo_bundle",
]


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class StopGoVideo:
    """Rendered stop-and-go clip with its ground truth.

    truth_stops are indices into the motion signal (one sample per adjacent
    frame pair), at the centers of the interior pauses. hand_centers holds the
    per-frame block center in pixels.
    """

    frames: list[Frame]
    truth_stops: tuple[int, ...]
    hand_centers: list[tuple[float, float]]
    fps: float


def _validate_script(script: list[tuple[str, float]]):
    if not script:
        raise SynthError("empty script")
    for mode, duration in script:
        if mode not in ("move", "pause"):
            raise SynthError(f"unknown script mode {mode!r}")
        if duration < 0.5:
            raise SynthError(f"script durations must be >= 0.5 s, got {duration}")
    for (a, _), (b, _) in zip(script, script[1:]):
        if a == b:
            raise SynthError("script must alternate move and pause")


def gen_stopgo(
    script: list[tuple[str, float]],
    fps: float = 30.0,
    size: tuple[int, int] = (128, 128),
    seed: int = 0,
    block: int = 20,
    speed: tuple[float, float] = (2.3, 1.1),
) -> StopGoVideo:
    """Render a bright block translating over a static textured background.

    The block moves at constant speed during `move` phases (bouncing off the
    borders) and freezes during `pause` phases, so adjacent pause frames are
    identical and the motion signal drops to exactly zero there.
    """
    _validate_script(script)
    w, h = size
    if block >= min(w, h) // 2:
        raise SynthError("block too large for the frame")
    rng = np.random.default_rng(seed)
    background = rng.integers(20, 120, size=(h, w), dtype=np.uint8)

    modes: list[str] = []
    spans: list[tuple[str, int, int]] = []  # (mode, first frame, end frame)
    for mode, duration in script:
        n = int(round(duration * fps))
        spans.append((mode, len(modes), len(modes) + n))
        modes.extend([mode] * n)
    total = len(modes)
    if total < 2:
        raise SynthError("script renders fewer than two frames")

    x, y = float(w) * 0.15, float(h) * 0.3
    vx, vy = speed
    positions = [(x, y)]
    for i in range(1, total):
        if modes[i] == "move":
            nx, ny = x + vx, y + vy
            if not 1 <= nx <= w - block - 1:
                vx = -vx
                nx = x + vx
            if not 1 <= ny <= h - block - 1:
                vy = -vy
                ny = y + vy
            x, y = nx, ny
        positions.append((x, y))

    frames = []
    for i, (px, py) in enumerate(positions):
        canvas = background.copy()
        x0, y0 = int(round(px)), int(round(py))
        canvas[y0 : y0 + block, x0 : x0 + block] = 255
        frames.append(Frame(plane=canvas, timestamp=i / fps))

    truth = []
    for mode, a, b in spans:
        if mode == "pause" and a > 0 and b < total:
            # zero-diff run in signal space is [a-1, b-2]; take its center
            truth.append((a - 1 + b - 2) // 2)

    centers = [(px + block / 2.0, py + block / 2.0) for px, py in positions]
    return StopGoVideo(frames=frames, truth_stops=tuple(truth), hand_centers=centers, fps=fps)


def write_stopgo_bundle(video: StopGoVideo, out_dir: str | Path, bundle_id: str = "stopgo") -> Path:
    """Write frames, truth, and a minimal manifest for a plain stop-and-go clip.

    The manifest is enough for segmentation-only runs; scenario bundles add
    tracks, scripts, and grasp configuration on top.
    """
    out = Path(out_dir)
    (out / "frames").mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(video.frames):
        pnm.write_pgm(out / "frames" / f"f{i:06d}.pgm", frame.plane)
    with open(out / "truth_stops.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stop_index"])
        for s in video.truth_stops:
            writer.writerow([s])
    if not (out / "manifest.txt").exists():
        lines = [
            "bundle v1",
            f"id {bundle_id}",
            f"recorded {RECORDED_AT}",
            f"video_rate {video.fps!r}",
            f"audio_rate {AUDIO_RATE!r}",
            f"intrinsics {INTRINSICS.fx!r} {INTRINSICS.fy!r} {INTRINSICS.cx!r} {INTRINSICS.cy!r}",
        ]
        lines.extend(f"frame frames/f{i:06d}.pgm" for i in range(len(video.frames)))
        (out / "manifest.txt").write_text("".join(l + "\n" for l in lines), encoding="utf-8")
    return out


def gen_arc(
    center,
    axis,
    radius: float,
    angle_range: tuple[float, float],
    n: int,
    noise_sigma: float = 0.0,
    seed: int = 0,
) -> tuple[np.ndarray, dict]:
    """Points on a circular arc plus isotropic Gaussian noise, with ground truth.

    Returns (points (n, 3), truth dict with center/axis/radius/sweep). The
    truth axis is unit length and oriented so the sweep is positive, matching
    the fitter's convention.
    """
    if n < 3:
        raise SynthError("need at least 3 points")
    if radius <= 0:
        raise SynthError("radius must be positive")
    c = np.asarray(center, dtype=np.float64)
    a = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(a)
    if norm < 1e-12:
        raise SynthError("axis must be nonzero")
    a = a / norm
    # any unit vector orthogonal to the axis works as the in-plane reference
    helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(a, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    start, end = angle_range
    theta = np.linspace(start, end, n)
    points = c + radius * (np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        points = points + rng.normal(0.0, noise_sigma, size=points.shape)
    sweep = end - start
    truth_axis = a if sweep >= 0 else -a
    truth = {
        "center": c,
        "axis": truth_axis,
        "radius": float(radius),
        "sweep": abs(float(sweep)),
    }
    return points, truth


# --- scenario bundles ---------------------------------------------------------

INTRINSICS = CameraIntrinsics(fx=110.0, fy=110.0, cx=64.0, cy=64.0)
VIDEO_RATE = 30.0
AUDIO_RATE = 48000.0
RECORDED_AT = "2026-01-01T00:00:00Z"

_OBJECT_VOCAB = ["box", "cup", "door handle", "door", "plate", "bottle"]

_GRASP_PRIORS = [
    ("box", "power", 0.8),
    ("box", "precision", 0.2),
    ("cup", "power", 0.6),
    ("cup", "precision", 0.4),
    ("door handle", "power", 0.9),
    ("door handle", "precision", 0.1),
    ("door", "power", 0.9),
    ("door", "precision", 0.1),
    ("plate", "power", 0.3),
    ("plate", "precision", 0.7),
    ("bottle", "power", 0.7),
    ("bottle", "precision", 0.3),
]

_GRASP_SCORES = [("power", 0.7), ("precision", 0.3)]


@dataclass(frozen=True)
class _Scenario:
    object_name: str
    # one (expected label, spoken instruction, move seconds) per task
    tasks: list[tuple[TaskLabel, str, float]]
    waypoints: list  # len(tasks) + 1 3D hand waypoints, or ("arc", ...) per leg
    pause: float = 1.0
    # index of a task whose motion is rendered as two halves with a pause
    # between them: an over-split the review stage must repair by merging
    split_leg: int | None = None


def _arc_leg(center, axis, radius, start, end):
    return ("arc", np.asarray(center, float), np.asarray(axis, float), radius, start, end)


_SCENARIOS: dict[str, _Scenario] = {
    "pick_bring_place": _Scenario(
        object_name="box",
        tasks=[
            (TaskLabel.GRASP, "Grasp the box.", 1.0),
            (TaskLabel.PTG11, "Pick up the box.", 1.1),
            (TaskLabel.PTG12, "Bring the box to the other table.", 1.4),
            (TaskLabel.PTG13, "Place the box on the table.", 1.1),
            (TaskLabel.RELEASE, "Release the box.", 0.9),
        ],
        waypoints=[
            (0.05, 0.09, 0.95),
            (0.10, 0.05, 0.90),   # at the object
            (0.10, -0.06, 0.90),  # lifted
            (-0.16, -0.06, 0.86),
            (-0.16, 0.05, 0.86),  # set down
            (-0.20, 0.01, 0.90),
        ],
    ),
    "throw_away": _Scenario(
        object_name="cup",
        tasks=[
            (TaskLabel.GRASP, "Grasp the cup.", 1.0),
            (TaskLabel.PTG11, "Pick up the cup.", 1.0),
            (TaskLabel.PTG12, "Bring the cup over the trash bin.", 1.5),
            (TaskLabel.RELEASE, "Let go of the cup.", 0.9),
        ],
        waypoints=[
            (0.02, 0.10, 1.00),
            (0.08, 0.06, 0.95),
            (0.08, -0.05, 0.95),
            (-0.18, -0.04, 0.88),
            (-0.21, 0.00, 0.92),
        ],
    ),
    "open_door": _Scenario(
        object_name="door handle",
        tasks=[
            (TaskLabel.GRASP, "Grasp the door handle.", 1.0),
            (TaskLabel.PTG51, "Open the door.", 1.3),
            (TaskLabel.RELEASE, "Release the door handle.", 0.9),
        ],
        waypoints=[
            (0.12, 0.04, 0.86),
            (0.15, 0.00, 0.80),  # on the handle
            _arc_leg(center=(-0.25, 0.0, 0.80), axis=(0.0, 1.0, 0.0), radius=0.4, start=0.0, end=1.2217),
            (0.0, 0.03, 0.50),
        ],
    ),
    "pick_bring_place_oversplit": _Scenario(
        object_name="box",
        tasks=[
            (TaskLabel.GRASP, "Grasp the box.", 1.0),
            (TaskLabel.PTG11, "Pick up the box.", 1.1),
            (TaskLabel.PTG12, "Bring the box to the other table.", 1.6),
            (TaskLabel.PTG13, "Place the box on the table.", 1.1),
            (TaskLabel.RELEASE, "Release the box.", 0.9),
        ],
        waypoints=[
            (0.05, 0.09, 0.95),
            (0.10, 0.05, 0.90),
            (0.10, -0.06, 0.90),
            (-0.16, -0.06, 0.86),
            (-0.16, 0.05, 0.86),
            (-0.20, 0.01, 0.90),
        ],
        split_leg=2,
    ),
    "shelf_multibring": _Scenario(
        object_name="box",
        tasks=[
            (TaskLabel.GRASP, "Grasp the box.", 1.0),
            (TaskLabel.PTG11, "Pick up the box.", 1.0),
            (TaskLabel.PTG12, "Bring the box away from the shelf.", 1.2),
            (TaskLabel.PTG12, "Carry the box around the obstacle.", 1.3),
            (TaskLabel.PTG12, "Bring the box to the other table.", 1.2),
            (TaskLabel.PTG13, "Place the box on the table.", 1.0),
            (TaskLabel.RELEASE, "Release the box.", 0.9),
        ],
        waypoints=[
            (0.06, 0.02, 1.00),
            (0.12, -0.02, 0.95),
            (0.12, -0.10, 0.95),
            (0.02, -0.12, 0.90),
            (-0.10, -0.10, 0.98),
            (-0.18, -0.08, 0.90),
            (-0.18, 0.04, 0.90),
            (-0.22, 0.00, 0.94),
        ],
    ),
}

SCENARIO_NAMES = tuple(_SCENARIOS)

_LEFT_ARM = {
    "l_shoulder": np.array([-0.25, -0.15, 1.05]),
    "l_elbow": np.array([-0.25, 0.00, 1.00]),
    "l_wrist": np.array([-0.24, 0.14, 0.96]),
}
_RIGHT_SHOULDER = np.array([0.25, -0.15, 1.05])
_LEFT_HAND_3D = np.array([-0.22, 0.12, 1.00])


def _hand_leg_points(leg_start, leg, count: int) -> np.ndarray:
    """3D hand positions for the `count` frames of one move leg."""
    t = np.linspace(0.0, 1.0, count)
    if isinstance(leg, tuple) and len(leg) == 6 and leg[0] == "arc":
        _, center, axis, radius, start, end = leg
        axis = axis / np.linalg.norm(axis)
        helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e2 = np.cross(axis, helper)
        e2 /= np.linalg.norm(e2)
        e1 = np.cross(e2, axis)
        theta = start + (end - start) * t
        return center + radius * (np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2)
    a = np.asarray(leg_start, dtype=np.float64)
    b = np.asarray(leg, dtype=np.float64)
    return a + (b - a) * t[:, None]


def _leg_endpoint(leg) -> np.ndarray:
    if isinstance(leg, tuple) and len(leg) == 6 and leg[0] == "arc":
        _, center, axis, radius, start, end = leg
        axis = axis / np.linalg.norm(axis)
        helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e2 = np.cross(axis, helper)
        e2 /= np.linalg.norm(e2)
        e1 = np.cross(e2, axis)
        return center + radius * (np.cos(end) * e1 + np.sin(end) * e2)
    return np.asarray(leg, dtype=np.float64)


def gen_scenario(name: str, out_dir: str | Path, seed: int = 0) -> Path:
    """Write a complete demonstration bundle for one household scenario.

    The bundle holds rendered frames, the manifest, detection tracks, the
    per-segment transcript script, grasp configuration, and ground-truth files
    (expected label sequence and scripted stop timings).
    """
    if name not in _SCENARIOS:
        raise SynthError(f"unknown scenario {name!r} (have {', '.join(_SCENARIOS)})")
    scenario = _SCENARIOS[name]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    script: list[tuple[str, float]] = []
    leg_targets: list = []  # leg endpoint per move entry, parallel to the script's moves
    for i, (_, _, move_s) in enumerate(scenario.tasks):
        if i:
            script.append(("pause", scenario.pause))
        target = scenario.waypoints[i + 1]
        if i == scenario.split_leg:
            if isinstance(target, tuple) and len(target) == 6 and target[0] == "arc":
                raise SynthError("cannot over-split an arc leg")
            a = np.asarray(scenario.waypoints[i], dtype=np.float64)
            b = np.asarray(target, dtype=np.float64)
            midpoint = tuple((a + b) / 2.0)
            script.append(("move", move_s / 2))
            leg_targets.append(midpoint)
            script.append(("pause", scenario.pause))
            script.append(("move", move_s / 2))
            leg_targets.append(target)
        else:
            script.append(("move", move_s))
            leg_targets.append(target)
    video = gen_stopgo(script, fps=VIDEO_RATE, seed=seed)
    write_stopgo_bundle(video, out)

    total = len(video.frames)
    move_legs: list[tuple[int, int]] = []
    cursor = 0
    for mode, duration in script:
        n = int(round(duration * VIDEO_RATE))
        if mode == "move":
            move_legs.append((cursor, cursor + n))
        cursor += n

    # 3D hand path: leg i interpolates waypoint i -> waypoint i+1 (or an arc),
    # frozen during pauses.
    hand = np.zeros((total, 3))
    leg_start = np.asarray(scenario.waypoints[0], dtype=np.float64)
    hand[: move_legs[0][0]] = leg_start
    for i, (a, b) in enumerate(move_legs):
        leg = leg_targets[i]
        pts = _hand_leg_points(leg_start, leg, b - a)
        hand[a:b] = pts
        leg_start = _leg_endpoint(leg)
        end = move_legs[i + 1][0] if i + 1 < len(move_legs) else total
        hand[b:end] = leg_start

    object_3d = np.asarray(scenario.waypoints[1], dtype=np.float64)

    rows = []
    for f in range(total):
        u, v = project(hand[f], INTRINSICS)
        rows.append((f, "right_hand", u, v, hand[f][2] * 1000.0, 1.0))
        lu, lv = project(_LEFT_HAND_3D, INTRINSICS)
        rows.append((f, "left_hand", lu, lv, _LEFT_HAND_3D[2] * 1000.0, 1.0))
        ou, ov = project(object_3d, INTRINSICS)
        rows.append((f, "object", ou, ov, object_3d[2] * 1000.0, 1.0))
        wrist = hand[f]
        elbow = 0.5 * (wrist + _RIGHT_SHOULDER) + np.array([0.0, -0.05, 0.02])
        for kind, p in (
            ("l_shoulder", _LEFT_ARM["l_shoulder"]),
            ("l_elbow", _LEFT_ARM["l_elbow"]),
            ("l_wrist", _LEFT_ARM["l_wrist"]),
            ("r_shoulder", _RIGHT_SHOULDER),
            ("r_elbow", elbow),
            ("r_wrist", wrist),
        ):
            rows.append((f, kind, p[0], p[1], p[2], 1.0))
    with open(out / "track.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "kind", "x", "y", "z", "confidence"])
        for frame, kind, x, y, z, conf in rows:
            writer.writerow([frame, kind, repr(float(x)), repr(float(y)), repr(float(z)), repr(float(conf))])

    (out / "objects.txt").write_text("".join(f"{o}\n" for o in _OBJECT_VOCAB), encoding="utf-8")
    with open(out / "grasp_priors.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["object", "grasp", "probability"])
        for obj, grasp, p in _GRASP_PRIORS:
            writer.writerow([obj, grasp, p])
    with open(out / "grasp_scores.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["grasp", "probability"])
        for grasp, p in _GRASP_SCORES:
            writer.writerow([grasp, p])

    (out / "expected_labels.txt").write_text(
        "".join(f"{label.code}\n" for label, _, _ in scenario.tasks), encoding="utf-8"
    )

    manifest = [
        "bundle v1",
        f"id {name}",
        f"recorded {RECORDED_AT}",
        f"video_rate {VIDEO_RATE!r}",
        f"audio_rate {AUDIO_RATE!r}",
        f"intrinsics {INTRINSICS.fx!r} {INTRINSICS.fy!r} {INTRINSICS.cx!r} {INTRINSICS.cy!r}",
        "objects objects.txt",
        "grasp_priors grasp_priors.csv",
        "grasp_scores grasp_scores.csv",
        "track track.csv",
    ]
    for i, (_, sentence, _) in enumerate(scenario.tasks):
        manifest.append(f"script {i} {sentence}")
    for i in range(total):
        manifest.append(f"frame frames/f{i:06d}.pgm")
    (out / "manifest.txt").write_text("".join(line + "\n" for line in manifest), encoding="utf-8")
    return out


def expected_labels(name: str) -> list[TaskLabel]:
    if name not in _SCENARIOS:
        raise SynthError(f"unknown scenario {name!r}")
    return [label for label, _, _ in _SCENARIOS[name].tasks]
