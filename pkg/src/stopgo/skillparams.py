"""Skill-parameter extraction daemons.

These operate on detection tracks (per-frame 2D/3D keypoints with confidences)
supplied with the demonstration bundle; the neural detectors that produce the
tracks stay out of process. Everything here is pure and deterministic.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .taskmodel import ArmPoseCode, HingeParams, Laterality

__all__ = [
    "SkillParamsError",
    "CameraIntrinsics",
    "DetectionTrack",
    "DIRECTION_CODEBOOK",
    "backproject",
    "project",
    "hand_laterality",
    "fuse_grasp_type",
    "uniform_prior",
    "fit_hinge",
    "quantize_direction",
    "encode_arm_pose",
    "extract_trajectory",
    "load_track_csv",
    "load_grasp_priors",
]

TRACK_KINDS = (
    "object",
    "left_hand",
    "right_hand",
    "l_shoulder",
    "l_elbow",
    "l_wrist",
    "r_shoulder",
    "r_elbow",
    "r_wrist",
)

# 2D detections carry depth in millimeters in the z column; 3D joints are in meters.
TRACK_2D_KINDS = ("object", "left_hand", "right_hand")


class SkillParamsError(ValueError):
    pass


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise SkillParamsError("focal lengths must be positive")


@dataclass
class DetectionTrack:
    """Per-frame detections: frame -> kind -> (x, y, z, confidence)."""

    entries: dict[int, dict[str, tuple[float, float, float, float]]] = field(default_factory=dict)

    def add(self, frame: int, kind: str, x: float, y: float, z: float, confidence: float):
        if kind not in TRACK_KINDS:
            raise SkillParamsError(f"unknown track kind {kind!r}")
        if not 0.0 <= confidence <= 1.0:
            raise SkillParamsError(f"confidence {confidence} outside [0, 1]")
        self.entries.setdefault(frame, {})[kind] = (x, y, z, confidence)

    def get(self, frame: int, kind: str) -> tuple[float, float, float, float] | None:
        return self.entries.get(frame, {}).get(kind)

    def frames(self) -> list[int]:
        return sorted(self.entries)

    def sliced(self, start: int, end: int) -> "DetectionTrack":
        """Entries with start <= frame < end."""
        return DetectionTrack(
            entries={f: dict(kinds) for f, kinds in self.entries.items() if start <= f < end}
        )


def load_track_csv(path: str | Path) -> DetectionTrack:
    """Read a detection-track CSV with columns frame,kind,x,y,z,confidence."""
    track = DetectionTrack()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["frame", "kind", "x", "y", "z", "confidence"]:
            raise SkillParamsError(f"track file {path} needs a frame,kind,x,y,z,confidence header")
        for row in reader:
            if not row:
                continue
            try:
                track.add(int(row[0]), row[1], float(row[2]), float(row[3]), float(row[4]), float(row[5]))
            except (IndexError, ValueError) as exc:
                raise SkillParamsError(f"bad track row {row!r}: {exc}") from None
    return track


def load_grasp_priors(path: str | Path) -> dict[str, dict[str, float]]:
    """Read the per-object grasp prior table: lines of object,grasp,probability."""
    priors: dict[str, dict[str, float]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["object", "grasp", "probability"]:
            raise SkillParamsError(f"prior file {path} needs an object,grasp,probability header")
        for row in reader:
            if not row:
                continue
            priors.setdefault(row[0], {})[row[1]] = float(row[2])
    return priors


# --- geometry ----------------------------------------------------------------


def backproject(u: float, v: float, depth_mm: float, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Pinhole back-projection of a pixel with depth (millimeters) to camera-frame meters."""
    if depth_mm <= 0:
        raise SkillParamsError("invalid depth")
    z = depth_mm / 1000.0
    x = (u - intrinsics.cx) * z / intrinsics.fx
    y = (v - intrinsics.cy) * z / intrinsics.fy
    return np.array([x, y, z])


def project(point, intrinsics: CameraIntrinsics) -> tuple[float, float]:
    """Perspective projection, the inverse of backproject."""
    x, y, z = np.asarray(point, dtype=np.float64)
    if z <= 0:
        raise SkillParamsError("point behind the camera")
    return (x * intrinsics.fx / z + intrinsics.cx, y * intrinsics.fy / z + intrinsics.cy)


def hand_laterality(object_2d, left_2d, right_2d) -> Laterality:
    """The hand closer to the object's 2D location.

    The object position comes from the first frame of the grasping segment and
    the hand positions from its last frame (the object is assumed static).
    """
    if object_2d is None or left_2d is None or right_2d is None:
        raise SkillParamsError("detection unavailable")
    obj = np.asarray(object_2d, dtype=np.float64)
    dl = float(np.linalg.norm(np.asarray(left_2d, dtype=np.float64) - obj))
    dr = float(np.linalg.norm(np.asarray(right_2d, dtype=np.float64) - obj))
    if abs(dl - dr) <= 1e-6:
        raise SkillParamsError("ambiguous laterality")
    return Laterality.LEFT if dl < dr else Laterality.RIGHT


def fuse_grasp_type(
    classifier_scores: dict[str, float],
    object_prior: dict[str, float],
    tolerance: float = 1e-6,
) -> tuple[str, dict[str, float]]:
    """Combine image-classifier grasp scores with the object's grasp prior.

    Posterior is the renormalized elementwise product. Both inputs must cover
    the same grasp vocabulary and sum to 1.
    """
    if set(classifier_scores) != set(object_prior):
        raise SkillParamsError("grasp vocabularies differ between scores and prior")
    if not classifier_scores:
        raise SkillParamsError("empty grasp vocabulary")
    for name, dist in (("scores", classifier_scores), ("prior", object_prior)):
        total = sum(dist.values())
        if abs(total - 1.0) > tolerance:
            raise SkillParamsError(f"grasp {name} sum to {total}, not 1")
        if any(p < 0 for p in dist.values()):
            raise SkillParamsError(f"grasp {name} contain a negative probability")
    product = {g: classifier_scores[g] * object_prior[g] for g in classifier_scores}
    total = sum(product.values())
    if total == 0:
        raise SkillParamsError("inconsistent prior")
    posterior = {g: p / total for g, p in sorted(product.items())}
    best = max(posterior, key=lambda g: posterior[g])  # ties: lexicographically first
    return best, posterior


def uniform_prior(vocabulary: list[str]) -> dict[str, float]:
    """The prior used when the target object is unknown."""
    if not vocabulary:
        raise SkillParamsError("empty grasp vocabulary")
    p = 1.0 / len(vocabulary)
    return {g: p for g in vocabulary}


def fit_hinge(points, residual_bound: float = 0.05) -> HingeParams:
    """Fit a circle in 3D to a temporally ordered hand trajectory.

    Plane by PCA (normal = direction of least variance), then an algebraic
    least-squares circle fit on the projected points, then start/end angles in
    a fixed in-plane basis. The returned axis is oriented so the sweep is
    positive; `sense` keeps the sign the motion had around the canonically
    oriented plane normal.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 3:
        raise SkillParamsError("insufficient points")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    if svals[1] < 1e-9 * svals[0]:
        raise SkillParamsError("degenerate geometry")
    normal = _canonical_sign(vt[2])
    e1 = _canonical_sign(vt[0])
    e2 = np.cross(normal, e1)

    x = centered @ e1
    y = centered @ e2
    dist_plane = centered @ normal

    # Algebraic circle fit: x^2 + y^2 = 2*a*x + 2*b*y + c
    design = np.column_stack([2 * x, 2 * y, np.ones_like(x)])
    rhs = x * x + y * y
    (a, b, c), *_ = np.linalg.lstsq(design, rhs, rcond=None)
    r_sq = c + a * a + b * b
    if r_sq <= 0:
        raise SkillParamsError("degenerate geometry")
    radius = float(np.sqrt(r_sq))
    center = centroid + a * e1 + b * e2

    theta = np.unwrap(np.arctan2(y - b, x - a))
    sweep = float(theta[-1] - theta[0])
    if sweep >= 0:
        axis, sense = normal, "opening"
        start, end = float(theta[0]), float(theta[-1])
    else:
        axis, sense = -normal, "closing"
        start, end = float(-theta[0]), float(-theta[-1])

    in_plane = np.sqrt((x - a) ** 2 + (y - b) ** 2)
    rms = float(np.sqrt(np.mean(dist_plane**2 + (in_plane - radius) ** 2)))
    if rms > residual_bound:
        raise SkillParamsError(f"poor fit (residual RMS {rms:.4f} m > {residual_bound} m)")

    return HingeParams(
        center=tuple(center),
        axis=tuple(axis),
        radius=radius,
        start_angle=start,
        end_angle=end,
        sense=sense,
    )


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip v so its largest-magnitude component is positive (deterministic basis)."""
    idx = int(np.argmax(np.abs(v)))
    return -v if v[idx] < 0 else v.copy()


def _build_codebook() -> np.ndarray:
    triples = [t for t in itertools.product((-1, 0, 1), repeat=3) if t != (0, 0, 0)]
    book = np.array(triples, dtype=np.float64)
    return book / np.linalg.norm(book, axis=1, keepdims=True)


# 26 unit vectors: normalized {-1,0,1}^3 minus the origin, in lexicographic
# order of the unnormalized triples.
DIRECTION_CODEBOOK = _build_codebook()
DIRECTION_CODEBOOK.setflags(write=False)


def quantize_direction(v) -> int:
    """Codebook index with the largest dot product against v (ties: smallest index)."""
    vec = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(vec)
    if norm <= 1e-9:
        raise SkillParamsError("undefined direction")
    return int(np.argmax(DIRECTION_CODEBOOK @ (vec / norm)))


def encode_arm_pose(
    left_shoulder,
    left_elbow,
    left_wrist,
    right_shoulder,
    right_elbow,
    right_wrist,
) -> ArmPoseCode:
    """Quantize upper- and lower-arm directions of both arms at one instant."""

    def direction(a, b) -> int:
        try:
            return quantize_direction(np.asarray(b, dtype=np.float64) - np.asarray(a, dtype=np.float64))
        except SkillParamsError:
            raise SkillParamsError("undefined direction (coincident joints)") from None

    return ArmPoseCode(
        left_upper=direction(left_shoulder, left_elbow),
        left_lower=direction(left_elbow, left_wrist),
        right_upper=direction(right_shoulder, right_elbow),
        right_lower=direction(right_elbow, right_wrist),
    )


def extract_trajectory(
    track: DetectionTrack,
    intrinsics: CameraIntrinsics,
    laterality: Laterality,
    fps: float,
    confidence_threshold: float = 0.5,
) -> tuple[tuple[float, tuple[float, float, float]], ...]:
    """Back-project the selected hand for every confident frame.

    Frames under the confidence threshold (or with no detection) are skipped;
    zero usable frames is an error, which the pipeline routes to user review.
    """
    if fps <= 0:
        raise SkillParamsError("fps must be positive")
    kind = "left_hand" if laterality is Laterality.LEFT else "right_hand"
    out = []
    for frame in track.frames():
        hit = track.get(frame, kind)
        if hit is None:
            continue
        x, y, depth, conf = hit
        if conf < confidence_threshold:
            continue
        point = backproject(x, y, depth, intrinsics)
        out.append((frame / fps, (float(point[0]), float(point[1]), float(point[2]))))
    if not out:
        raise SkillParamsError("trajectory unavailable")
    return tuple(out)
