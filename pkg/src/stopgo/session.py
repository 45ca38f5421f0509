"""Two-stage teaching pipeline: ingest bundle, segment, review, transcribe, correct, compile.

A session is event-sourced: its directory holds the bundle reference, an
append-only audit log of user edits, and the outputs. Loading a session
replays the log against a freshly segmented state, so the compiled task model
is a pure function of (bundle, audit log) and survives process restarts.
"""

from __future__ import annotations

import json
import uuid
import wave
from dataclasses import dataclass, field, fields, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from . import pnm
from .recognition import (
    RecognitionError,
    TaskSentenceClassifier,
    extract_object_name,
    load_seed_corpus,
    train,
)
from .segmentation import (
    Frame,
    Segment,
    SegmentStatus,
    SegmentationError,
    SignalDiagnostics,
    frame_to_sample,
    load_motion_csv,
    motion_signal,
    rgb_to_luminance,
    run_signal_chain,
    save_diagnostics,
    slice_segments,
)
from .skillparams import (
    CameraIntrinsics,
    DetectionTrack,
    SkillParamsError,
    backproject,
    encode_arm_pose,
    extract_trajectory,
    fit_hinge,
    fuse_grasp_type,
    hand_laterality,
    load_grasp_priors,
    load_track_csv,
    uniform_prior,
)
from .taskmodel import (
    Laterality,
    SkillParameters,
    TaskLabel,
    TaskModel,
    TaskStep,
    TOOL_VERSION,
    serialize,
    validate_gmr,
)

__all__ = [
    "SessionError",
    "BundleError",
    "PhaseError",
    "EditError",
    "CompileFailure",
    "Phase",
    "DemoBundle",
    "load_bundle",
    "SessionConfig",
    "Session",
    "TranscriptionBackend",
    "ScriptTranscriptionBackend",
    "ExternalTranscriptionBackend",
    "create_session",
    "load_session",
    "default_classifier",
]


class SessionError(Exception):
    pass


class BundleError(SessionError):
    """Malformed bundle; the message names the offending manifest field."""


class PhaseError(SessionError):
    def __init__(self, message: str, phase: "Phase"):
        super().__init__(message)
        self.phase = phase


class EditError(SessionError):
    def __init__(self, message: str, not_found: bool = False):
        super().__init__(message)
        self.not_found = not_found


class CompileFailure(SessionError):
    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or []


class Phase(Enum):
    CREATED = "Created"
    SEGMENTED = "Segmented"
    SEGMENTS_CONFIRMED = "SegmentsConfirmed"
    TRANSCRIBED = "Transcribed"
    TRANSCRIPTS_CONFIRMED = "TranscriptsConfirmed"
    COMPILED = "Compiled"
    FAILED = "Failed"


# --- bundle ------------------------------------------------------------------


@dataclass(frozen=True)
class DemoBundle:
    root: Path
    bundle_id: str
    recorded: str
    video_rate: float
    audio_rate: float
    intrinsics: CameraIntrinsics
    frame_paths: tuple[Path, ...]
    track_path: Path | None = None
    objects_path: Path | None = None
    grasp_priors_path: Path | None = None
    grasp_scores_path: Path | None = None
    scripts: dict[int, str] = field(default_factory=dict)
    motion_csv: Path | None = None
    audio_path: Path | None = None

    @property
    def frame_count(self) -> int:
        return len(self.frame_paths)


def load_bundle(root: str | Path) -> DemoBundle:
    """Parse and validate a bundle directory; errors name the bad manifest field."""
    root = Path(root)
    manifest = root / "manifest.txt"
    if not root.is_dir():
        raise BundleError(f"bundle not found: {root}")
    if not manifest.is_file():
        raise BundleError(f"missing manifest.txt in {root}")
    lines = manifest.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "bundle v1":
        raise BundleError("manifest must start with 'bundle v1'")

    values: dict[str, str] = {}
    frames: list[Path] = []
    scripts: dict[int, str] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        key, _, rest = line.partition(" ")
        if key == "frame":
            frames.append(root / rest)
        elif key == "script":
            ordinal, _, text = rest.partition(" ")
            try:
                scripts[int(ordinal)] = text
            except ValueError:
                raise BundleError(f"manifest line {lineno}: bad script ordinal {ordinal!r}") from None
        else:
            values[key] = rest

    def need(key: str) -> str:
        if key not in values:
            raise BundleError(f"manifest missing field '{key}'")
        return values[key]

    def rate(key: str) -> float:
        try:
            r = float(need(key))
        except ValueError:
            raise BundleError(f"field '{key}' is not a number") from None
        if r <= 0:
            raise BundleError(f"field '{key}' must be positive")
        return r

    def optional_file(key: str) -> Path | None:
        if key not in values:
            return None
        path = root / values[key]
        if not path.is_file():
            raise BundleError(f"missing file for field '{key}': {path}")
        return path

    bundle_id = need("id")
    video_rate = rate("video_rate")
    audio_rate = rate("audio_rate")
    parts = need("intrinsics").split()
    if len(parts) != 4:
        raise BundleError("field 'intrinsics' needs fx fy cx cy")
    try:
        fx, fy, cx, cy = (float(p) for p in parts)
        intrinsics = CameraIntrinsics(fx=fx, fy=fy, cx=cx, cy=cy)
    except (ValueError, SkillParamsError) as exc:
        raise BundleError(f"field 'intrinsics': {exc}") from None

    if not frames:
        raise BundleError("empty frame list")
    for p in frames:
        if not p.is_file():
            raise BundleError(f"missing frame file: {p}")

    return DemoBundle(
        root=root,
        bundle_id=bundle_id,
        recorded=values.get("recorded", ""),
        video_rate=video_rate,
        audio_rate=audio_rate,
        intrinsics=intrinsics,
        frame_paths=tuple(frames),
        track_path=optional_file("track"),
        objects_path=optional_file("objects"),
        grasp_priors_path=optional_file("grasp_priors"),
        grasp_scores_path=optional_file("grasp_scores"),
        scripts=scripts,
        motion_csv=optional_file("motion_csv"),
        audio_path=optional_file("audio"),
    )


def load_bundle_frame(bundle: DemoBundle, index: int) -> Frame:
    image = pnm.read_image(bundle.frame_paths[index])
    plane = rgb_to_luminance(image) if image.ndim == 3 else image
    return Frame(plane=plane, timestamp=index / bundle.video_rate)


# --- transcription backends ---------------------------------------------------


class TranscriptionBackend:
    """Turns one active segment into text. Implementations may raise; the
    pipeline then leaves the transcript empty and flags the segment."""

    name = "abstract"

    def transcribe(self, ordinal: int, segment: Segment, audio_range: tuple[int, int] | None) -> str:
        raise NotImplementedError


class ScriptTranscriptionBackend(TranscriptionBackend):
    """Deterministic backend returning pre-scripted text per active segment."""

    name = "script"

    def __init__(self, scripts: dict[int, str]):
        self.scripts = scripts

    def transcribe(self, ordinal, segment, audio_range):
        if ordinal not in self.scripts:
            raise SessionError(f"no scripted transcript for segment ordinal {ordinal}")
        return self.scripts[ordinal]


class ExternalTranscriptionBackend(TranscriptionBackend):
    """Adapter for a network speech-recognition service; disabled unless configured."""

    name = "external"

    def __init__(self, endpoint: str | None = None):
        self.endpoint = endpoint

    def transcribe(self, ordinal, segment, audio_range):
        if not self.endpoint:
            raise SessionError("external transcription backend is not configured")
        import urllib.request

        req = urllib.request.Request(
            self.endpoint,
            data=json.dumps({"ordinal": ordinal, "range": audio_range}).encode("utf-8"),
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(req, timeout=30) as resp:
            return json.loads(resp.read().decode("utf-8"))["text"]


# --- configuration -------------------------------------------------------------


@dataclass(frozen=True)
class SessionConfig:
    window: int = 50
    half_window: int = 5
    hampel_k: float = 3.0
    cutoff: float = 0.5
    min_spacing: float = 0.5
    rel_threshold: float = 0.085
    confidence_threshold: float = 0.5
    residual_bound: float = 0.05
    min_active_segments: int = 3
    alpha: float = 1.0

    _INT_FIELDS = ("window", "half_window", "min_active_segments")

    def as_line(self) -> str:
        return " ".join(f"{f.name}={getattr(self, f.name)!r}" for f in fields(self))

    @classmethod
    def from_line(cls, line: str) -> "SessionConfig":
        raw = {}
        for chunk in line.split():
            key, _, value = chunk.partition("=")
            raw[key] = value
        typed = {}
        for f in fields(cls):
            if f.name in raw:
                cast = int if f.name in cls._INT_FIELDS else float
                typed[f.name] = cast(raw[f.name])
        return cls(**typed)


# --- daemon dispatch ------------------------------------------------------------

TRAJECTORY_LABELS = frozenset(
    label for label in TaskLabel if label.is_manipulative
)
HINGE_LABELS = frozenset({TaskLabel.PTG51, TaskLabel.PTG53})


_SEED_CLASSIFIER: TaskSentenceClassifier | None = None


def default_classifier(alpha: float = 1.0) -> TaskSentenceClassifier:
    """Classifier trained on the bundled seed corpus (cached for alpha=1)."""
    global _SEED_CLASSIFIER
    if alpha == 1.0:
        if _SEED_CLASSIFIER is None:
            _SEED_CLASSIFIER = train(load_seed_corpus(), alpha=1.0)
        return _SEED_CLASSIFIER
    return train(load_seed_corpus(), alpha=alpha)


# --- the session ----------------------------------------------------------------


class Session:
    """Mutable review state machine over one demonstration bundle.

    All mutations go through apply(), which appends to the audit log unless
    replaying. Repeating the log over a fresh session reproduces the state.
    """

    def __init__(
        self,
        session_id: str,
        bundle: DemoBundle,
        directory: Path,
        config: SessionConfig,
        diagnostics: SignalDiagnostics,
        segments: list[Segment],
    ):
        self.session_id = session_id
        self.bundle = bundle
        self.directory = directory
        self.config = config
        self.diagnostics = diagnostics
        self.segments = segments
        self.phase = Phase.SEGMENTED
        self.flagged: set[int] = set()
        self.audio_ranges: list[tuple[int, int]] | None = None
        self.model: TaskModel | None = None
        self.last_failure: dict | None = None

    # -- helpers

    def _require_phase(self, *phases: Phase):
        if self.phase not in phases:
            want = " or ".join(p.value for p in phases)
            raise PhaseError(f"wrong phase: {self.phase.value} (need {want})", self.phase)

    def active_segments(self) -> list[tuple[int, Segment]]:
        return [(i, s) for i, s in enumerate(self.segments) if s.active]

    def _audit_path(self) -> Path:
        return self.directory / "audit.log"

    def _append_audit(self, op: str, args: dict):
        stamp = datetime.now(timezone.utc).isoformat()
        record = f"{stamp}\t{op}\t{json.dumps(args, sort_keys=True)}\n"
        with open(self._audit_path(), "a", encoding="utf-8") as fh:
            fh.write(record)

    # -- operations (each dispatchable through apply for replay)

    def apply(self, op: str, args: dict, replay: bool = False):
        handler = {
            "merge_segments": self._do_merge,
            "ignore_segment": self._do_ignore,
            "confirm_segments": self._do_confirm_segments,
            "set_transcript": self._do_set_transcript,
            "confirm_transcripts": self._do_confirm_transcripts,
            "compile": self._do_compile,
        }.get(op)
        if handler is None:
            raise SessionError(f"unknown audit op {op!r}")
        return handler(args, replay)

    def merge_segments(self, first: int, second: int):
        return self.apply("merge_segments", {"first": first, "second": second})

    def _do_merge(self, args: dict, replay: bool):
        first, second = args["first"], args["second"]
        self._require_phase(Phase.SEGMENTED)
        n = len(self.segments)
        if not (0 <= first < n and 0 <= second < n):
            raise EditError(f"segment index out of range (have {n})", not_found=True)
        if second != first + 1:
            raise EditError("not adjacent")
        a, b = self.segments[first], self.segments[second]
        if not (a.active and b.active):
            raise EditError("can only merge active segments")
        merged = a.merged_with(b)
        self.segments[first : second + 1] = [merged]
        if not replay:
            self._append_audit("merge_segments", args)

    def ignore_segment(self, index: int):
        return self.apply("ignore_segment", {"index": index})

    def _do_ignore(self, args: dict, replay: bool):
        index = args["index"]
        self._require_phase(Phase.SEGMENTED)
        if not 0 <= index < len(self.segments):
            raise EditError(f"segment index out of range (have {len(self.segments)})", not_found=True)
        seg = self.segments[index]
        if seg.active:
            self.segments[index] = replace(seg, status=SegmentStatus.IGNORED)
        if not replay:
            self._append_audit("ignore_segment", args)

    def confirm_segments(self, backend: TranscriptionBackend):
        """Freeze the segment set, re-slice audio, and transcribe each active segment."""
        self._require_phase(Phase.SEGMENTED)
        active = self.active_segments()
        if len(active) < self.config.min_active_segments:
            raise EditError(
                f"too few segments: {len(active)} active, need {self.config.min_active_segments}"
            )
        ranges = self._audio_ranges_for(active)
        transcripts: dict[str, str] = {}
        failed: list[int] = []
        for ordinal, (index, segment) in enumerate(active):
            audio_range = ranges[ordinal] if ranges else None
            try:
                text = backend.transcribe(ordinal, segment, audio_range)
            except Exception:
                text = ""
                failed.append(index)
            transcripts[str(index)] = text
        args = {"backend": backend.name, "transcripts": transcripts, "failed": failed}
        return self.apply("confirm_segments", args)

    def _do_confirm_segments(self, args: dict, replay: bool):
        self._require_phase(Phase.SEGMENTED)
        active = self.active_segments()
        if len(active) < self.config.min_active_segments:
            raise EditError(
                f"too few segments: {len(active)} active, need {self.config.min_active_segments}"
            )
        self.phase = Phase.SEGMENTS_CONFIRMED
        self.audio_ranges = self._audio_ranges_for(active)
        for index, segment in active:
            text = args["transcripts"].get(str(index), "")
            self.segments[index] = replace(segment, transcript=text)
        self.flagged = set(args.get("failed", []))
        self.phase = Phase.TRANSCRIBED
        if not replay:
            self._append_audit("confirm_segments", args)

    def _audio_ranges_for(self, active) -> list[tuple[int, int]] | None:
        if self.bundle.audio_path is None:
            return None
        with wave.open(str(self.bundle.audio_path), "rb") as wav:
            sample_count = wav.getnframes()
        ranges = []
        for _, segment in active:
            a = frame_to_sample(segment.start, self.bundle.audio_rate, self.bundle.video_rate)
            b = frame_to_sample(segment.end, self.bundle.audio_rate, self.bundle.video_rate)
            ranges.append((min(a, sample_count), min(b, sample_count)))
        return ranges

    def set_transcript(self, index: int, text: str):
        return self.apply("set_transcript", {"index": index, "text": text})

    def _do_set_transcript(self, args: dict, replay: bool):
        index, text = args["index"], args["text"]
        self._require_phase(Phase.TRANSCRIBED)
        if not 0 <= index < len(self.segments):
            raise EditError(f"segment index out of range (have {len(self.segments)})", not_found=True)
        seg = self.segments[index]
        if not seg.active:
            raise EditError("cannot set transcript on an ignored segment")
        self.segments[index] = replace(seg, transcript=text)
        self.flagged.discard(index)
        if not replay:
            self._append_audit("set_transcript", args)

    def confirm_transcripts(self):
        return self.apply("confirm_transcripts", {})

    def _do_confirm_transcripts(self, args: dict, replay: bool):
        self._require_phase(Phase.TRANSCRIBED)
        self.phase = Phase.TRANSCRIPTS_CONFIRMED
        if not replay:
            self._append_audit("confirm_transcripts", args)

    def compile(self):
        return self.apply("compile", {})

    def _do_compile(self, args: dict, replay: bool):
        # Recompiling a compiled session is allowed and reproduces the same bytes.
        self._require_phase(Phase.TRANSCRIPTS_CONFIRMED, Phase.COMPILED)
        classifier = default_classifier(self.config.alpha)
        try:
            model = self._build_model(classifier)
        except CompileFailure as failure:
            self.phase = Phase.TRANSCRIBED  # re-editable; failure details retained
            self.last_failure = {
                "message": str(failure),
                "violations": failure.violations,
            }
            if not replay:
                self._append_audit("compile", args)
            raise
        self.model = model
        document = serialize(model)
        (self.directory / "taskmodel.txt").write_text(document, encoding="utf-8")
        self.phase = Phase.COMPILED
        self.last_failure = None
        if not replay:
            self._append_audit("compile", args)
        return model

    # -- compile internals

    def _build_model(self, classifier: TaskSentenceClassifier) -> TaskModel:
        active = self.active_segments()
        labels: list[TaskLabel] = []
        for index, segment in active:
            text = segment.transcript or ""
            try:
                labels.append(classifier.predict(text).label)
            except RecognitionError as exc:
                raise CompileFailure(f"segment {index}: {exc}") from None

        check = validate_gmr(labels)
        if not check.ok:
            raise CompileFailure(
                "GMR violation: " + "; ".join(str(v) for v in check.violations),
                violations=[str(v) for v in check.violations],
            )

        track = load_track_csv(self.bundle.track_path) if self.bundle.track_path else DetectionTrack()
        vocabulary = self._object_vocabulary()
        grasp_scores = self._grasp_scores()
        priors = (
            load_grasp_priors(self.bundle.grasp_priors_path)
            if self.bundle.grasp_priors_path
            else {}
        )

        laterality: Laterality | None = None
        steps: list[TaskStep] = []
        for (index, segment), label in zip(active, labels):
            params: dict = {}
            seg_track = track.sliced(segment.start, segment.end)
            if label is TaskLabel.GRASP:
                laterality = self._grasp_daemons(
                    index, segment, seg_track, vocabulary, grasp_scores, priors, params
                )
            if label in TRAJECTORY_LABELS:
                if laterality is None:
                    raise CompileFailure(
                        f"segment {index}: trajectory daemon: hand laterality unresolved"
                    )
                try:
                    trajectory = extract_trajectory(
                        seg_track,
                        self.bundle.intrinsics,
                        laterality,
                        fps=self.bundle.video_rate,
                        confidence_threshold=self.config.confidence_threshold,
                    )
                except SkillParamsError as exc:
                    raise CompileFailure(f"segment {index}: trajectory daemon: {exc}") from None
                params["hand_trajectory"] = trajectory
                if label in HINGE_LABELS:
                    points = [p for _, p in trajectory]
                    try:
                        params["hinge"] = fit_hinge(points, residual_bound=self.config.residual_bound)
                    except SkillParamsError as exc:
                        raise CompileFailure(f"segment {index}: hinge daemon: {exc}") from None
            start_pose, end_pose = self._pose_daemon(index, segment, seg_track)
            params["start_pose"] = start_pose
            params["end_pose"] = end_pose
            steps.append(
                TaskStep(
                    label=label,
                    params=SkillParameters(**params),
                    source_segment=index,
                    transcript=segment.transcript or "",
                )
            )

        return TaskModel(
            steps=tuple(steps),
            bundle_id=self.bundle.bundle_id,
            created=self.bundle.recorded,
            tool_version=TOOL_VERSION,
        )

    def _grasp_daemons(
        self, index, segment, seg_track, vocabulary, grasp_scores, priors, params
    ) -> Laterality:
        first, last = segment.start, segment.end - 1
        name = extract_object_name(segment.transcript or "", vocabulary) if vocabulary else None
        if name is not None:
            params["object_name"] = name

        obj = seg_track.get(first, "object")
        if obj is None or obj[3] < self.config.confidence_threshold:
            raise CompileFailure(f"segment {index}: object daemon: detection unavailable")
        x, y, depth, _ = obj
        try:
            position = backproject(x, y, depth, self.bundle.intrinsics)
        except SkillParamsError as exc:
            raise CompileFailure(f"segment {index}: object daemon: {exc}") from None
        params["object_position"] = (float(position[0]), float(position[1]), float(position[2]))

        left = seg_track.get(last, "left_hand")
        right = seg_track.get(last, "right_hand")
        try:
            laterality = hand_laterality(
                (x, y),
                None if left is None or left[3] < self.config.confidence_threshold else left[:2],
                None if right is None or right[3] < self.config.confidence_threshold else right[:2],
            )
        except SkillParamsError as exc:
            raise CompileFailure(f"segment {index}: laterality daemon: {exc}") from None
        params["hand_laterality"] = laterality

        if grasp_scores:
            prior = priors.get(name) if name else None
            if prior is None:
                prior = uniform_prior(sorted(grasp_scores))
            try:
                grasp, _ = fuse_grasp_type(grasp_scores, prior)
            except SkillParamsError as exc:
                raise CompileFailure(f"segment {index}: grasp daemon: {exc}") from None
            params["grasp_type"] = grasp
        return laterality

    def _pose_daemon(self, index, segment, seg_track):
        poses = []
        for frame in (segment.start, segment.end - 1):
            joints = []
            for kind in ("l_shoulder", "l_elbow", "l_wrist", "r_shoulder", "r_elbow", "r_wrist"):
                hit = seg_track.get(frame, kind)
                if hit is None or hit[3] < self.config.confidence_threshold:
                    raise CompileFailure(
                        f"segment {index}: pose daemon: {kind} missing at frame {frame}"
                    )
                joints.append(hit[:3])
            try:
                poses.append(encode_arm_pose(*joints))
            except SkillParamsError as exc:
                raise CompileFailure(f"segment {index}: pose daemon: {exc}") from None
        return poses[0], poses[1]

    def _object_vocabulary(self) -> list[str]:
        if self.bundle.objects_path is None:
            return []
        return [
            line.strip().lower()
            for line in self.bundle.objects_path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]

    def _grasp_scores(self) -> dict[str, float]:
        if self.bundle.grasp_scores_path is None:
            return {}
        scores: dict[str, float] = {}
        lines = self.bundle.grasp_scores_path.read_text(encoding="utf-8").splitlines()
        for line in lines[1:]:  # header: grasp,probability
            if not line.strip():
                continue
            grasp, _, prob = line.partition(",")
            scores[grasp] = float(prob)
        return scores

    # -- artifacts

    def serialized_model(self) -> str | None:
        path = self.directory / "taskmodel.txt"
        return path.read_text(encoding="utf-8") if path.is_file() else None

    def thumbnail_png(self, index: int) -> bytes:
        """Mid-frame PNG of one segment; cached next to the session outputs."""
        if not 0 <= index < len(self.segments):
            raise EditError(f"segment index out of range (have {len(self.segments)})", not_found=True)
        segment = self.segments[index]
        mid = (segment.start + segment.end - 1) // 2
        cache = self.directory / "thumbs" / f"f{mid:06d}.png"
        if cache.is_file():
            return cache.read_bytes()
        frame = load_bundle_frame(self.bundle, mid)
        data = pnm.encode_png_gray(frame.plane)
        cache.parent.mkdir(parents=True, exist_ok=True)
        cache.write_bytes(data)
        return data


# --- creation and replay ---------------------------------------------------------


def _segment_bundle(bundle: DemoBundle, config: SessionConfig) -> tuple[SignalDiagnostics, list[Segment]]:
    if bundle.motion_csv is not None:
        raw = load_motion_csv(bundle.motion_csv, sample_rate=bundle.video_rate)
    else:
        frames = [load_bundle_frame(bundle, i) for i in range(bundle.frame_count)]
        raw = motion_signal(frames, window=config.window)
    diag = run_signal_chain(
        raw,
        half_window=config.half_window,
        k=config.hampel_k,
        cutoff=config.cutoff,
        min_spacing=config.min_spacing,
        rel_threshold=config.rel_threshold,
    )
    segments = slice_segments(diag.stops, bundle.frame_count)
    return diag, segments


def create_session(
    bundle_dir: str | Path,
    data_dir: str | Path,
    session_id: str | None = None,
    config: SessionConfig | None = None,
) -> Session:
    """Ingest a bundle, run the segmentation chain, and persist a new session."""
    bundle = load_bundle(bundle_dir)
    config = config or SessionConfig()
    session_id = session_id or f"{bundle.bundle_id}-{uuid.uuid4().hex[:8]}"
    directory = Path(data_dir) / session_id
    if directory.exists():
        raise SessionError(f"session directory already exists: {directory}")
    directory.mkdir(parents=True)

    try:
        diagnostics, segments = _segment_bundle(bundle, config)
    except SegmentationError as exc:
        raise BundleError(str(exc)) from None

    session = Session(session_id, bundle, directory, config, diagnostics, segments)

    meta = [
        "session v1",
        f"id {session_id}",
        f"bundle {bundle.root.resolve()}",
        f"config {config.as_line()}",
    ]
    (directory / "meta.txt").write_text("".join(m + "\n" for m in meta), encoding="utf-8")
    (directory / "manifest.txt").write_bytes((bundle.root / "manifest.txt").read_bytes())
    (directory / "audit.log").touch()
    save_diagnostics(directory / "signal.csv", diagnostics)
    for i in range(len(segments)):
        session.thumbnail_png(i)
    return session


def load_session(data_dir: str | Path, session_id: str) -> Session:
    """Rebuild a session by re-segmenting its bundle and replaying the audit log."""
    directory = Path(data_dir) / session_id
    meta_path = directory / "meta.txt"
    if not meta_path.is_file():
        raise SessionError(f"no session at {directory}")
    bundle_dir: Path | None = None
    config = SessionConfig()
    for line in meta_path.read_text(encoding="utf-8").splitlines():
        key, _, rest = line.partition(" ")
        if key == "bundle":
            bundle_dir = Path(rest)
        elif key == "config":
            config = SessionConfig.from_line(rest)
    if bundle_dir is None:
        raise SessionError("session meta is missing the bundle path")

    bundle = load_bundle(bundle_dir)
    diagnostics, segments = _segment_bundle(bundle, config)
    session = Session(session_id, bundle, directory, config, diagnostics, segments)
    for lineno, record in enumerate((directory / "audit.log").read_text(encoding="utf-8").splitlines(), 1):
        if not record.strip():
            continue
        try:
            _, op, args_json = record.split("\t", 2)
            args = json.loads(args_json)
        except ValueError as exc:
            raise SessionError(f"audit.log line {lineno}: malformed record: {exc}") from None
        try:
            session.apply(op, args, replay=True)
        except CompileFailure:
            pass  # a logged failed compile leaves the session re-editable, as it did live
    return session
