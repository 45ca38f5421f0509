"""Task-model intermediate representation: labels, skill parameters, GMR grammar, serialization."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

__all__ = [
    "TaskLabel",
    "Laterality",
    "ArmPoseCode",
    "HingeParams",
    "SkillParameters",
    "TaskStep",
    "TaskModel",
    "GmrViolation",
    "GmrValidation",
    "TaskModelError",
    "TaskModelParseError",
    "validate_gmr",
    "serialize",
    "parse",
]

TOOL_VERSION = "0.1.0"


class TaskModelError(ValueError):
    """Invalid task-model content (bad invariant, bad value)."""


class TaskModelParseError(TaskModelError):
    """Malformed task-model document; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TaskLabel(enum.Enum):
    """Primitive task vocabulary: two boundary tasks plus twelve manipulative ones."""

    GRASP = ("Grasp", "Grasping")
    PTG11 = ("PTG11", "Picking")
    PTG12 = ("PTG12", "Bringing")
    PTG13 = ("PTG13", "Placing")
    PTG31 = ("PTG31", "Sliding_to_open")
    PTG33 = ("PTG33", "Sliding_to_close")
    PTG51 = ("PTG51", "Rotating_hinge_to_open")
    PTG53 = ("PTG53", "Rotating_hinge_to_close")
    STG2 = ("STG2", "Wiping")
    STG3 = ("STG3", "Peeling")
    STG5 = ("STG5", "Pouring")
    STG6 = ("STG6", "Holding")
    MTG1 = ("MTG1", "Cutting")
    RELEASE = ("Release", "Releasing")

    def __init__(self, code: str, human_name: str):
        self.code = code
        self.human_name = human_name

    @property
    def is_boundary(self) -> bool:
        return self in (TaskLabel.GRASP, TaskLabel.RELEASE)

    @property
    def is_manipulative(self) -> bool:
        return not self.is_boundary

    @classmethod
    def from_code(cls, code: str) -> "TaskLabel":
        for label in cls:
            if label.code == code:
                return label
        raise TaskModelError(f"unknown task label {code!r}")


class Laterality(enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"


@dataclass(frozen=True)
class ArmPoseCode:
    """Quantized arm directions: four codebook indices, each in [0, 26)."""

    left_upper: int
    left_lower: int
    right_upper: int
    right_lower: int

    def __post_init__(self):
        for name in ("left_upper", "left_lower", "right_upper", "right_lower"):
            v = getattr(self, name)
            if not isinstance(v, int) or not 0 <= v < 26:
                raise TaskModelError(f"arm pose index {name}={v!r} outside [0, 26)")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.left_upper, self.left_lower, self.right_upper, self.right_lower)


@dataclass(frozen=True)
class HingeParams:
    """Rotation-axis description of a hinged trajectory.

    The axis is oriented so the angular sweep from start_angle to end_angle is
    positive; `sense` keeps the pre-flip sign of the fitted motion as a
    cross-check against the verbal open/close label.
    """

    center: tuple[float, float, float]
    axis: tuple[float, float, float]
    radius: float
    start_angle: float
    end_angle: float
    sense: str  # "opening" | "closing"

    def __post_init__(self):
        norm = sum(c * c for c in self.axis) ** 0.5
        if abs(norm - 1.0) > 1e-3:
            raise TaskModelError(f"hinge axis not unit length (|axis|={norm})")
        # Renormalize so the unit invariant holds to machine precision even for
        # axes read back from the 6-decimal serialized form.
        object.__setattr__(self, "axis", tuple(c / norm for c in self.axis))
        if self.radius <= 0:
            raise TaskModelError("hinge radius must be positive")
        if abs(self.end_angle - self.start_angle) > 2 * 3.141592653589793 + 1e-9:
            raise TaskModelError("hinge sweep exceeds a full turn")
        if self.sense not in ("opening", "closing"):
            raise TaskModelError(f"unknown hinge sense {self.sense!r}")


@dataclass(frozen=True)
class SkillParameters:
    """Per-task extracted quantities; which fields are present depends on the label."""

    object_name: str | None = None
    object_position: tuple[float, float, float] | None = None
    hand_laterality: Laterality | None = None
    grasp_type: str | None = None
    hand_trajectory: tuple[tuple[float, tuple[float, float, float]], ...] | None = None
    hinge: HingeParams | None = None
    start_pose: ArmPoseCode | None = None
    end_pose: ArmPoseCode | None = None

    def __post_init__(self):
        if self.hand_trajectory is not None:
            times = [t for t, _ in self.hand_trajectory]
            if any(b <= a for a, b in zip(times, times[1:])):
                raise TaskModelError("trajectory timestamps must be strictly increasing")


@dataclass(frozen=True)
class TaskStep:
    label: TaskLabel
    params: SkillParameters = field(default_factory=SkillParameters)
    source_segment: int = 0
    transcript: str = ""


@dataclass(frozen=True)
class TaskModel:
    """One GMR operation: Grasp, at least one manipulative task, Release."""

    steps: tuple[TaskStep, ...]
    bundle_id: str = ""
    created: str = ""
    tool_version: str = TOOL_VERSION


@dataclass(frozen=True)
class GmrViolation:
    position: int | None
    rule: str

    def __str__(self) -> str:
        where = "sequence" if self.position is None else f"position {self.position}"
        return f"{where}: {self.rule}"


@dataclass(frozen=True)
class GmrValidation:
    violations: tuple[GmrViolation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_gmr(labels: list[TaskLabel] | tuple[TaskLabel, ...]) -> GmrValidation:
    """Check a label sequence against the GMR grammar.

    Rules: starts with Grasp, ends with Release, no boundary task in an
    interior position, and at least one manipulative task in between.
    Violations are reported with the offending position; an invalid sequence
    is a result, not an error.
    """
    if not labels:
        raise TaskModelError("label sequence is empty")
    violations: list[GmrViolation] = []
    if labels[0] is not TaskLabel.GRASP:
        violations.append(GmrViolation(0, "must start with Grasp"))
    if labels[-1] is not TaskLabel.RELEASE:
        violations.append(GmrViolation(len(labels) - 1, "must end with Release"))
    interior = labels[1:-1]
    for offset, label in enumerate(interior, start=1):
        if label.is_boundary:
            violations.append(GmrViolation(offset, f"boundary task {label.code} in interior"))
    if not any(label.is_manipulative for label in interior):
        violations.append(GmrViolation(None, "no manipulative interior task"))
    return GmrValidation(tuple(violations))


# --- serialization -----------------------------------------------------------
#
# Text format, UTF-8, line-oriented:
#
#   taskmodel v1
#   meta bundle = <id>
#   meta created = <timestamp>
#   meta tool = <version>
#   step <i>: label=<CODE>
#     source <segment index>
#     transcript <text>
#     param <name> = <value>
#     ...
#
# 3D points are "x,y,z" with 6 fractional digits; hand_trajectory is declared
# with its point count and followed by one "<t> <x,y,z>" line per point.
# Params appear in the fixed SkillParameters field order.

_HEADER = "taskmodel v1"

_PARAM_ORDER = (
    "object_name",
    "object_position",
    "hand_laterality",
    "grasp_type",
    "hand_trajectory",
    "hinge",
    "start_pose",
    "end_pose",
)


def _fmt_float(x: float) -> str:
    text = f"{x:.6f}"
    return "0.000000" if text == "-0.000000" else text


def _fmt_point(p: tuple[float, float, float]) -> str:
    return ",".join(_fmt_float(c) for c in p)


def _parse_float(text: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise TaskModelParseError(f"bad number {text!r}", line) from None


def _parse_point(text: str, line: int) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise TaskModelParseError(f"expected x,y,z point, got {text!r}", line)
    x, y, z = (_parse_float(p, line) for p in parts)
    return (x, y, z)


def serialize(model: TaskModel) -> str:
    """Render a valid TaskModel as its canonical text document."""
    check = validate_gmr([s.label for s in model.steps])
    if not check.ok:
        raise TaskModelError(
            "cannot serialize GMR-invalid model: " + "; ".join(str(v) for v in check.violations)
        )
    lines = [_HEADER]
    lines.append(f"meta bundle = {_escape(model.bundle_id)}")
    lines.append(f"meta created = {_escape(model.created)}")
    lines.append(f"meta tool = {_escape(model.tool_version)}")
    for i, step in enumerate(model.steps):
        lines.append(f"step {i}: label={step.label.code}")
        lines.append(f"  source {step.source_segment}")
        lines.append(f"  transcript {_escape(step.transcript)}")
        p = step.params
        for name in _PARAM_ORDER:
            value = getattr(p, name)
            if value is None:
                continue
            if name == "object_name" or name == "grasp_type":
                lines.append(f"  param {name} = {_escape(value)}")
            elif name == "object_position":
                lines.append(f"  param {name} = {_fmt_point(value)}")
            elif name == "hand_laterality":
                lines.append(f"  param {name} = {value.value}")
            elif name == "hand_trajectory":
                lines.append(f"  param {name} = {len(value)}")
                for t, point in value:
                    lines.append(f"    {_fmt_float(t)} {_fmt_point(point)}")
            elif name == "hinge":
                lines.append(
                    f"  param hinge = center={_fmt_point(value.center)}"
                    f" axis={_fmt_point(value.axis)}"
                    f" radius={_fmt_float(value.radius)}"
                    f" start={_fmt_float(value.start_angle)}"
                    f" end={_fmt_float(value.end_angle)}"
                    f" sense={value.sense}"
                )
            else:  # start_pose / end_pose
                lines.append(f"  param {name} = " + ",".join(str(i) for i in value.as_tuple()))
    return "\n".join(lines) + "\n"


def _escape(text: str) -> str:
    if "\n" in text or "\r" in text:
        raise TaskModelError("text fields must be single-line")
    return text


def parse(document: str | bytes) -> TaskModel:
    """Parse a task-model document; rejects malformed text and GMR-invalid sequences."""
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    lines = document.splitlines()
    if not lines or lines[0] != _HEADER:
        raise TaskModelParseError(f"expected header {_HEADER!r}", 1)

    meta = {"bundle": "", "created": "", "tool": ""}
    steps: list[TaskStep] = []
    n = 1  # current line index (0-based) into lines

    while n < len(lines) and lines[n].startswith("meta "):
        key, _, value = lines[n][len("meta "):].partition(" = ")
        if key not in meta:
            raise TaskModelParseError(f"unknown meta field {key!r}", n + 1)
        meta[key] = value
        n += 1

    while n < len(lines):
        line = lines[n]
        if not line.strip():
            n += 1
            continue
        head = _parse_step_header(line, n + 1, expected_index=len(steps))
        n += 1
        source = None
        transcript = ""
        fields: dict[str, object] = {}
        while n < len(lines) and lines[n].startswith("  ") and not lines[n].startswith("step "):
            body = lines[n][2:]
            lineno = n + 1
            if body.startswith("source "):
                try:
                    source = int(body[len("source "):])
                except ValueError:
                    raise TaskModelParseError("bad source segment index", lineno) from None
            elif body.startswith("transcript "):
                transcript = body[len("transcript "):]
            elif body == "transcript":
                transcript = ""
            elif body.startswith("param "):
                name, _, value = body[len("param "):].partition(" = ")
                if name not in _PARAM_ORDER:
                    raise TaskModelParseError(f"unknown param {name!r}", lineno)
                if name in fields:
                    raise TaskModelParseError(f"duplicate param {name!r}", lineno)
                n, parsed = _parse_param(name, value, lines, n)
                fields[name] = parsed
            else:
                raise TaskModelParseError(f"unexpected step line {body!r}", lineno)
            n += 1
        if source is None:
            raise TaskModelParseError(f"step {head[0]} missing source line", n)
        try:
            params = SkillParameters(**fields)  # type: ignore[arg-type]
        except TaskModelError as exc:
            raise TaskModelParseError(str(exc), n) from None
        steps.append(TaskStep(label=head[1], params=params, source_segment=source, transcript=transcript))

    if not steps:
        raise TaskModelParseError("document contains no steps", len(lines))
    check = validate_gmr([s.label for s in steps])
    if not check.ok:
        raise TaskModelError(
            "GMR-invalid sequence: " + "; ".join(str(v) for v in check.violations)
        )
    return TaskModel(
        steps=tuple(steps),
        bundle_id=meta["bundle"],
        created=meta["created"],
        tool_version=meta["tool"],
    )


def _parse_step_header(line: str, lineno: int, expected_index: int) -> tuple[int, TaskLabel]:
    if not line.startswith("step "):
        raise TaskModelParseError(f"expected step header, got {line!r}", lineno)
    head, _, labelpart = line.partition(": ")
    try:
        index = int(head[len("step "):])
    except ValueError:
        raise TaskModelParseError("bad step index", lineno) from None
    if index != expected_index:
        raise TaskModelParseError(f"step index {index} out of order (expected {expected_index})", lineno)
    if not labelpart.startswith("label="):
        raise TaskModelParseError("step header missing label=", lineno)
    code = labelpart[len("label="):]
    try:
        label = TaskLabel.from_code(code)
    except TaskModelError:
        raise TaskModelParseError(f"unknown task label {code!r}", lineno) from None
    return index, label


def _parse_param(name: str, value: str, lines: list[str], n: int):
    """Parse one param line (plus continuation lines for trajectories).

    Returns (last consumed line index, parsed value).
    """
    lineno = n + 1
    if name in ("object_name", "grasp_type"):
        return n, value
    if name == "object_position":
        return n, _parse_point(value, lineno)
    if name == "hand_laterality":
        try:
            return n, Laterality(value)
        except ValueError:
            raise TaskModelParseError(f"unknown laterality {value!r}", lineno) from None
    if name in ("start_pose", "end_pose"):
        parts = value.split(",")
        if len(parts) != 4:
            raise TaskModelParseError("arm pose needs four indices", lineno)
        try:
            indices = [int(p) for p in parts]
            return n, ArmPoseCode(*indices)
        except (ValueError, TaskModelError) as exc:
            raise TaskModelParseError(f"bad arm pose: {exc}", lineno) from None
    if name == "hand_trajectory":
        try:
            count = int(value)
        except ValueError:
            raise TaskModelParseError("trajectory needs a point count", lineno) from None
        points = []
        for k in range(count):
            n += 1
            if n >= len(lines) or not lines[n].startswith("    "):
                raise TaskModelParseError("trajectory truncated", n + 1)
            tpart, _, ppart = lines[n].strip().partition(" ")
            points.append((_parse_float(tpart, n + 1), _parse_point(ppart, n + 1)))
        return n, tuple(points)
    if name == "hinge":
        kv: dict[str, str] = {}
        for chunk in value.split(" "):
            k, _, v = chunk.partition("=")
            kv[k] = v
        try:
            return n, HingeParams(
                center=_parse_point(kv["center"], lineno),
                axis=_parse_point(kv["axis"], lineno),
                radius=_parse_float(kv["radius"], lineno),
                start_angle=_parse_float(kv["start"], lineno),
                end_angle=_parse_float(kv["end"], lineno),
                sense=kv["sense"],
            )
        except KeyError as exc:
            raise TaskModelParseError(f"hinge missing field {exc.args[0]}", lineno) from None
        except TaskModelError as exc:
            raise TaskModelParseError(str(exc), lineno) from None
    raise TaskModelParseError(f"unknown param {name!r}", lineno)


def quantized(model: TaskModel) -> TaskModel:
    """Return the model with every float rounded to the serialized 6-decimal grid.

    parse(serialize(m)) equals quantized(m); models produced by the pipeline
    are compared through their serialized form, which is canonical.
    """

    def qf(x: float) -> float:
        return float(_fmt_float(x))

    def qp(p: tuple[float, float, float]) -> tuple[float, float, float]:
        return (qf(p[0]), qf(p[1]), qf(p[2]))

    def qparams(p: SkillParameters) -> SkillParameters:
        hinge = p.hinge
        if hinge is not None:
            hinge = HingeParams(
                center=qp(hinge.center),
                axis=qp(hinge.axis),  # constructor renormalizes, same as the parse path
                radius=qf(hinge.radius),
                start_angle=qf(hinge.start_angle),
                end_angle=qf(hinge.end_angle),
                sense=hinge.sense,
            )
        traj = p.hand_trajectory
        if traj is not None:
            traj = tuple((qf(t), qp(pt)) for t, pt in traj)
        return replace(
            p,
            object_position=None if p.object_position is None else qp(p.object_position),
            hand_trajectory=traj,
            hinge=hinge,
        )

    return replace(model, steps=tuple(replace(s, params=qparams(s.params)) for s in model.steps))
