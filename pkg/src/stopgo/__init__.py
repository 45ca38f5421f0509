"""stopgo: encode stop-and-go multimodal demonstrations into robot task models."""

from .taskmodel import (
    ArmPoseCode,
    HingeParams,
    Laterality,
    SkillParameters,
    TaskLabel,
    TaskModel,
    TaskStep,
    parse,
    serialize,
    validate_gmr,
)

__version__ = "0.1.0"

__all__ = [
    "ArmPoseCode",
    "HingeParams",
    "Laterality",
    "SkillParameters",
    "TaskLabel",
    "TaskModel",
    "TaskStep",
    "parse",
    "serialize",
    "validate_gmr",
    "__version__",
]
