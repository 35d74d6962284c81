"""Joint vocabulary: the 14-keypoint skeleton and per-joint tolerance tables."""

from __future__ import annotations

from dataclasses import dataclass, field

JOINT_COUNT = 14

JOINT_NAMES = (
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "left_hip",
    "right_hip",
    "left_knee",
    "right_knee",
    "left_ankle",
    "right_ankle",
    "head_top",
    "neck",
)

# COCO keypoint falloff constants for the 12 shared body joints; head_top and
# neck have no COCO equivalent and reuse the shoulder value (nearest torso-level
# landmark).
OKS_SIGMAS = (
    0.079, 0.079,  # shoulders
    0.072, 0.072,  # elbows
    0.062, 0.062,  # wrists
    0.107, 0.107,  # hips
    0.087, 0.087,  # knees
    0.089, 0.089,  # ankles
    0.079, 0.079,  # head_top, neck
)


def default_grouping_deltas() -> tuple[float, ...]:
    """Per-joint grouping tolerances, proportional to the OKS constants but
    rescaled to mean 1.0 so the control radius ``u * delta`` stays on the order
    of one Gaussian response size."""
    mean = sum(OKS_SIGMAS) / len(OKS_SIGMAS)
    return tuple(s / mean for s in OKS_SIGMAS)


@dataclass(frozen=True)
class JointSpec:
    """The joint vocabulary used throughout: count, names and the per-joint
    control deviation used when clustering candidate joints."""

    joint_count: int = JOINT_COUNT
    names: tuple[str, ...] = JOINT_NAMES
    delta: tuple[float, ...] = field(default_factory=default_grouping_deltas)

    def __post_init__(self):
        if self.joint_count != JOINT_COUNT:
            raise ValueError(f"joint_count must be {JOINT_COUNT}, got {self.joint_count}")
        if len(self.names) != self.joint_count or len(self.delta) != self.joint_count:
            raise ValueError("names and delta must both have one entry per joint")
        if any(d <= 0 for d in self.delta):
            raise ValueError("every delta entry must be positive")
