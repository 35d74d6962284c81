"""Keypoint evaluation: OKS, COCO-style mAP/mAR, and crowding statistics.

The crowd index of a scene measures how much people overlap: for each person,
count other people's labeled joints that fall inside this person's box,
divide by the person's own labeled joint count, and average the ratios.
Scenes bucket into easy / medium / hard bands by that index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

from .errors import IntegrityError, UndefinedMetricError
from .joints import JOINT_COUNT, OKS_SIGMAS

if TYPE_CHECKING:
    from .solver import Pose

DEFAULT_OKS_THRESHOLDS = tuple((50 + 5 * i) / 100 for i in range(10))

VIS_OCCLUDED = 1
VIS_VISIBLE = 2


@dataclass(frozen=True)
class GroundTruthPerson:
    """Annotated person: per-joint (location, visibility) slots and a box.

    A slot is None when the joint is unlabeled; visibility is 1 for
    labeled-but-occluded and 2 for labeled-and-visible. Both labeled states
    count equally everywhere (OKS, crowd index).
    """

    person_id: int
    keypoints: tuple[tuple[tuple[float, float], int] | None, ...]
    bbox: tuple[float, float, float, float]

    def __post_init__(self):
        if self.bbox[2] <= 0 or self.bbox[3] <= 0:
            raise ValueError(f"bbox must have positive area, got {self.bbox}")
        for slot in self.keypoints:
            if slot is not None and slot[1] not in (VIS_OCCLUDED, VIS_VISIBLE):
                raise ValueError(f"visibility must be 1 or 2, got {slot[1]}")

    def labeled_joints(self) -> list[tuple[int, tuple[float, float]]]:
        return [(k, slot[0]) for k, slot in enumerate(self.keypoints) if slot]


@dataclass(frozen=True)
class SceneAnnotation:
    image_id: int
    persons: tuple[GroundTruthPerson, ...]
    width: int = 640
    height: int = 480

    def __post_init__(self):
        ids = [p.person_id for p in self.persons]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate person_id in image {self.image_id}")


@dataclass(frozen=True)
class EvalReport:
    map_50_95: float
    map_50: float
    map_75: float
    mar_50_95: float
    mar_50: float
    mar_75: float
    ap_easy: float
    ap_medium: float
    ap_hard: float

    def to_dict(self) -> dict[str, float]:
        return {
            "map_50_95": self.map_50_95,
            "map_50": self.map_50,
            "map_75": self.map_75,
            "mar_50_95": self.mar_50_95,
            "mar_50": self.mar_50,
            "mar_75": self.mar_75,
            "ap_easy": self.ap_easy,
            "ap_medium": self.ap_medium,
            "ap_hard": self.ap_hard,
        }


class CrowdingLevel(str, Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"


def bbox_iou(
    a: tuple[float, float, float, float], b: tuple[float, float, float, float]
) -> float:
    """Intersection over union of two (x, y, w, h) boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    iw = min(ax + aw, bx + bw) - max(ax, bx)
    ih = min(ay + ah, by + bh) - max(ay, by)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (aw * ah + bw * bh - inter)


def _inside(bbox: tuple[float, float, float, float], point: tuple[float, float]) -> bool:
    # Boundary points count as inside; ground-truth boxes are often tight
    # around the joints, so an exclusive test would drop perimeter joints.
    x, y, w, h = bbox
    return x <= point[0] <= x + w and y <= point[1] <= y + h


def compute_oks(
    pred: "Pose", gt: GroundTruthPerson, sigmas: Sequence[float] = OKS_SIGMAS
) -> float:
    """Object keypoint similarity between a predicted pose and an annotation.

    Each labeled ground-truth joint contributes exp(-d^2 / (2 s^2 kappa^2))
    where d is the prediction displacement, s^2 the ground-truth box area and
    kappa twice the per-joint falloff constant; unpredicted joints contribute
    0. The mean over labeled joints is returned.

    Raises:
        UndefinedMetricError: the annotation has no labeled joints.
    """
    labeled = gt.labeled_joints()
    if not labeled:
        raise UndefinedMetricError(
            f"person {gt.person_id} has no labeled joints; OKS is undefined"
        )
    if len(sigmas) < len(gt.keypoints):
        raise ValueError("need one falloff constant per joint")
    s2 = gt.bbox[2] * gt.bbox[3]
    terms = []
    for k, loc in labeled:
        slot = pred.keypoints[k]
        if slot is None:
            terms.append(0.0)
            continue
        (px, py), _score = slot
        d2 = (px - loc[0]) ** 2 + (py - loc[1]) ** 2
        kappa = 2.0 * sigmas[k]
        terms.append(math.exp(-d2 / (2.0 * s2 * kappa * kappa)))
    return math.fsum(terms) / len(labeled)


def crowd_index(scene: SceneAnnotation) -> float:
    """Mean over persons of (foreign labeled joints in own box) / (own
    labeled joints in own box).

    Persons whose own-joint count is zero are left out of the mean. The
    index is 0 for any scene with pairwise disjoint boxes and can exceed 1
    when several people stack inside one box.

    Raises:
        UndefinedMetricError: no person has a labeled joint in its own box.
    """
    ratios = []
    for person in scene.persons:
        own = sum(1 for _, loc in person.labeled_joints() if _inside(person.bbox, loc))
        if own == 0:
            continue
        foreign = 0
        for other in scene.persons:
            if other.person_id == person.person_id:
                continue
            foreign += sum(
                1 for _, loc in other.labeled_joints() if _inside(person.bbox, loc)
            )
        ratios.append(foreign / own)
    if not ratios:
        raise UndefinedMetricError(
            f"image {scene.image_id}: no person with labeled joints in its own bbox"
        )
    return math.fsum(ratios) / len(ratios)


def crowding_level(index: float) -> CrowdingLevel:
    """Band for a crowd index: easy up to 0.1, medium up to 0.8, hard above.

    Boundary values land in the lower band.
    """
    if index < 0:
        raise ValueError(f"crowd index must be non-negative, got {index}")
    if index <= 0.1:
        return CrowdingLevel.EASY
    if index <= 0.8:
        return CrowdingLevel.MEDIUM
    return CrowdingLevel.HARD


def average_bbox_iou(scenes: Iterable[SceneAnnotation]) -> float:
    """Mean pairwise box IoU, averaged per image and then over images.

    Only images with at least two persons qualify.

    Raises:
        UndefinedMetricError: no image has two persons.
    """
    per_image = []
    for scene in scenes:
        boxes = [p.bbox for p in scene.persons]
        if len(boxes) < 2:
            continue
        ious = [
            bbox_iou(boxes[i], boxes[j])
            for i in range(len(boxes))
            for j in range(i + 1, len(boxes))
        ]
        per_image.append(math.fsum(ious) / len(ious))
    if not per_image:
        raise UndefinedMetricError("no image with two or more persons")
    return math.fsum(per_image) / len(per_image)


def _ap_and_ar(
    records: list[tuple[float, int, int, bool]], n_gt: int
) -> tuple[float, float]:
    """101-point interpolated AP and final recall from pooled predictions.

    ``records`` holds (score, image_id, proposal_id, is_tp); an empty gt set
    yields (0.0, 0.0) by convention.
    """
    if n_gt == 0:
        return 0.0, 0.0
    if not records:
        return 0.0, 0.0
    records = sorted(records, key=lambda r: (-r[0], r[1], r[2]))
    tp = np.cumsum([r[3] for r in records])
    fp = np.cumsum([not r[3] for r in records])
    recall = tp / n_gt
    precision = tp / (tp + fp)
    # Precision envelope from the right, then sample at 101 recall points.
    for i in range(len(precision) - 1, 0, -1):
        if precision[i] > precision[i - 1]:
            precision[i - 1] = precision[i]
    samples = np.zeros(101)
    inds = np.searchsorted(recall, np.linspace(0.0, 1.0, 101), side="left")
    valid = inds < len(precision)
    samples[valid] = precision[inds[valid]]
    return float(np.mean(samples)), float(recall[-1])


def evaluate(
    predictions: Mapping[int, Sequence["Pose"]],
    annotations: Sequence[SceneAnnotation],
    thresholds: Sequence[float] = DEFAULT_OKS_THRESHOLDS,
    sigmas: Sequence[float] = OKS_SIGMAS,
) -> EvalReport:
    """Score predicted poses against annotations over a range of OKS
    thresholds.

    Per image and threshold, predictions in descending score order greedily
    claim the unmatched annotation with the highest OKS, provided that OKS
    reaches the threshold. Averaging the 101-point interpolated AP over
    thresholds gives the headline metric; per-band AP restricts the image
    set to one crowding band. Bands with no qualifying image score 0.

    Args:
        predictions: image_id -> poses for that image.
        annotations: one SceneAnnotation per image.
        thresholds: OKS cutoffs, default 0.50:0.05:0.95.
        sigmas: per-joint falloff constants.

    Returns:
        EvalReport with mAP/mAR and per-band AP.

    Raises:
        IntegrityError: predictions reference an image id with no annotation.
    """
    ann_by_id = {scene.image_id: scene for scene in annotations}
    for image_id in predictions:
        if image_id not in ann_by_id:
            raise IntegrityError(f"predictions reference unknown image {image_id}")

    # Per-image prep: scored predictions in rank order and the OKS matrix
    # against labeled ground-truth persons.
    prepped: dict[int, tuple[list, list, np.ndarray]] = {}
    for scene in annotations:
        gts = [p for p in scene.persons if p.labeled_joints()]
        preds = sorted(
            predictions.get(scene.image_id, []),
            key=lambda p: (-p.pose_score, p.proposal_id),
        )
        oks = np.zeros((len(preds), len(gts)))
        for pi, pred in enumerate(preds):
            for gi, gt in enumerate(gts):
                oks[pi, gi] = compute_oks(pred, gt, sigmas)
        prepped[scene.image_id] = (preds, gts, oks)

    def band_of(scene: SceneAnnotation) -> CrowdingLevel | None:
        try:
            return crowding_level(crowd_index(scene))
        except UndefinedMetricError:
            return None

    image_ids = sorted(ann_by_id)
    bands = {image_id: band_of(ann_by_id[image_id]) for image_id in image_ids}

    def score_subset(subset: list[int], threshold: float) -> tuple[float, float]:
        records = []
        n_gt = 0
        for image_id in subset:
            preds, gts, oks = prepped[image_id]
            n_gt += len(gts)
            taken = [False] * len(gts)
            for pi, pred in enumerate(preds):
                best_gi = -1
                best_oks = 0.0
                for gi in range(len(gts)):
                    if not taken[gi] and oks[pi, gi] > best_oks:
                        best_gi, best_oks = gi, oks[pi, gi]
                matched = best_gi >= 0 and best_oks >= threshold
                if matched:
                    taken[best_gi] = True
                records.append((pred.pose_score, image_id, pred.proposal_id, matched))
        return _ap_and_ar(records, n_gt)

    def mean_ap_ar(subset: list[int]) -> tuple[float, float, dict[float, tuple[float, float]]]:
        per_threshold = {t: score_subset(subset, t) for t in thresholds}
        ap = math.fsum(v[0] for v in per_threshold.values()) / len(thresholds)
        ar = math.fsum(v[1] for v in per_threshold.values()) / len(thresholds)
        return ap, ar, per_threshold

    map_all, mar_all, per_t = mean_ap_ar(image_ids)
    ap_50, ar_50 = per_t.get(0.5, (0.0, 0.0))
    ap_75, ar_75 = per_t.get(0.75, (0.0, 0.0))

    band_ap = {}
    for level in CrowdingLevel:
        subset = [i for i in image_ids if bands[i] is level]
        band_ap[level] = mean_ap_ar(subset)[0] if subset else 0.0

    return EvalReport(
        map_50_95=map_all,
        map_50=ap_50,
        map_75=ap_75,
        mar_50_95=mar_all,
        mar_50=ar_50,
        mar_75=ar_75,
        ap_easy=band_ap[CrowdingLevel.EASY],
        ap_medium=band_ap[CrowdingLevel.MEDIUM],
        ap_hard=band_ap[CrowdingLevel.HARD],
    )
