"""JSON file formats for annotations, candidates, results, and reports.

Three document kinds move between pipeline stages:

* annotations: ``{"images": [{"id", "width", "height"}], "annotations":
  [{"image_id", "person_id", "bbox", "keypoints"}]}`` with keypoints as 14
  flat (x, y, v) triplets, v in {0 unlabeled, 1 occluded, 2 visible};
* candidates: ``{"image_id", "proposals": [...], "candidates": [...],
  "provenance": [...]}`` where provenance is optional and parallel to the
  candidate list;
* results: ``{"image_id", "poses": [{"proposal_id", "score", "keypoints"}]}``
  with 14 entries of [x, y, s] or null.

Floats are rounded to 6 decimals on write, so serialize -> parse is the
identity exactly on objects whose coordinates carry at most 6 decimals and
re-serializing a parsed document reproduces it byte for byte. Writes go
through a temp file and os.replace so readers never observe a partial file.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Sequence

from .errors import FormatError, IntegrityError
from .graph import PersonProposal
from .grouping import CandidateJoint
from .joints import JOINT_COUNT
from .metrics import EvalReport, GroundTruthPerson, SceneAnnotation
from .solver import Pose


def _round6(value: float) -> float:
    return round(float(value), 6)


def dump_json(payload: Any) -> str:
    return json.dumps(payload, indent=2) + "\n"


def write_json_atomic(path: str | Path, payload: Any) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(dump_json(payload), encoding="utf-8")
    os.replace(tmp, path)


def read_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _require(payload: Any, key: str, where: str) -> Any:
    if not isinstance(payload, dict):
        raise FormatError(f"{where} must be a JSON object")
    if key not in payload:
        raise FormatError(f"{where} is missing field '{key}'")
    return payload[key]


def _float4(values: Any, where: str) -> tuple[float, float, float, float]:
    if not isinstance(values, (list, tuple)) or len(values) != 4:
        raise FormatError(f"{where} must be a list of 4 numbers")
    return tuple(float(v) for v in values)


# ---------------------------------------------------------------------------
# annotations


def annotations_to_payload(scenes: Sequence[SceneAnnotation]) -> dict:
    images = []
    annotations = []
    for scene in scenes:
        images.append(
            {"id": scene.image_id, "width": scene.width, "height": scene.height}
        )
        for person in scene.persons:
            flat: list[float | int] = []
            for slot in person.keypoints:
                if slot is None:
                    flat.extend([0.0, 0.0, 0])
                else:
                    (x, y), vis = slot
                    flat.extend([_round6(x), _round6(y), int(vis)])
            annotations.append(
                {
                    "image_id": scene.image_id,
                    "person_id": person.person_id,
                    "bbox": [_round6(v) for v in person.bbox],
                    "keypoints": flat,
                }
            )
    return {"images": images, "annotations": annotations}


def parse_annotations_payload(payload: Any) -> list[SceneAnnotation]:
    images = _require(payload, "images", "annotation document")
    rows = _require(payload, "annotations", "annotation document")
    sizes: dict[int, tuple[int, int]] = {}
    persons: dict[int, list[GroundTruthPerson]] = {}
    for entry in images:
        image_id = int(_require(entry, "id", "image entry"))
        sizes[image_id] = (
            int(_require(entry, "width", "image entry")),
            int(_require(entry, "height", "image entry")),
        )
        persons[image_id] = []
    for entry in rows:
        image_id = int(_require(entry, "image_id", "annotation entry"))
        if image_id not in sizes:
            raise IntegrityError(
                f"annotation references unknown image_id {image_id}"
            )
        flat = _require(entry, "keypoints", "annotation entry")
        if not isinstance(flat, list) or len(flat) != 3 * JOINT_COUNT:
            raise FormatError(
                f"keypoints must hold {3 * JOINT_COUNT} numbers, "
                f"got {len(flat) if isinstance(flat, list) else type(flat).__name__}"
            )
        slots: list[tuple[tuple[float, float], int] | None] = []
        for k in range(JOINT_COUNT):
            x, y, vis = flat[3 * k : 3 * k + 3]
            vis = int(vis)
            if vis == 0:
                slots.append(None)
            elif vis in (1, 2):
                slots.append(((float(x), float(y)), vis))
            else:
                raise FormatError(f"visibility must be 0, 1, or 2, got {vis}")
        persons[image_id].append(
            GroundTruthPerson(
                person_id=int(_require(entry, "person_id", "annotation entry")),
                keypoints=tuple(slots),
                bbox=_float4(_require(entry, "bbox", "annotation entry"), "bbox"),
            )
        )
    return [
        SceneAnnotation(
            image_id=image_id,
            persons=tuple(persons[image_id]),
            width=sizes[image_id][0],
            height=sizes[image_id][1],
        )
        for image_id in sizes
    ]


# ---------------------------------------------------------------------------
# candidates


def candidates_to_payload(
    image_id: int,
    proposals: Sequence[PersonProposal],
    candidates: Sequence[CandidateJoint],
) -> dict:
    payload: dict[str, Any] = {
        "image_id": image_id,
        "proposals": [
            {
                "proposal_id": p.proposal_id,
                "bbox": [_round6(v) for v in p.bbox],
                "score": _round6(p.detection_score),
            }
            for p in proposals
        ],
        "candidates": [
            {
                "proposal_id": c.source_proposal,
                "joint_type": c.joint_type,
                "x": _round6(c.location[0]),
                "y": _round6(c.location[1]),
                "response": _round6(c.response),
                "u": _round6(c.response_size),
            }
            for c in candidates
        ],
    }
    if any(c.origin is not None for c in candidates):
        payload["provenance"] = [
            None if c.origin is None else [c.origin[0], c.origin[1]]
            for c in candidates
        ]
    return payload


def parse_candidates_payload(
    payload: Any,
) -> tuple[int, list[PersonProposal], list[CandidateJoint]]:
    image_id = int(_require(payload, "image_id", "candidates document"))
    proposals = []
    known_ids = set()
    for entry in _require(payload, "proposals", "candidates document"):
        proposal = PersonProposal(
            proposal_id=int(_require(entry, "proposal_id", "proposal entry")),
            bbox=_float4(_require(entry, "bbox", "proposal entry"), "bbox"),
            detection_score=float(_require(entry, "score", "proposal entry")),
        )
        proposals.append(proposal)
        known_ids.add(proposal.proposal_id)
    rows = _require(payload, "candidates", "candidates document")
    provenance = payload.get("provenance")
    if provenance is not None and len(provenance) != len(rows):
        raise FormatError(
            f"provenance length {len(provenance)} != candidate count {len(rows)}"
        )
    candidates = []
    for index, entry in enumerate(rows):
        proposal_id = int(_require(entry, "proposal_id", "candidate entry"))
        if proposal_id not in known_ids:
            raise IntegrityError(
                f"candidate {index} references unknown proposal_id {proposal_id}"
            )
        origin = None
        if provenance is not None and provenance[index] is not None:
            pair = provenance[index]
            if not isinstance(pair, list) or len(pair) != 2:
                raise FormatError(
                    f"provenance entry {index} must be null or [person_id, joint_type]"
                )
            origin = (int(pair[0]), int(pair[1]))
        candidates.append(
            CandidateJoint(
                location=(
                    float(_require(entry, "x", "candidate entry")),
                    float(_require(entry, "y", "candidate entry")),
                ),
                response=float(_require(entry, "response", "candidate entry")),
                joint_type=int(_require(entry, "joint_type", "candidate entry")),
                source_proposal=proposal_id,
                response_size=float(_require(entry, "u", "candidate entry")),
                origin=origin,
            )
        )
    return image_id, proposals, candidates


# ---------------------------------------------------------------------------
# results


def results_to_payload(image_id: int, poses: Sequence[Pose]) -> dict:
    rows = []
    for pose in poses:
        keypoints: list[list[float] | None] = []
        for slot in pose.keypoints:
            if slot is None:
                keypoints.append(None)
            else:
                (x, y), score = slot
                keypoints.append([_round6(x), _round6(y), _round6(score)])
        rows.append(
            {
                "proposal_id": pose.proposal_id,
                "score": _round6(pose.pose_score),
                "keypoints": keypoints,
            }
        )
    return {"image_id": image_id, "poses": rows}


def parse_results_payload(payload: Any) -> tuple[int, list[Pose]]:
    image_id = int(_require(payload, "image_id", "results document"))
    poses = []
    for entry in _require(payload, "poses", "results document"):
        rows = _require(entry, "keypoints", "pose entry")
        if not isinstance(rows, list) or len(rows) != JOINT_COUNT:
            raise FormatError(f"pose keypoints must hold {JOINT_COUNT} entries")
        slots: list[tuple[tuple[float, float], float] | None] = []
        for row in rows:
            if row is None:
                slots.append(None)
                continue
            if not isinstance(row, list) or len(row) != 3:
                raise FormatError("pose keypoint must be null or [x, y, s]")
            slots.append(((float(row[0]), float(row[1])), float(row[2])))
        poses.append(
            Pose(
                proposal_id=int(_require(entry, "proposal_id", "pose entry")),
                keypoints=tuple(slots),
                pose_score=float(_require(entry, "score", "pose entry")),
            )
        )
    return image_id, poses


# ---------------------------------------------------------------------------
# report


def report_to_payload(report: EvalReport) -> dict:
    return {key: _round6(value) for key, value in report.to_dict().items()}
