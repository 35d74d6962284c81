"""Globally optimal person-joint assignment.

Each joint type induces an independent bipartite subproblem: person proposals
on one side, joint nodes on the other, edge weights from heatmap responses.
The solver maximizes total selected weight subject to the one-joint-per-person
and one-person-per-joint constraints, solving each subproblem with a sparse
shortest-augmenting-path assignment routine (the Jonker-Volgenant flavor of
Kuhn-Munkres). Summing the per-type optima is exact because the subproblems
share no variables.

Partial matchings are handled by giving every row a private zero-cost slack
column: leaving a person unmatched is always feasible, and since every real
weight is positive, a real match is chosen exactly when it helps the total.

Among equal-weight optima the solver returns the lexicographically smallest
selected pair set. Costs are (weight, rank-bit) pairs ordered
lexicographically: the secondary component gives edge number r (in ascending
(row, column) order out of E edges) an exact integer payoff of 2^(E - r), so
any two distinct edge sets differ in the secondary objective and the unique
optimum prefers earlier pairs. Integer arithmetic keeps the tie-break exact;
the primary float comparison is untouched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappush, heappop

from .errors import SizeLimitError
from .graph import PersonJointGraph
from .grouping import weighted_center
from .joints import JOINT_COUNT, OKS_SIGMAS
from .metrics import GroundTruthPerson, bbox_iou, compute_oks

INF = math.inf


@dataclass(frozen=True)
class Matching:
    """Solution of one subproblem: selected (row, column) pairs, ascending,
    and their total weight."""

    pairs: tuple[tuple[int, int], ...]
    total_weight: float


@dataclass(frozen=True)
class Assignment:
    """Joint selection across all joint types.

    ``selected`` holds (joint_type, proposal, node) triples; at most one node
    per (joint_type, proposal) and one proposal per node.
    """

    selected: frozenset[tuple[int, int, int]]
    total_weight: float

    def __post_init__(self):
        seen_pi = set()
        seen_node = set()
        for k, i, j in self.selected:
            if (k, i) in seen_pi:
                raise ValueError(f"proposal {i} assigned twice for joint type {k}")
            if j in seen_node:
                raise ValueError(f"node {j} assigned twice")
            seen_pi.add((k, i))
            seen_node.add(j)


@dataclass(frozen=True)
class Pose:
    """Final pose for one proposal: per-joint (location, score) slots, None
    where nothing was assigned, and the mean assigned-joint score."""

    proposal_id: int
    keypoints: tuple[tuple[tuple[float, float], float] | None, ...]
    pose_score: float

    def __post_init__(self):
        if not any(slot is not None for slot in self.keypoints):
            raise ValueError("a pose needs at least one keypoint")


def solve_subgraph(weights: dict[tuple[int, int], float]) -> Matching:
    """Maximum-weight bipartite matching on a sparse weight map.

    Args:
        weights: (row, column) -> weight. Rows and columns may be any
            integers; absent pairs are unmatchable. Zero-weight entries are
            dropped, since matching them can never help the total.

    Returns:
        Matching with pairs sorted ascending and total_weight the exact sum
        (math.fsum) of selected weights. Rows and columns may stay
        unmatched; among equal-weight optima the lexicographically smallest
        pair set is returned.

    Raises:
        ValueError: any negative weight.
    """
    entries = []
    for (i, j), w in weights.items():
        if w < 0:
            raise ValueError(f"negative weight {w} at ({i}, {j})")
        if w > 0:
            entries.append((i, j, w))
    if not entries:
        return Matching(pairs=(), total_weight=0.0)
    entries.sort(key=lambda e: (e[0], e[1]))

    rows = sorted({i for i, _, _ in entries})
    cols = sorted({j for _, j, _ in entries})
    row_index = {r: idx for idx, r in enumerate(rows)}
    col_index = {c: idx for idx, c in enumerate(cols)}
    n_rows, n_cols = len(rows), len(cols)
    n_total = n_cols + n_rows  # real columns, then one private slack per row

    # Adjacency with pair costs (negated weight, negated rank bit); the slack
    # edge closes each row at cost zero.
    num_edges = len(entries)
    adj: list[list[tuple[int, float, int]]] = [[] for _ in range(n_rows)]
    for rank, (i, j, w) in enumerate(entries):
        adj[row_index[i]].append((col_index[j], -w, -(1 << (num_edges - rank))))
    for r in range(n_rows):
        adj[r].append((n_cols + r, 0.0, 0))

    # Row potentials start at the row minimum so reduced costs are
    # non-negative; column potentials start at zero.
    u_p = [0.0] * n_rows
    u_s = [0] * n_rows
    v_p = [0.0] * n_total
    v_s = [0] * n_total
    for r in range(n_rows):
        u_p[r], u_s[r] = min((cp, cs) for _, cp, cs in adj[r])

    col_of_row = [-1] * n_rows
    row_of_col = [-1] * n_total

    for r in range(n_rows):
        dist_p = [INF] * n_total
        dist_s = [0] * n_total
        pred = [-1] * n_total
        done = [False] * n_total
        heap: list[tuple[float, int, int]] = []
        for j, cp, cs in adj[r]:
            dp = cp - u_p[r] - v_p[j]
            ds = cs - u_s[r] - v_s[j]
            if (dp, ds) < (dist_p[j], dist_s[j]):
                dist_p[j], dist_s[j] = dp, ds
                pred[j] = r
                heappush(heap, (dp, ds, j))
        scanned = []
        target = -1
        while heap:
            dp, ds, j = heappop(heap)
            if done[j] or (dp, ds) > (dist_p[j], dist_s[j]):
                continue
            done[j] = True
            if row_of_col[j] == -1:
                target = j
                break
            scanned.append(j)
            i2 = row_of_col[j]
            for j2, cp, cs in adj[i2]:
                if done[j2]:
                    continue
                ndp = dp + cp - u_p[i2] - v_p[j2]
                nds = ds + cs - u_s[i2] - v_s[j2]
                if (ndp, nds) < (dist_p[j2], dist_s[j2]):
                    dist_p[j2], dist_s[j2] = ndp, nds
                    pred[j2] = i2
                    heappush(heap, (ndp, nds, j2))
        # The private slack column is always reachable, so a target exists.
        delta_p, delta_s = dist_p[target], dist_s[target]
        for j in scanned:
            v_p[j] += dist_p[j] - delta_p
            v_s[j] += dist_s[j] - delta_s
            holder = row_of_col[j]
            u_p[holder] += delta_p - dist_p[j]
            u_s[holder] += delta_s - dist_s[j]
        u_p[r] += delta_p
        u_s[r] += delta_s
        j = target
        while True:
            i = pred[j]
            next_j = col_of_row[i]
            row_of_col[j] = i
            col_of_row[i] = j
            if i == r:
                break
            j = next_j

    weight_of = {(i, j): w for i, j, w in entries}
    pairs = []
    for r in range(n_rows):
        j = col_of_row[r]
        if 0 <= j < n_cols:
            pairs.append((rows[r], cols[j]))
    pairs.sort()
    total = math.fsum(weight_of[p] for p in pairs)
    return Matching(pairs=tuple(pairs), total_weight=total)


def brute_force_oracle(weights: dict[tuple[int, int], float]) -> Matching:
    """Exhaustive maximum-weight matching for small instances.

    Enumerates every feasible matching; among equal-weight maxima the
    lexicographically smallest pair tuple wins, mirroring the solver's
    tie-break. Totals use math.fsum, so equal selections produce bitwise
    equal totals.

    Raises:
        SizeLimitError: more than 8 rows or 8 columns.
        ValueError: any negative weight.
    """
    entries: dict[int, list[tuple[int, float]]] = {}
    cols = set()
    for (i, j), w in weights.items():
        if w < 0:
            raise ValueError(f"negative weight {w} at ({i}, {j})")
        if w > 0:
            entries.setdefault(i, []).append((j, w))
            cols.add(j)
    rows = sorted(entries)
    if len(rows) > 8 or len(cols) > 8:
        raise SizeLimitError(
            f"instance {len(rows)}x{len(cols)} exceeds the 8x8 enumeration guard"
        )
    for i in rows:
        entries[i].sort()

    best_total = 0.0
    best_pairs: tuple[tuple[int, int], ...] = ()

    def recurse(idx: int, used: set[int], chosen: list[tuple[int, int]]):
        nonlocal best_total, best_pairs
        if idx == len(rows):
            pairs = tuple(chosen)
            total = math.fsum(weights[p] for p in pairs)
            if total > best_total or (total == best_total and pairs < best_pairs):
                best_total, best_pairs = total, pairs
            return
        recurse(idx + 1, used, chosen)
        i = rows[idx]
        for j, _w in entries[i]:
            if j not in used:
                used.add(j)
                chosen.append((i, j))
                recurse(idx + 1, used, chosen)
                chosen.pop()
                used.remove(j)

    recurse(0, set(), [])
    return Matching(pairs=best_pairs, total_weight=best_total)


def _subgraph_weights(graph: PersonJointGraph, joint_type: int) -> dict[tuple[int, int], float]:
    return {
        (e.proposal, e.node): e.weight
        for e in graph.edges
        if e.joint_type == joint_type
    }


def solve_graph(graph: PersonJointGraph) -> Assignment:
    """Solve every per-joint-type subproblem and combine the results.

    The constraints never couple joint types, so the union of per-type
    optima is the global optimum. The total is one flat math.fsum over the
    selected edge weights in ascending (joint_type, proposal, node) order:
    a correctly rounded sum of the leaves, so any exact-real ordering
    against another flat fsum (e.g. the greedy baseline total) survives
    rounding. Summing per-type subtotals instead would round twice and can
    drift a few ulps.
    """
    weight_of = {(e.joint_type, e.proposal, e.node): e.weight for e in graph.edges}
    selected = set()
    for joint_type in graph.joint_types():
        matching = solve_subgraph(_subgraph_weights(graph, joint_type))
        for i, j in matching.pairs:
            selected.add((joint_type, i, j))
    total = math.fsum(weight_of[triple] for triple in sorted(selected))
    return Assignment(selected=frozenset(selected), total_weight=total)


def build_poses(
    assignment: Assignment, graph: PersonJointGraph, joint_count: int = JOINT_COUNT
) -> list[Pose]:
    """Turn an assignment into final poses.

    Each selected (joint_type, proposal, node) places the node's weighted
    center into that proposal's pose; proposals with no assigned joints are
    removed. The pose score is the mean of assigned joint scores.

    Returns:
        Poses sorted by proposal_id.
    """
    node_center = {n.node_id: weighted_center(n) for n in graph.nodes}
    slots: dict[int, list] = {}
    for k, i, j in sorted(assignment.selected):
        if k >= joint_count:
            raise ValueError(f"joint_type {k} out of range for {joint_count} joints")
        slots.setdefault(i, [None] * joint_count)[k] = node_center[j]
    poses = []
    for proposal_id in sorted(slots):
        keypoints = tuple(slots[proposal_id])
        scores = [slot[1] for slot in keypoints if slot is not None]
        poses.append(
            Pose(
                proposal_id=proposal_id,
                keypoints=keypoints,
                pose_score=math.fsum(scores) / len(scores),
            )
        )
    return poses


def greedy_select(graph: PersonJointGraph) -> list[tuple[int, int, int]]:
    """Per-proposal greedy choice, ignoring node exclusivity.

    Every proposal independently takes its highest-weight incident edge per
    joint type (ties to the lower node_id), so one joint node can end up in
    several poses. This is the duplicated-joint failure mode global solving
    exists to fix.

    Returns:
        (joint_type, proposal, node) triples sorted ascending.
    """
    best: dict[tuple[int, int], tuple[float, int]] = {}
    for e in graph.edges:
        key = (e.joint_type, e.proposal)
        cur = best.get(key)
        if cur is None or (-e.weight, e.node) < cur:
            best[key] = (-e.weight, e.node)
    return sorted((k, i, node) for (k, i), (_nw, node) in best.items())


def greedy_total_weight(graph: PersonJointGraph) -> float:
    """Total weight credited to the greedy selection.

    A node claimed by several proposals counts once, at its best claiming
    weight; this equals the weight of the feasible matching obtained by
    keeping each node's strongest claim, so the global optimum is always at
    least this value.
    """
    edge_weight = {(e.proposal, e.node): e.weight for e in graph.edges}
    claimed: dict[int, float] = {}
    for _k, i, j in greedy_select(graph):
        w = edge_weight[(i, j)]
        if j not in claimed or w > claimed[j]:
            claimed[j] = w
    return math.fsum(claimed[j] for j in sorted(claimed))


def greedy_baseline(
    graph: PersonJointGraph, joint_count: int = JOINT_COUNT
) -> list[Pose]:
    """Poses built from the per-proposal greedy selection."""
    node_center = {n.node_id: weighted_center(n) for n in graph.nodes}
    slots: dict[int, list] = {}
    for k, i, j in greedy_select(graph):
        if k >= joint_count:
            raise ValueError(f"joint_type {k} out of range for {joint_count} joints")
        slots.setdefault(i, [None] * joint_count)[k] = node_center[j]
    poses = []
    for proposal_id in sorted(slots):
        keypoints = tuple(slots[proposal_id])
        scores = [slot[1] for slot in keypoints if slot is not None]
        poses.append(
            Pose(
                proposal_id=proposal_id,
                keypoints=keypoints,
                pose_score=math.fsum(scores) / len(scores),
            )
        )
    return poses


def bbox_nms_baseline(proposals, iou_threshold: float = 0.5):
    """Greedy box suppression by detection score.

    A proposal is dropped when its IoU with an already kept, higher-scored
    proposal exceeds the threshold. In crowded scenes mutually overlapping
    true positives often sit below typical thresholds (pairwise IoU around
    0.3), which is why box NMS alone cannot untangle them.

    Returns:
        Surviving proposals in their input order.
    """
    if not 0.0 < iou_threshold < 1.0:
        raise ValueError(f"iou_threshold must lie in (0, 1), got {iou_threshold}")
    order = sorted(
        range(len(proposals)),
        key=lambda idx: (-proposals[idx].detection_score, proposals[idx].proposal_id),
    )
    kept_idx: list[int] = []
    for idx in order:
        if all(
            bbox_iou(proposals[idx].bbox, proposals[kept].bbox) <= iou_threshold
            for kept in kept_idx
        ):
            kept_idx.append(idx)
    kept = set(kept_idx)
    return [p for idx, p in enumerate(proposals) if idx in kept]


def _pose_as_pseudo_gt(pose: Pose) -> GroundTruthPerson:
    # A tight box around the present joints stands in for an annotated bbox;
    # degenerate extents are padded to one pixel so the area stays positive.
    points = [slot[0] for slot in pose.keypoints if slot is not None]
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    w = max(max(xs) - min(xs), 1.0)
    h = max(max(ys) - min(ys), 1.0)
    keypoints = tuple(
        ((slot[0], 2) if slot is not None else None) for slot in pose.keypoints
    )
    return GroundTruthPerson(
        person_id=pose.proposal_id,
        keypoints=keypoints,
        bbox=(min(xs), min(ys), w, h),
    )


def pose_dedup_baseline(
    poses: list[Pose],
    oks_threshold: float = 0.7,
    sigmas=OKS_SIGMAS,
) -> list[Pose]:
    """Greedy pose-level suppression by OKS similarity.

    Poses are kept in descending pose_score order; a pose is dropped when
    its OKS against an already kept pose exceeds the threshold.

    Returns:
        Surviving poses in their input order.
    """
    if not 0.0 < oks_threshold < 1.0:
        raise ValueError(f"oks_threshold must lie in (0, 1), got {oks_threshold}")
    order = sorted(
        range(len(poses)), key=lambda idx: (-poses[idx].pose_score, poses[idx].proposal_id)
    )
    kept_idx: list[int] = []
    references: dict[int, GroundTruthPerson] = {}
    for idx in order:
        if all(
            compute_oks(poses[idx], references[kept], sigmas) <= oks_threshold
            for kept in kept_idx
        ):
            kept_idx.append(idx)
            references[idx] = _pose_as_pseudo_gt(poses[idx])
    kept = set(kept_idx)
    return [p for idx, p in enumerate(poses) if idx in kept]
