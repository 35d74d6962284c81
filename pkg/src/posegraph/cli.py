"""Command-line surface: synth, associate, evaluate, bench.

Exit codes: 0 on success, 1 for internal or cross-reference failures, 2 for
argument and parse problems (argparse uses 2 on its own). All output is
deterministic for a fixed --seed; only bench timings depend on the clock.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from .config import Config, build_config, load_config_file
from .errors import FormatError, IntegrityError, UndefinedMetricError
from .formats import (
    annotations_to_payload,
    candidates_to_payload,
    parse_annotations_payload,
    parse_candidates_payload,
    parse_results_payload,
    report_to_payload,
    read_json,
    results_to_payload,
    write_json_atomic,
)
from .graph import Edge, PersonJointGraph, PersonProposal, build_graph
from .grouping import JointNode, CandidateJoint, group_candidates
from .joints import JointSpec
from .metrics import SceneAnnotation, evaluate
from .simulator import SceneSpec, simulate_scene
from .solver import greedy_baseline, greedy_total_weight, build_poses, solve_graph


def _config_from_args(args: argparse.Namespace) -> Config:
    file_overrides = load_config_file(args.config) if args.config else None
    cli_overrides = {
        "mu": getattr(args, "mu", None),
        "sigma": getattr(args, "sigma", None),
        "seed": getattr(args, "seed", None),
    }
    return build_config(file_overrides, cli_overrides)


# ---------------------------------------------------------------------------
# synth


def cmd_synth(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    person_min = args.persons if args.persons else args.person_min
    person_max = args.persons if args.persons else args.person_max
    achieved = []
    for index in range(args.scenes):
        spec = SceneSpec(
            person_min=person_min,
            person_max=person_max,
            target_crowd_index=args.crowd_index,
            sigma_noise=args.noise,
            fp_rate=args.fp_rate,
            missing_rate=args.missing_rate,
            mu=config.mu,
            sigma=config.sigma,
            seed=config.seed + index,
        )
        scene = simulate_scene(spec)
        stem = f"scene_{index:03d}"
        write_json_atomic(
            out / f"{stem}.annotations.json",
            annotations_to_payload([scene.annotation]),
        )
        write_json_atomic(
            out / f"{stem}.candidates.json",
            candidates_to_payload(
                scene.annotation.image_id,
                scene.proposals,
                scene.candidates,
            ),
        )
        achieved.append(scene.achieved_crowd_index)
        note = "" if scene.on_target else " (off target)"
        print(
            f"{stem}: persons={len(scene.annotation.persons)} "
            f"proposals={len(scene.proposals)} "
            f"candidates={len(scene.candidates)} "
            f"crowd_index={scene.achieved_crowd_index:.4f}{note}"
        )
    mean = sum(achieved) / len(achieved)
    print(f"wrote {args.scenes} scene(s) to {out}; mean crowd index {mean:.4f}")
    return 0


# ---------------------------------------------------------------------------
# associate


def _associate_one(
    image_id: int,
    proposals: list[PersonProposal],
    candidates: list[CandidateJoint],
    method: str,
    spec: JointSpec,
) -> tuple[list, PersonJointGraph, float]:
    nodes = group_candidates(candidates, spec)
    graph = build_graph(proposals, nodes)
    if method == "global":
        assignment = solve_graph(graph)
        poses = build_poses(assignment, graph)
        total = assignment.total_weight
    else:
        poses = greedy_baseline(graph)
        total = greedy_total_weight(graph)
    return poses, graph, total


def cmd_associate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    spec = JointSpec(delta=config.delta)
    source = Path(args.input)
    if source.is_dir():
        inputs = sorted(source.glob("*.candidates.json"))
        if not inputs:
            print(f"error: no *.candidates.json under {source}", file=sys.stderr)
            return 2
    elif source.exists():
        inputs = [source]
    else:
        print(f"error: no such file: {source}", file=sys.stderr)
        return 2

    out = Path(args.out) if args.out else None
    for path in inputs:
        image_id, proposals, candidates = parse_candidates_payload(read_json(path))
        poses, graph, total = _associate_one(
            image_id, proposals, candidates, args.method, spec
        )
        if out is None:
            target = path.with_name(path.name.replace(".candidates", ".results"))
        elif len(inputs) > 1 or out.is_dir():
            out.mkdir(parents=True, exist_ok=True)
            target = out / path.name.replace(".candidates", ".results")
        else:
            target = out
        write_json_atomic(target, results_to_payload(image_id, poses))
        print(
            f"image {image_id}: proposals={len(graph.persons)} "
            f"nodes={len(graph.nodes)} edges={len(graph.edges)} "
            f"poses={len(poses)} total_weight={total:.6f}"
        )
    return 0


# ---------------------------------------------------------------------------
# evaluate


def _collect(path: Path, suffix: str) -> list[Path]:
    if path.is_dir():
        found = sorted(path.glob(f"*{suffix}"))
        if not found:
            raise FileNotFoundError(f"no *{suffix} under {path}")
        return found
    if path.exists():
        return [path]
    raise FileNotFoundError(f"no such file: {path}")


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    annotations: list[SceneAnnotation] = []
    seen: set[int] = set()
    for path in _collect(Path(args.annotations), ".annotations.json"):
        for scene in parse_annotations_payload(read_json(path)):
            if scene.image_id in seen:
                raise IntegrityError(f"duplicate image_id {scene.image_id}")
            seen.add(scene.image_id)
            annotations.append(scene)
    predictions = {}
    for path in _collect(Path(args.results), ".results.json"):
        image_id, poses = parse_results_payload(read_json(path))
        if image_id in predictions:
            raise IntegrityError(f"duplicate results for image_id {image_id}")
        predictions[image_id] = poses
    report = evaluate(predictions, annotations, sigmas=config.oks_sigmas)
    for key, value in report.to_dict().items():
        print(f"{key:12s} {value:.4f}")
    if args.out:
        write_json_atomic(args.out, report_to_payload(report))
        print(f"report written to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# bench


def _bench_graph(size: int, rng: np.random.Generator) -> PersonJointGraph:
    """Sparse single-type instance: ring pattern, degree 4 on both sides."""
    proposals = [
        PersonProposal(proposal_id=i, bbox=(0.0, 0.0, 1.0, 1.0)) for i in range(size)
    ]
    nodes = []
    for j in range(size):
        member = CandidateJoint(
            location=(float(j), 0.0),
            response=1.0,
            joint_type=0,
            source_proposal=0,
            response_size=1.0,
        )
        nodes.append(JointNode(joint_type=0, members=(member,), node_id=j))
    weights = {}
    for i in range(size):
        for offset in range(4):
            weights[(i, (i + offset) % size)] = float(rng.uniform(0.1, 1.0))
    edges = [
        Edge(proposal=i, node=j, joint_type=0, weight=w)
        for (i, j), w in sorted(weights.items())
    ]
    return PersonJointGraph(persons=proposals, nodes=nodes, edges=edges)


def cmd_bench(args: argparse.Namespace) -> int:
    sizes = args.sizes
    repeats = args.repeats
    rows = []
    for size in sizes:
        rng = np.random.default_rng((args.seed, size))
        graph = _bench_graph(size, rng)
        samples = []
        for _ in range(repeats):
            start = time.perf_counter()
            solve_graph(graph)
            samples.append((time.perf_counter() - start) * 1000.0)
        rows.append((size, statistics.median(samples)))
    print(f"{'size':>6s} {'median_ms':>10s} {'ratio':>6s}")
    for index, (size, ms) in enumerate(rows):
        shown = "<1ms" if ms < 1.0 else f"{ms:.2f}"
        if index == 0:
            ratio = "-"
        else:
            ratio = f"{ms / rows[index - 1][1]:.2f}"
        print(f"{size:>6d} {shown:>10s} {ratio:>6s}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _unit_interval(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {value}")
    return value


def _size_list(text: str) -> list[int]:
    sizes = [int(part) for part in text.split(",") if part]
    if not sizes or any(size < 10 for size in sizes):
        raise argparse.ArgumentTypeError("sizes must be a comma list of ints >= 10")
    return sizes


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="posegraph",
        description="Crowded-scene pose association: synthesize, associate, "
        "evaluate, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate synthetic scene files")
    synth.add_argument("--scenes", type=_positive_int, default=1)
    synth.add_argument("--persons", type=_positive_int, default=None,
                       help="exact person count (overrides min/max)")
    synth.add_argument("--person-min", type=_positive_int, default=2)
    synth.add_argument("--person-max", type=_positive_int, default=6)
    synth.add_argument("--crowd-index", type=_unit_interval, default=0.5)
    synth.add_argument("--noise", type=float, default=0.5,
                       help="location jitter in pixels")
    synth.add_argument("--fp-rate", type=_unit_interval, default=0.3)
    synth.add_argument("--missing-rate", type=_unit_interval, default=0.15)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--mu", type=_unit_interval, default=None)
    synth.add_argument("--sigma", type=float, default=None)
    synth.add_argument("--config", default=None)
    synth.add_argument("--out", required=True)
    synth.set_defaults(func=cmd_synth)

    associate = sub.add_parser(
        "associate", help="group candidates, build the graph, assign joints"
    )
    associate.add_argument("input", help="candidates file or directory")
    associate.add_argument("--method", choices=("global", "greedy"),
                           default="global")
    associate.add_argument("--out", default=None,
                           help="results file (single input) or directory")
    associate.add_argument("--config", default=None)
    associate.set_defaults(func=cmd_associate)

    evaluate_ = sub.add_parser("evaluate", help="score results against annotations")
    evaluate_.add_argument("--results", required=True)
    evaluate_.add_argument("--annotations", required=True)
    evaluate_.add_argument("--out", default=None, help="report JSON path")
    evaluate_.add_argument("--config", default=None)
    evaluate_.set_defaults(func=cmd_evaluate)

    bench = sub.add_parser("bench", help="time the assignment solver")
    bench.add_argument("--sizes", type=_size_list, default=[100, 200, 400])
    bench.add_argument("--repeats", type=_positive_int, default=5)
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IntegrityError as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return 1
    except UndefinedMetricError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
