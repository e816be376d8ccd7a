"""Command-line entry points.

Every command prints one machine-parseable summary line to stdout
(``<command> status=ok|error key=value ...``) and writes details to files.
Exit codes are stable: 0 success, 1 usage, 2 degenerate graph, 3 infeasible
query, 4 I/O or schema error. See docs/api.md.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import _kernels
from .blend import blend_feasibility
from .config import load_config
from .corpus import CorpusSpec, write_corpus
from .engine import Engine, build_pipeline, execute_query, make_condition
from .errors import EngineError
from .io import (
    ConditionFile,
    canonical_dumps,
    load_condition,
    load_graph,
    load_pose_sequence,
    load_tag_track,
    save_graph,
)
from .pose import velocity_profile


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog.split()[-1] or 'cli'} status=error code=1 message={json.dumps(message)}")
        raise SystemExit(1)


def _summary(command: str, **kv):
    parts = [command, "status=ok"]
    for key, val in kv.items():
        if isinstance(val, float):
            parts.append(f"{key}={val:.6g}")
        elif isinstance(val, str):
            parts.append(f"{key}={json.dumps(val)}" if " " in val else f"{key}={val}")
        else:
            parts.append(f"{key}={val}")
    print(" ".join(parts))


def _write_doc(path, doc):
    with open(path, "w", encoding="utf-8") as f:
        f.write(canonical_dumps(doc))


def _load_engine(args) -> Engine:
    config = load_config(getattr(args, "config", None))
    graph = load_graph(args.graph, lax=args.lax)
    seq = load_pose_sequence(args.poses, lax=args.lax)
    tags = load_tag_track(args.tags, lax=args.lax) if getattr(args, "tags", None) else None
    return Engine(graph=graph, seq=seq, config=config, source_tags=tags)


def _load_condition_or_default(args, engine: Engine) -> ConditionFile:
    if getattr(args, "condition", None):
        return load_condition(args.condition, lax=args.lax)
    duration = (args.frames or engine.graph.node_count) / engine.seq.fps
    return ConditionFile(track=make_condition(engine.config, duration))


def cmd_build(args) -> int:
    config = load_config(args.config)
    if args.alpha is not None or args.tau is not None:
        doc = config.to_doc()
        if args.alpha is not None:
            doc["alpha"] = args.alpha
        if args.tau is not None:
            doc["tau"] = args.tau
        from .config import config_from_doc

        config = config_from_doc(doc)
    seq = load_pose_sequence(args.poses, lax=args.lax)
    graph, stats = build_pipeline(seq, config)
    save_graph(args.out, graph)
    if args.stats:
        _write_doc(args.stats, stats)
    _summary("build", nodes=stats["node_count"], surviving=stats["nodes_surviving"],
             synthetic_edges=stats["synthetic_edges"], tau=stats["threshold_tau"],
             pruned=stats["pruned_count"], backend=_kernels.BACKEND, out=args.out)
    return 0


def _timeline_path(out_path: str) -> str:
    stem = out_path[:-5] if out_path.endswith(".json") else out_path
    return stem + ".timeline.json"


def _run_query_command(args, mode: str) -> int:
    engine = _load_engine(args)
    cf = _load_condition_or_default(args, engine)
    result, timeline, result_doc, timeline_doc = execute_query(
        engine, cf, mode,
        searcher=getattr(args, "searcher", "dp"),
        frames=getattr(args, "frames", None),
        beam_width=getattr(args, "beam_width", None),
        d=getattr(args, "d", None),
    )
    _write_doc(args.out, result_doc)
    _write_doc(args.timeline or _timeline_path(args.out), timeline_doc)
    name = "keyframe-search" if mode == "keyframe" else "search"
    _summary(name, searcher=result.searcher, frames=len(timeline.frames.frames),
             path_len=len(result.path), transitions=len(result.transitions),
             cost=result.cost_total, out=args.out)
    return 0


def cmd_search(args) -> int:
    return _run_query_command(args, "sequence")


def cmd_keyframe_search(args) -> int:
    return _run_query_command(args, "keyframe")


def cmd_analyze(args) -> int:
    config = load_config(args.config)
    seq = load_pose_sequence(args.poses, lax=args.lax)
    window = args.window if args.window is not None else config.blend_window
    threshold = args.threshold if args.threshold is not None else config.feasibility_threshold
    fraction = blend_feasibility(seq, window=window, threshold=threshold)
    from .conditions import extract_motion_beats

    beats = extract_motion_beats(seq, config.beat_min_separation_s)
    v = velocity_profile(seq)
    report = {
        "version": 1,
        "feasibility": {
            "window": window,
            "threshold": threshold,
            "fraction": fraction,
        },
        "beats": {
            "count": len(beats),
            "times_s": list(beats.beats_s),
            "min_separation_s": config.beat_min_separation_s,
            "inter_beat_cv": beats.inter_beat_cv(),
        },
        "velocity": {"mean": float(v.mean()), "max": float(v.max())},
    }
    if args.out:
        _write_doc(args.out, report)
    _summary("analyze", feasible_fraction=fraction, beats=len(beats),
             out=args.out or "-")
    return 0


def cmd_corpus(args) -> int:
    spec = CorpusSpec(kind=args.kind, n_frames=args.frames, fps=args.fps,
                      joints=args.joints, seed=args.seed,
                      period_frames=args.period, amplitude=args.amplitude,
                      freq_hz=args.freq)
    seq, annotations = write_corpus(spec, args.out, args.annotations)
    _summary("corpus", kind=args.kind, frames=len(seq), out=args.out,
             beats=len(annotations["beats_s"]), loop_pairs=len(annotations["loop_pairs"]))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    engine = _load_engine(args)
    config = engine.config
    port = args.port if args.port is not None else config.port
    app = create_app(engine)
    _summary("serve", port=port, nodes=engine.graph.node_count)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="motiongraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, graph=True):
        if graph:
            p.add_argument("--graph", required=True, help="graph file (binary or .json)")
        p.add_argument("--poses", required=True, help="PoseFileV1 JSON")
        p.add_argument("--config", help="EngineConfig JSON (or CONFIG env var)")
        p.add_argument("--lax", action="store_true", help="tolerate unknown fields")

    p = sub.add_parser("build", help="build and prune a transition graph")
    common(p, graph=False)
    p.add_argument("--out", required=True, help="graph output (binary; .json for debug)")
    p.add_argument("--stats", help="write a build stats report here")
    p.add_argument("--alpha", type=float, help="threshold multiplier override")
    p.add_argument("--tau", type=float, help="explicit threshold override")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("search", help="sequence search (dp or beam)")
    common(p)
    p.add_argument("--condition", help="ConditionFileV1 JSON; defaults to an unconditioned query")
    p.add_argument("--tags", help="source TagTrack JSON")
    p.add_argument("--searcher", choices=["dp", "beam"], default="dp")
    p.add_argument("--frames", type=int, help="target frame count (default: duration * fps)")
    p.add_argument("--beam-width", dest="beam_width", type=int)
    p.add_argument("--out", required=True, help="SearchResult JSON output")
    p.add_argument("--timeline", help="BlendedTimeline JSON output (default: <out>.timeline.json)")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("keyframe-search", help="pin-bridging search with length tolerance D")
    common(p)
    p.add_argument("--condition", required=True, help="ConditionFileV1 JSON with keyframes")
    p.add_argument("--tags", help="source TagTrack JSON")
    p.add_argument("--d", type=float, help="length scale factor D in [0, 1)")
    p.add_argument("--out", required=True)
    p.add_argument("--timeline", help="BlendedTimeline JSON output (default: <out>.timeline.json)")
    p.set_defaults(func=cmd_keyframe_search)

    p = sub.add_parser("analyze", help="blend feasibility and beat diagnostics")
    common(p, graph=False)
    p.add_argument("--window", type=int, help="feasibility window (interior frames)")
    p.add_argument("--threshold", type=float, help="feasibility deviation threshold")
    p.add_argument("--out", help="report JSON output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("corpus", help="generate an annotated synthetic pose corpus")
    p.add_argument("--kind", choices=["loop", "figure_eight", "linear", "sinusoid"], required=True)
    p.add_argument("--out", required=True, help="PoseFileV1 output")
    p.add_argument("--annotations", help="ground-truth annotations JSON output")
    p.add_argument("--frames", type=int, default=96)
    p.add_argument("--fps", type=float, default=24.0)
    p.add_argument("--joints", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--period", type=int, default=24)
    p.add_argument("--amplitude", type=float, default=0.5)
    p.add_argument("--freq", type=float, default=0.9)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("serve", help="serve the HTTP API for the viewer")
    common(p)
    p.add_argument("--tags", help="source TagTrack JSON")
    p.add_argument("--port", type=int, help="override config/PORT")
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        return args.func(args)
    except EngineError as e:
        detail = getattr(e, "detail", None)
        msg = str(e)
        print(f"{command} status=error code={e.exit_code} message={json.dumps(msg)}")
        if detail:
            print(f"detail: {json.dumps(detail)}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"{command} status=error code=4 message={json.dumps(str(e))}")
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
