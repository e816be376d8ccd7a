"""Motion-graph retrieval engine.

Represents a skeleton pose sequence as a transition graph and synthesizes
new motion timelines by conditional path search (beat-aligned,
tag-conditioned, or keyframe-pinned), with pose-level transition blending,
quality metrics, a CLI and an HTTP API for the viewer.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .blend import BlendedTimeline, apply_blending, blend_feasibility, blend_linear, resample_path
from .conditions import (
    BeatTrack,
    ConditionTrack,
    ExternalCost,
    SearchContext,
    TagSpan,
    TagTrack,
    Weights,
    beat_alignment_score,
    extract_motion_beats,
    frame_condition_cost,
    structural_penalty,
    tag_cost,
)
from .config import EngineConfig, load_config
from .engine import Engine, build_pipeline, execute_query, make_condition
from .errors import (
    DegenerateGraphError,
    EngineError,
    InfeasibleQueryError,
    SchemaError,
    StructuralError,
)
from .graph import MotionGraph, build_graph, compute_threshold, prune_graph
from .metrics import FrameArray, frame_consistency, motion_diversity, movie_simplified, psnr
from .pose import (
    PoseFrame,
    PoseSequence,
    Skeleton,
    global_distance,
    local_distance,
    make_sequence,
    pair_distance,
    velocity_profile,
)
from .search import BeamSession, SearchResult, audit_result, search_beam, search_dp, search_keyframes

__version__ = "0.1.0"
