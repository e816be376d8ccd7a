// Wire types for the motiongraph HTTP API (see docs/formats.md and
// docs/api.md in the repo root). The viewer never computes paths; these are
// read-only views of server responses plus the condition document it edits.

export interface SkeletonDoc {
  names: string[];
  parents: number[];
}

export interface FrameDoc {
  index?: number;
  t: number;
  local: number[][];
  global: number[][];
  joints2d?: number[][];
  provenance?: ProvenanceDoc;
}

export type ProvenanceDoc =
  | { kind: "retrieved"; source: number }
  | { kind: "blended"; from_frame: number | null; to_frame: number | null; u: number }
  | { kind: "resampled"; position: number; segment: number };

export interface FramesPayload {
  fps: number;
  skeleton: SkeletonDoc;
  frames: FrameDoc[];
}

export interface GraphSummary {
  node_count: number;
  nodes_surviving: number;
  pruned_count: number;
  natural_edges: number;
  synthetic_edges: number;
  threshold_tau: number;
  pruned: boolean;
  fps: number;
  motion_beats_s: number[];
  provenance: Record<string, unknown>;
  config: Record<string, unknown>;
}

export interface TransitionDoc {
  position: number;
  from_frame: number;
  to_frame: number;
}

export interface SegmentDoc {
  path_start: number;
  path_end: number;
  hops: number;
  target_len: number;
  target_start: number;
}

export interface SearchResultDoc {
  version: number;
  searcher: string;
  path: number[];
  transitions: TransitionDoc[];
  cost_total: number;
  cost_breakdown: Record<string, number>;
  segments: SegmentDoc[] | null;
  provenance: Record<string, unknown>;
}

export interface TimelineDoc {
  version: number;
  fps: number;
  skeleton: SkeletonDoc;
  frames: FrameDoc[];
}

export interface SearchResponse {
  result: SearchResultDoc;
  timeline: TimelineDoc;
}

export interface ErrorPayload {
  code: number;
  message: string;
  detail: Record<string, unknown>;
}

export interface Keyframe {
  time_s: number;
  frame: number;
}

export interface ConditionWeights {
  edge: number;
  beat: number;
  struct: number;
  tag: number;
  ext: number;
}

export interface ConditionFileV1 {
  version: 1;
  duration_s: number;
  beats?: { times: number[]; source?: string } | null;
  keyframes: Keyframe[];
  weights: ConditionWeights;
  sigma_s?: number;
  d_scale?: number | null;
}
