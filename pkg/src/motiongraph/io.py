"""File formats: pose sequences, graphs, condition tracks.

JSON everywhere the viewer needs to read (strict schema, canonical
serialization: sorted keys, compact separators, trailing newline), plus a
length-prefixed little-endian binary graph format for production caches
where the N^2 synthetic edge list gets large. Loading is strict by default:
unknown fields are rejected with a JSON-pointer unless lax=True.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .conditions import BeatTrack, ConditionTrack, TagSpan, TagTrack, Weights
from .errors import SchemaError, StructuralError
from .graph import MotionGraph
from .pose import PoseFrame, PoseSequence, Skeleton

GRAPH_BINARY_VERSION = 1


def canonical_dumps(obj) -> str:
    """Deterministic JSON: sorted keys, no whitespace, shortest round-trip
    floats, newline-terminated. Re-serializing a parsed document reproduces
    it byte for byte."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, allow_nan=False) + "\n"


def canonical_bytes(obj) -> bytes:
    return canonical_dumps(obj).encode("utf-8")


def sha256_of(obj) -> str:
    return hashlib.sha256(canonical_bytes(obj)).hexdigest()


def _reject_constant(name):
    raise SchemaError(f"non-finite JSON constant {name} is not allowed")


def parse_json(text: str):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON: {e.msg}", pointer=f"/(line {e.lineno})") from None


def _load_doc(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return parse_json(f.read())
    except OSError as e:
        raise SchemaError(f"cannot read file: {e}", pointer=str(path)) from None


def _check_keys(obj: dict, required, optional, pointer: str, lax: bool):
    if not isinstance(obj, dict):
        raise SchemaError(f"expected an object, got {type(obj).__name__}", pointer)
    for key in required:
        if key not in obj:
            raise SchemaError(f"missing required field {key!r}", pointer)
    if not lax:
        allowed = set(required) | set(optional)
        for key in obj:
            if key not in allowed:
                raise SchemaError(f"unknown field {key!r}", f"{pointer}/{key}")


def _number(val, pointer: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise SchemaError(f"expected a number, got {type(val).__name__}", pointer)
    return float(val)


def _coords(val, width: int, pointer: str) -> np.ndarray:
    if not isinstance(val, list) or not val:
        raise SchemaError("expected a nonempty array of joint coordinates", pointer)
    for j, row in enumerate(val):
        if not isinstance(row, list) or len(row) != width:
            raise SchemaError(f"joint {j} must be an array of {width} numbers", f"{pointer}/{j}")
        for c in row:
            _number(c, f"{pointer}/{j}")
    return np.array(val, dtype=np.float64)


# ---------------------------------------------------------------------------
# PoseFileV1


def pose_sequence_to_doc(seq: PoseSequence) -> dict:
    frames = []
    for f in seq.frames:
        entry = {
            "t": f.time_s,
            "local": f.joints_local.tolist(),
            "global": f.joints_global.tolist(),
        }
        if f.joints_2d is not None:
            entry["joints2d"] = f.joints_2d.tolist()
        frames.append(entry)
    return {
        "version": 1,
        "fps": seq.fps,
        "skeleton": {"names": list(seq.skeleton.names), "parents": list(seq.skeleton.parents)},
        "frames": frames,
    }


def save_pose_sequence(path, seq: PoseSequence):
    with open(path, "w", encoding="utf-8") as f:
        f.write(canonical_dumps(pose_sequence_to_doc(seq)))


def load_pose_sequence(path, lax: bool = False) -> PoseSequence:
    doc = _load_doc(path)
    return pose_sequence_from_doc(doc, lax=lax)


def pose_sequence_from_doc(doc: dict, lax: bool = False) -> PoseSequence:
    _check_keys(doc, ["version", "fps", "skeleton", "frames"], [], "", lax)
    if doc["version"] != 1:
        raise SchemaError(f"unsupported pose file version {doc['version']!r}", "/version")
    _check_keys(doc["skeleton"], ["names", "parents"], [], "/skeleton", lax)
    names = doc["skeleton"]["names"]
    parents = doc["skeleton"]["parents"]
    if not isinstance(names, list) or not isinstance(parents, list):
        raise SchemaError("names and parents must be arrays", "/skeleton")
    try:
        skeleton = Skeleton(names=tuple(names), parents=tuple(parents))
    except StructuralError as e:
        raise SchemaError(str(e), "/skeleton") from None

    if not isinstance(doc["frames"], list):
        raise SchemaError("frames must be an array", "/frames")
    frames = []
    for i, entry in enumerate(doc["frames"]):
        ptr = f"/frames/{i}"
        _check_keys(entry, ["t", "local", "global"], ["joints2d"], ptr, lax)
        t = _number(entry["t"], f"{ptr}/t")
        local = _coords(entry["local"], 3, f"{ptr}/local")
        glob = _coords(entry["global"], 3, f"{ptr}/global")
        j2 = _coords(entry["joints2d"], 2, f"{ptr}/joints2d") if "joints2d" in entry else None
        try:
            frames.append(PoseFrame(frame_index=i, time_s=t, joints_local=local,
                                    joints_global=glob, joints_2d=j2))
        except StructuralError as e:
            raise SchemaError(f"frame {i}: {e}", ptr) from None
    try:
        return PoseSequence(frames=tuple(frames), fps=_number(doc["fps"], "/fps"),
                            skeleton=skeleton)
    except StructuralError as e:
        raise SchemaError(str(e), "/frames") from None


# ---------------------------------------------------------------------------
# GraphFileV1


def graph_to_doc(g: MotionGraph) -> dict:
    prov = dict(g.provenance)
    return {
        "version": 1,
        "node_count": g.node_count,
        "tau": g.threshold_tau,
        "pruned": g.pruned,
        "edges": [
            [int(u), int(v), float(w)]
            for u, v, w in zip(g.edge_src.tolist(), g.edge_dst.tolist(), g.edge_w.tolist())
        ],
        "pruned_nodes": list(g.pruned_nodes),
        "provenance": prov,
        "config_hash": sha256_of(prov),
    }


def graph_from_doc(doc: dict, lax: bool = False) -> MotionGraph:
    _check_keys(doc, ["version", "node_count", "tau", "pruned", "edges",
                      "pruned_nodes", "provenance", "config_hash"], [], "", lax)
    if doc["version"] != 1:
        raise SchemaError(f"unsupported graph version {doc['version']!r}", "/version")
    if doc["config_hash"] != sha256_of(doc["provenance"]):
        raise SchemaError("config hash does not match provenance (stale or corrupt cache)",
                          "/config_hash")
    edges = doc["edges"]
    try:
        return MotionGraph(
            node_count=int(doc["node_count"]),
            edge_src=np.array([e[0] for e in edges], dtype=np.int32),
            edge_dst=np.array([e[1] for e in edges], dtype=np.int32),
            edge_w=np.array([e[2] for e in edges], dtype=np.float64),
            threshold_tau=float(doc["tau"]),
            pruned_nodes=tuple(doc["pruned_nodes"]),
            pruned=bool(doc["pruned"]),
            provenance=doc["provenance"],
        )
    except StructuralError as e:
        raise SchemaError(str(e), "/edges") from None


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise SchemaError(f"unexpected EOF at offset {len(self.data)}; "
                              f"needed {self.offset + n} bytes")
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def blob(self) -> bytes:
        return self.take(self.u32())


def graph_to_binary(g: MotionGraph) -> bytes:
    """Little-endian, length-prefixed. Layout (see docs/formats.md):
    u8 version, u32 node_count, f64 tau, u8 pruned_flag,
    u32 edge_count then edge_count * (u32 src, u32 dst, f64 weight),
    u32 pruned_count then pruned_count * u32,
    u32-prefixed provenance JSON, u32-prefixed config hash hex."""
    out = bytearray()
    out += struct.pack("<B", GRAPH_BINARY_VERSION)
    out += struct.pack("<I", g.node_count)
    out += struct.pack("<d", g.threshold_tau)
    out += struct.pack("<B", 1 if g.pruned else 0)
    out += struct.pack("<I", g.edge_src.size)
    for u, v, w in zip(g.edge_src.tolist(), g.edge_dst.tolist(), g.edge_w.tolist()):
        out += struct.pack("<IId", u, v, w)
    out += struct.pack("<I", len(g.pruned_nodes))
    for p in g.pruned_nodes:
        out += struct.pack("<I", p)
    prov = canonical_bytes(g.provenance)
    out += struct.pack("<I", len(prov)) + prov
    h = sha256_of(g.provenance).encode("ascii")
    out += struct.pack("<I", len(h)) + h
    return bytes(out)


def graph_from_binary(data: bytes) -> MotionGraph:
    r = _Reader(data)
    version = r.u8()
    if version != GRAPH_BINARY_VERSION:
        raise SchemaError(f"unsupported graph binary version {version}")
    node_count = r.u32()
    tau = r.f64()
    pruned_flag = r.u8()
    m = r.u32()
    src = np.empty(m, dtype=np.int32)
    dst = np.empty(m, dtype=np.int32)
    w = np.empty(m, dtype=np.float64)
    for i in range(m):
        u, v, wt = struct.unpack("<IId", r.take(16))
        src[i], dst[i], w[i] = u, v, wt
    p = r.u32()
    pruned_nodes = tuple(r.u32() for _ in range(p))
    prov_raw = r.blob()
    hash_raw = r.blob()
    if r.offset != len(data):
        raise SchemaError(f"trailing bytes after offset {r.offset}")
    provenance = parse_json(prov_raw.decode("utf-8"))
    if hash_raw.decode("ascii") != sha256_of(provenance):
        raise SchemaError("config hash does not match provenance (stale or corrupt cache)")
    try:
        return MotionGraph(node_count=node_count, edge_src=src, edge_dst=dst, edge_w=w,
                           threshold_tau=tau, pruned_nodes=pruned_nodes,
                           pruned=bool(pruned_flag), provenance=provenance)
    except StructuralError as e:
        raise SchemaError(str(e)) from None


def save_graph(path, g: MotionGraph):
    """Binary by default; .json suffix switches to the debug format."""
    if str(path).endswith(".json"):
        with open(path, "w", encoding="utf-8") as f:
            f.write(canonical_dumps(graph_to_doc(g)))
    else:
        with open(path, "wb") as f:
            f.write(graph_to_binary(g))


def load_graph(path, lax: bool = False) -> MotionGraph:
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise SchemaError(f"cannot read file: {e}", pointer=str(path)) from None
    if data[:1] == b"{":
        return graph_from_doc(parse_json(data.decode("utf-8")), lax=lax)
    return graph_from_binary(data)


# ---------------------------------------------------------------------------
# ConditionFileV1


@dataclass(frozen=True)
class ConditionFile:
    track: ConditionTrack
    d_scale: Optional[float] = None


def condition_to_doc(cf: ConditionFile) -> dict:
    track = cf.track
    doc = {
        "version": 1,
        "duration_s": track.duration_s,
        "beats": None,
        "tags": None,
        "keyframes": [{"time_s": t, "frame": v} for t, v in track.keyframes],
        "weights": {
            "edge": track.weights.edge,
            "beat": track.weights.beat,
            "struct": track.weights.struct,
            "tag": track.weights.tag,
            "ext": track.weights.ext,
        },
        "sigma_s": track.sigma_s,
        "struct_window": track.struct_window,
        "struct_penalty": track.struct_penalty,
        "tag_unit_cost": track.tag_unit_cost,
        "tag_mismatch_cost": track.tag_mismatch_cost,
        "d_scale": cf.d_scale,
    }
    if track.music_beats is not None:
        doc["beats"] = {"times": list(track.music_beats.beats_s),
                        "source": track.music_beats.source}
    if track.tags is not None:
        doc["tags"] = [
            {"start_s": s.start_s, "end_s": s.end_s, "global_tag": s.global_tag,
             "local_order": s.local_order}
            for s in track.tags.spans
        ]
    return doc


def condition_from_doc(doc: dict, lax: bool = False) -> ConditionFile:
    _check_keys(doc, ["version", "duration_s"],
                ["beats", "tags", "keyframes", "weights", "sigma_s", "struct_window",
                 "struct_penalty", "tag_unit_cost", "tag_mismatch_cost", "d_scale"],
                "", lax)
    if doc["version"] != 1:
        raise SchemaError(f"unsupported condition file version {doc['version']!r}", "/version")

    beats = None
    if doc.get("beats") is not None:
        b = doc["beats"]
        _check_keys(b, ["times"], ["source"], "/beats", lax)
        if not isinstance(b["times"], list):
            raise SchemaError("beat times must be an array", "/beats/times")
        try:
            beats = BeatTrack(beats_s=tuple(_number(x, "/beats/times") for x in b["times"]),
                              source=b.get("source", "music_ingested"))
        except StructuralError as e:
            raise SchemaError(str(e), "/beats") from None

    tags = None
    if doc.get("tags") is not None:
        if not isinstance(doc["tags"], list):
            raise SchemaError("tags must be an array", "/tags")
        spans = []
        for i, s in enumerate(doc["tags"]):
            ptr = f"/tags/{i}"
            _check_keys(s, ["start_s", "end_s", "global_tag", "local_order"], [], ptr, lax)
            try:
                spans.append(TagSpan(start_s=_number(s["start_s"], ptr),
                                     end_s=_number(s["end_s"], ptr),
                                     global_tag=str(s["global_tag"]),
                                     local_order=int(s["local_order"])))
            except StructuralError as e:
                raise SchemaError(str(e), ptr) from None
        try:
            tags = TagTrack(spans=tuple(spans))
        except StructuralError as e:
            raise SchemaError(str(e), "/tags") from None

    keyframes = []
    for i, k in enumerate(doc.get("keyframes", []) or []):
        ptr = f"/keyframes/{i}"
        _check_keys(k, ["time_s", "frame"], [], ptr, lax)
        if isinstance(k["frame"], bool) or not isinstance(k["frame"], int):
            raise SchemaError("frame must be an integer", f"{ptr}/frame")
        keyframes.append((_number(k["time_s"], f"{ptr}/time_s"), k["frame"]))

    wdoc = doc.get("weights") or {}
    _check_keys(wdoc, [], ["edge", "beat", "struct", "tag", "ext"], "/weights", lax)
    try:
        weights = Weights(
            edge=_number(wdoc.get("edge", 1.0), "/weights/edge"),
            beat=_number(wdoc.get("beat", 1.0), "/weights/beat"),
            struct=_number(wdoc.get("struct", 1.0), "/weights/struct"),
            tag=_number(wdoc.get("tag", 1.0), "/weights/tag"),
            ext=_number(wdoc.get("ext", 1.0), "/weights/ext"),
        )
        track = ConditionTrack(
            duration_s=_number(doc["duration_s"], "/duration_s"),
            music_beats=beats,
            tags=tags,
            keyframes=tuple(keyframes),
            weights=weights,
            sigma_s=_number(doc.get("sigma_s", 0.1), "/sigma_s"),
            struct_window=int(doc.get("struct_window", 48)),
            struct_penalty=(None if doc.get("struct_penalty") is None
                            else _number(doc["struct_penalty"], "/struct_penalty")),
            tag_unit_cost=_number(doc.get("tag_unit_cost", 1.0), "/tag_unit_cost"),
            tag_mismatch_cost=_number(doc.get("tag_mismatch_cost", 1.0e6), "/tag_mismatch_cost"),
        )
    except StructuralError as e:
        raise SchemaError(str(e)) from None
    d_scale = None if doc.get("d_scale") is None else _number(doc["d_scale"], "/d_scale")
    if d_scale is not None and not 0.0 <= d_scale < 1.0:
        raise SchemaError("d_scale must be in [0, 1)", "/d_scale")
    return ConditionFile(track=track, d_scale=d_scale)


def load_condition(path, lax: bool = False) -> ConditionFile:
    return condition_from_doc(_load_doc(path), lax=lax)


def save_condition(path, cf: ConditionFile):
    with open(path, "w", encoding="utf-8") as f:
        f.write(canonical_dumps(condition_to_doc(cf)))


# ---------------------------------------------------------------------------
# source tag tracks


def load_tag_track(path, lax: bool = False) -> TagTrack:
    doc = _load_doc(path)
    _check_keys(doc, ["version", "spans"], [], "", lax)
    if doc["version"] != 1:
        raise SchemaError(f"unsupported tag file version {doc['version']!r}", "/version")
    spans = []
    for i, s in enumerate(doc["spans"]):
        ptr = f"/spans/{i}"
        _check_keys(s, ["start_s", "end_s", "global_tag", "local_order"], [], ptr, lax)
        try:
            spans.append(TagSpan(start_s=_number(s["start_s"], ptr),
                                 end_s=_number(s["end_s"], ptr),
                                 global_tag=str(s["global_tag"]),
                                 local_order=int(s["local_order"])))
        except StructuralError as e:
            raise SchemaError(str(e), ptr) from None
    try:
        return TagTrack(spans=tuple(spans))
    except StructuralError as e:
        raise SchemaError(str(e), "/spans") from None


def tag_track_to_doc(track: TagTrack) -> dict:
    return {
        "version": 1,
        "spans": [
            {"start_s": s.start_s, "end_s": s.end_s, "global_tag": s.global_tag,
             "local_order": s.local_order}
            for s in track.spans
        ],
    }
