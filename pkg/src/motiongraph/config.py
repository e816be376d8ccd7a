"""Engine configuration: build, search and serving knobs with documented
defaults. Loaded from a JSON file (strict schema) and echoed into every
result's provenance so outputs are reproducible from their own metadata."""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass
from typing import Optional

from .errors import SchemaError, StructuralError


@dataclass(frozen=True)
class EngineConfig:
    alpha: float = 1.0  # threshold = alpha * mean nearest-neighbour distance
    tau: Optional[float] = None  # explicit threshold override
    w_edge: float = 1.0
    w_beat: float = 1.0
    w_struct: float = 1.0
    w_tag: float = 1.0
    w_ext: float = 1.0
    sigma_s: float = 0.1  # beat agreement kernel width, seconds
    struct_window: int = 48  # frames
    struct_penalty: Optional[float] = None  # None: 0.1 * tau at query time
    blend_window: int = 12  # interior frames per transition
    beam_width: int = 32
    commit_lag: int = 12  # streaming commit delay, frames
    d_scale: float = 0.1  # default keyframe length tolerance
    beat_min_separation_s: float = 0.2
    feasibility_threshold: float = 0.001
    port: int = 8765

    def __post_init__(self):
        for name in ("alpha", "w_edge", "w_beat", "w_struct", "w_tag", "w_ext",
                     "sigma_s", "beat_min_separation_s", "feasibility_threshold"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise StructuralError(f"config {name} must be finite and >= 0, got {v}")
        if self.alpha == 0 or self.sigma_s == 0:
            raise StructuralError("alpha and sigma_s must be > 0")
        if self.tau is not None and self.tau <= 0:
            raise StructuralError("tau override must be > 0")
        if self.struct_penalty is not None and self.struct_penalty < 0:
            raise StructuralError("struct_penalty must be >= 0")
        for name in ("struct_window", "blend_window", "beam_width", "commit_lag", "port"):
            if getattr(self, name) < 0:
                raise StructuralError(f"config {name} must be >= 0")
        if self.beam_width < 1:
            raise StructuralError("beam_width must be >= 1")
        if not 0.0 <= self.d_scale < 1.0:
            raise StructuralError("d_scale must be in [0, 1)")

    def to_doc(self) -> dict:
        return asdict(self)


_FIELDS = set(EngineConfig.__dataclass_fields__)


def config_from_doc(doc: dict, lax: bool = False) -> EngineConfig:
    if not isinstance(doc, dict):
        raise SchemaError("config must be a JSON object")
    if not lax:
        for key in doc:
            if key not in _FIELDS:
                raise SchemaError(f"unknown config field {key!r}", f"/{key}")
    kwargs = {k: v for k, v in doc.items() if k in _FIELDS}
    try:
        return EngineConfig(**kwargs)
    except StructuralError as e:
        raise SchemaError(str(e)) from None


def load_config(path=None, lax: bool = False) -> EngineConfig:
    """Config file resolution: explicit path, else the CONFIG env var, else
    defaults. PORT overrides the port either way."""
    from .io import parse_json

    path = path or os.environ.get("CONFIG")
    if path:
        try:
            with open(path, "r", encoding="utf-8") as f:
                cfg = config_from_doc(parse_json(f.read()), lax=lax)
        except OSError as e:
            raise SchemaError(f"cannot read config: {e}", pointer=str(path)) from None
    else:
        cfg = EngineConfig()
    port_env = os.environ.get("PORT")
    if port_env:
        try:
            cfg = EngineConfig(**{**cfg.to_doc(), "port": int(port_env)})
        except ValueError:
            raise SchemaError(f"PORT must be an integer, got {port_env!r}") from None
    return cfg
