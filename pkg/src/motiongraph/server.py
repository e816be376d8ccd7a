"""HTTP API for the viewer UI.

JSON over HTTP/1.1, UTF-8, canonical serialization (identical bytes to the
CLI outputs for the same query). Errors use the body
``{"code": N, "message": str, "detail": {...}}`` with the CLI's stable code
numbering: 4 schema (HTTP 400), 3 infeasible (HTTP 409), 2 graph unavailable
(HTTP 503). The server is stateless between requests: the graph and pose
sequence are loaded at startup and never mutated.
"""

from __future__ import annotations

import json
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import StreamingResponse

from .engine import Engine, execute_query, result_to_doc
from .errors import EngineError, InfeasibleQueryError, SchemaError
from .io import canonical_dumps, condition_from_doc, parse_json


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(content=canonical_dumps(payload), status_code=status_code,
                    media_type="application/json")


def _error_response(status: int, code: int, message: str, detail=None) -> Response:
    return _json_response({"code": code, "message": message, "detail": detail or {}},
                          status_code=status)


def _http_status(exc: EngineError) -> int:
    if isinstance(exc, InfeasibleQueryError):
        return 409
    if exc.exit_code == 2:
        return 503
    return 400


async def _condition_from_request(request: Request, lax: bool):
    raw = await request.body()
    try:
        doc = parse_json(raw.decode("utf-8"))
    except UnicodeDecodeError:
        raise SchemaError("request body is not UTF-8") from None
    return condition_from_doc(doc, lax=lax)


def create_app(engine: Optional[Engine]) -> FastAPI:
    app = FastAPI(title="motiongraph", docs_url=None, redoc_url=None)
    app.state.engine = engine

    @app.exception_handler(EngineError)
    async def _engine_error(request: Request, exc: EngineError):
        detail = getattr(exc, "detail", None)
        if isinstance(exc, SchemaError):
            detail = {"pointer": exc.pointer}
        return _error_response(_http_status(exc), exc.exit_code, str(exc), detail)

    def _engine() -> Engine:
        if app.state.engine is None:
            raise _GraphUnavailable("graph not loaded")
        return app.state.engine

    @app.get("/v1/health")
    async def health():
        if app.state.engine is None:
            return _error_response(503, 2, "graph not loaded")
        return _json_response({"status": "ok", "nodes": app.state.engine.graph.node_count})

    @app.get("/v1/graph/summary")
    async def graph_summary():
        eng = _engine()
        return _json_response({
            **eng.graph.summary(),
            "fps": eng.seq.fps,
            "provenance": eng.graph.provenance,
            "motion_beats_s": list(eng.motion_beats.beats_s),
            "config": eng.config.to_doc(),
        })

    @app.get("/v1/frames")
    async def frames(request: Request):
        eng = _engine()
        lo = _int_param(request, "from", 0)
        hi = _int_param(request, "to", eng.graph.node_count)
        n = eng.graph.node_count
        if not (0 <= lo <= hi <= n):
            raise SchemaError(f"frame range [{lo}, {hi}) out of bounds for {n} frames",
                              "/query/from")
        out = []
        for i in range(lo, hi):
            f = eng.seq.frames[i]
            entry = {"index": i, "t": f.time_s, "local": f.joints_local.tolist(),
                     "global": f.joints_global.tolist()}
            if f.joints_2d is not None:
                entry["joints2d"] = f.joints_2d.tolist()
            out.append(entry)
        return _json_response({
            "fps": eng.seq.fps,
            "skeleton": {"names": list(eng.seq.skeleton.names),
                         "parents": list(eng.seq.skeleton.parents)},
            "frames": out,
        })

    @app.post("/v1/search")
    async def search(request: Request):
        eng = _engine()
        cf = await _condition_from_request(request, _bool_param(request, "lax"))
        searcher = request.query_params.get("searcher", "dp")
        if searcher not in ("dp", "beam"):
            raise SchemaError(f"searcher must be dp or beam, got {searcher!r}", "/query/searcher")
        frames_q = _opt_int_param(request, "frames")
        width = _opt_int_param(request, "beam_width")
        _, _, result_doc, timeline_doc = execute_query(
            eng, cf, "sequence", searcher=searcher, frames=frames_q, beam_width=width)
        return _json_response({"result": result_doc, "timeline": timeline_doc})

    @app.post("/v1/keyframe-search")
    async def keyframe_search(request: Request):
        eng = _engine()
        cf = await _condition_from_request(request, _bool_param(request, "lax"))
        d = _opt_float_param(request, "d")
        _, _, result_doc, timeline_doc = execute_query(eng, cf, "keyframe", d=d)
        return _json_response({"result": result_doc, "timeline": timeline_doc})

    @app.post("/v1/stream-search")
    async def stream_search(request: Request):
        """Streaming beam search: emits NDJSON lines of committed frames as
        target frames are consumed, then the final result document. This is
        the fixed-lag commit mode for real-time playback."""
        eng = _engine()
        cf = await _condition_from_request(request, _bool_param(request, "lax"))
        frames_q = _opt_int_param(request, "frames")
        width = _opt_int_param(request, "beam_width")
        lag = _opt_int_param(request, "commit_lag")
        T = frames_q if frames_q is not None else eng.frames_for(cf.track)
        session = eng.stream_session(cf, beam_width=width, commit_lag=lag)

        def generate():
            try:
                for t in range(T):
                    for pos, node in session.push(t):
                        yield json.dumps({"committed": {"position": pos, "frame": node}}) + "\n"
                result = session.finalize()
                prov = eng.result_provenance("beam", {
                    "frames": T,
                    "beam_width": session.width,
                    "commit_lag": session.lag,
                    "streamed": True,
                })
                yield canonical_dumps({"result": result_to_doc(result, prov)})
            except EngineError as e:
                yield canonical_dumps({"error": {"code": e.exit_code, "message": str(e)}})

        return StreamingResponse(generate(), media_type="application/x-ndjson")

    return app


class _GraphUnavailable(EngineError):
    exit_code = 2


def _int_param(request: Request, name: str, default: int) -> int:
    raw = request.query_params.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise SchemaError(f"query parameter {name} must be an integer, got {raw!r}",
                          f"/query/{name}") from None


def _opt_int_param(request: Request, name: str) -> Optional[int]:
    raw = request.query_params.get(name)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise SchemaError(f"query parameter {name} must be an integer, got {raw!r}",
                          f"/query/{name}") from None


def _opt_float_param(request: Request, name: str) -> Optional[float]:
    raw = request.query_params.get(name)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise SchemaError(f"query parameter {name} must be a number, got {raw!r}",
                          f"/query/{name}") from None


def _bool_param(request: Request, name: str) -> bool:
    return request.query_params.get(name, "") in ("1", "true", "yes")
