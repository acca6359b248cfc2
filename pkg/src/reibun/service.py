"""HTTP service exposing suggestion, generation, judging, health, and stats.

Routes live canonically under ``/v1`` with bare aliases for convenience.
Request bodies are parsed by hand so malformed JSON and missing fields both
yield a 400 with a structured error envelope rather than a framework
default.  The engine is immutable, so request handling is stateless.
"""

from __future__ import annotations

import json
import logging
import time
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .corpus import ConlluParseError, Level
from .engine import Engine, RawContextError
from .genclient import (
    ChatEndpoint,
    GenerationConfig,
    GenerationError,
    GenQuery,
    HttpChatEndpoint,
    JudgeParseError,
    ScriptedEndpoint,
    generate_examples,
    judge_block,
    make_block,
)
from .scoring import EmbeddingError

__all__ = ["create_app"]

log = logging.getLogger(__name__)

_BAD_REQUEST_ERRORS = (
    ValueError,
    ConlluParseError,
    RawContextError,
    JudgeParseError,
    KeyError,
)


def _error(status: int, kind: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error": {"type": kind, "message": message}},
    )


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except (json.JSONDecodeError, UnicodeDecodeError) as err:
        raise _BodyError(f"request body is not valid JSON: {err}") from err
    if not isinstance(body, dict):
        raise _BodyError("request body must be a JSON object")
    return body


class _BodyError(ValueError):
    pass


def _require(body: dict, *names: str) -> list:
    missing = [n for n in names if n not in body]
    if missing:
        raise _BodyError(f"missing required fields: {', '.join(missing)}")
    return [body[n] for n in names]


def _generation_endpoint(engine: Engine) -> ChatEndpoint:
    cfg = engine.config
    if cfg.generation_transcript:
        text = Path(cfg.generation_transcript).read_text(encoding="utf-8")
        return ScriptedEndpoint([p.strip() for p in text.split("\n---\n")])
    if cfg.generation_url:
        return HttpChatEndpoint(
            cfg.generation_url, cfg.generation_model, auth_token=cfg.generation_auth_token
        )
    raise _ServiceUnavailable("no generation endpoint configured")


def _judge_endpoint(engine: Engine) -> ChatEndpoint:
    cfg = engine.config
    if cfg.judge_transcript:
        text = Path(cfg.judge_transcript).read_text(encoding="utf-8")
        return ScriptedEndpoint([p.strip() for p in text.split("\n---\n")])
    if cfg.judge_url:
        return HttpChatEndpoint(
            cfg.judge_url, cfg.judge_model, auth_token=cfg.judge_auth_token
        )
    raise _ServiceUnavailable("no judge endpoint configured")


class _ServiceUnavailable(RuntimeError):
    pass


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="reibun", version="1.0", docs_url=None, redoc_url=None)

    @app.middleware("http")
    async def _log_requests(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        log.info(
            "%s %s -> %d (%.1f ms)",
            request.method,
            request.url.path,
            response.status_code,
            1000.0 * (time.perf_counter() - started),
        )
        return response

    async def health() -> dict:
        return engine.health()

    async def stats() -> dict:
        return engine.stats()

    async def suggest(request: Request):
        try:
            body = await _json_body(request)
            (word, context, level) = _require(body, "word", "context", "level")
            result = engine.suggest(
                word=str(word),
                context=str(context),
                level=str(level),
                k=body.get("k"),
                window=body.get("window"),
            )
        except _BAD_REQUEST_ERRORS as err:
            return _error(400, "bad_request", str(err))
        except EmbeddingError as err:
            return _error(502, "embedding_failure", str(err))
        return JSONResponse(result.as_dict())

    async def generate(request: Request):
        try:
            body = await _json_body(request)
            (word, context, level) = _require(body, "word", "context", "level")
            endpoint = _generation_endpoint(engine)
            q = GenQuery(
                word=str(word),
                context=str(context),
                level=Level.parse(str(level)),
                k=int(body.get("k", engine.config.k)),
            )
            gen_cfg = GenerationConfig(
                temperature=float(body.get("temperature", engine.config.temperature)),
                repetition_penalty=engine.config.repetition_penalty,
                max_rounds=int(body.get("max_rounds", engine.config.max_rounds)),
                numbered_list=bool(body.get("numbered_list", engine.config.numbered_list)),
            )
            result = generate_examples(q, gen_cfg, endpoint)
        except _BAD_REQUEST_ERRORS as err:
            return _error(400, "bad_request", str(err))
        except _ServiceUnavailable as err:
            return _error(503, "not_configured", str(err))
        except GenerationError as err:
            return _error(502, "generation_failure", str(err))
        return JSONResponse(result.as_dict())

    async def judge(request: Request):
        try:
            body = await _json_body(request)
            (word, context, level, systems) = _require(
                body, "word", "context", "level", "systems"
            )
            if not isinstance(systems, dict) or not systems:
                raise _BodyError("systems must be a non-empty object of sentence lists")
            block = make_block(
                word=str(word),
                context=str(context),
                target_level=Level.parse(str(level)),
                system_outputs={str(k): [str(s) for s in v] for k, v in systems.items()},
                seed=int(body.get("seed", engine.config.seed)),
            )
            endpoint = _judge_endpoint(engine)
            votes, majority = judge_block(
                block, endpoint, n_votes=int(body.get("votes", engine.config.judge_votes))
            )
        except _ServiceUnavailable as err:
            return _error(503, "not_configured", str(err))
        except (GenerationError, JudgeParseError) as err:
            return _error(502, "judge_failure", str(err))
        except _BAD_REQUEST_ERRORS as err:
            return _error(400, "bad_request", str(err))
        return JSONResponse(
            {
                "display_order": list(block.display_order),
                "votes_valid": [v is not None for v in votes],
                "majority": majority.as_dict(),
            }
        )

    for prefix in ("/v1", ""):
        app.add_api_route(f"{prefix}/health", health, methods=["GET"])
        app.add_api_route(f"{prefix}/stats", stats, methods=["GET"])
        app.add_api_route(f"{prefix}/suggest", suggest, methods=["POST"])
        app.add_api_route(f"{prefix}/generate", generate, methods=["POST"])
        app.add_api_route(f"{prefix}/judge", judge, methods=["POST"])

    return app
