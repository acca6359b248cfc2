"""Single configuration surface for the CLI and the HTTP service.

Settings load from a TOML file and can be overridden per key through
environment variables named ``REIBUN_<SECTION>_<KEY>``, so a deployment can
repoint paths or endpoints without editing the file.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - version shim
    import tomli as tomllib

__all__ = ["EngineConfig", "ConfigError", "load_config", "ENV_PREFIX"]

ENV_PREFIX = "REIBUN"


class ConfigError(ValueError):
    """Configuration file or environment override is invalid."""


# (section, key) -> (attribute, type); booleans accept 1/0/true/false in env.
_SCHEMA: dict[tuple[str, str], tuple[str, type]] = {
    ("corpus", "path"): ("corpus_path", str),
    ("corpus", "index"): ("index_path", str),
    ("filters", "min_tokens"): ("min_tokens", int),
    ("filters", "max_tokens"): ("max_tokens", int),
    ("filters", "max_punct_num_ratio"): ("max_punct_num_ratio", float),
    ("filters", "final_particles"): ("final_particles", list),
    ("scoring", "penalty_easier"): ("penalty_easier", float),
    ("scoring", "penalty_harder"): ("penalty_harder", float),
    ("selection", "k"): ("k", int),
    ("selection", "window"): ("window", int),
    ("embeddings", "mode"): ("embeddings_mode", str),
    ("embeddings", "path"): ("embeddings_path", str),
    ("embeddings", "url"): ("annotator_url", str),
    ("embeddings", "dimension"): ("embedding_dim", int),
    ("generation", "url"): ("generation_url", str),
    ("generation", "model"): ("generation_model", str),
    ("generation", "auth_token"): ("generation_auth_token", str),
    ("generation", "transcript"): ("generation_transcript", str),
    ("generation", "temperature"): ("temperature", float),
    ("generation", "repetition_penalty"): ("repetition_penalty", float),
    ("generation", "max_rounds"): ("max_rounds", int),
    ("generation", "numbered_list"): ("numbered_list", bool),
    ("judge", "url"): ("judge_url", str),
    ("judge", "model"): ("judge_model", str),
    ("judge", "auth_token"): ("judge_auth_token", str),
    ("judge", "transcript"): ("judge_transcript", str),
    ("judge", "votes"): ("judge_votes", int),
    ("service", "host"): ("host", str),
    ("service", "port"): ("port", int),
    ("runtime", "seed"): ("seed", int),
    ("runtime", "max_concurrency"): ("max_concurrency", int),
    ("runtime", "timeout"): ("timeout", float),
}

_PROVIDER_MODES = ("stub", "precomputed", "remote")


@dataclass(slots=True)
class EngineConfig:
    corpus_path: str | None = None
    index_path: str | None = None
    min_tokens: int = 5
    max_tokens: int = 50
    max_punct_num_ratio: float = 0.20
    final_particles: tuple[str, ...] = ("よ", "ね")
    penalty_easier: float = 0.2
    penalty_harder: float = 0.4
    k: int = 5
    window: int = 50
    embeddings_mode: str = "stub"
    embeddings_path: str | None = None
    annotator_url: str | None = None
    embedding_dim: int = 64
    generation_url: str | None = None
    generation_model: str = "default"
    generation_auth_token: str | None = None
    generation_transcript: str | None = None
    temperature: float = 1.0
    repetition_penalty: float | None = None
    max_rounds: int = 4
    numbered_list: bool = False
    judge_url: str | None = None
    judge_model: str = "default"
    judge_auth_token: str | None = None
    judge_transcript: str | None = None
    judge_votes: int = 3
    host: str = "127.0.0.1"
    port: int = 8000
    seed: int = 0
    max_concurrency: int = 8
    timeout: float = 10.0

    def validate(self) -> None:
        if self.window < self.k:
            raise ConfigError(f"window {self.window} must be >= k {self.k}")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.embeddings_mode not in _PROVIDER_MODES:
            raise ConfigError(
                f"embeddings mode {self.embeddings_mode!r} not one of {_PROVIDER_MODES}"
            )
        if self.embeddings_mode == "precomputed" and not self.embeddings_path:
            raise ConfigError("precomputed embeddings mode requires embeddings.path")
        if self.embeddings_mode == "remote" and not self.annotator_url:
            raise ConfigError("remote embeddings mode requires embeddings.url")


def _coerce(raw: str, typ: type, name: str) -> Any:
    try:
        if typ is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if typ is list:
            return [p for p in raw.split(",") if p]
        return typ(raw)
    except ValueError as err:
        raise ConfigError(f"bad value for {name}: {err}") from err


def load_config(
    path: str | None = None, env: Mapping[str, str] | None = None
) -> EngineConfig:
    """Read the TOML file (if given), then apply environment overrides."""
    env = os.environ if env is None else env
    cfg = EngineConfig()

    if path is not None:
        try:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as err:
            raise ConfigError(f"{path}: {err}") from err
        for section, body in doc.items():
            if not isinstance(body, dict):
                raise ConfigError(f"top-level key {section!r} must be a table")
            for key, value in body.items():
                spec = _SCHEMA.get((section, key))
                if spec is None:
                    raise ConfigError(f"unknown setting [{section}] {key}")
                attr, typ = spec
                if typ is list:
                    if not isinstance(value, list):
                        raise ConfigError(f"[{section}] {key} must be an array")
                    value = tuple(str(v) for v in value)
                elif typ is float and isinstance(value, int):
                    value = float(value)
                elif not isinstance(value, typ):
                    raise ConfigError(
                        f"[{section}] {key} must be {typ.__name__}, got {type(value).__name__}"
                    )
                setattr(cfg, attr, value)

    for (section, key), (attr, typ) in _SCHEMA.items():
        env_name = f"{ENV_PREFIX}_{section.upper()}_{key.upper()}"
        if env_name in env:
            value = _coerce(env[env_name], typ, env_name)
            if typ is list:
                value = tuple(value)
            setattr(cfg, attr, value)

    cfg.validate()
    return cfg
