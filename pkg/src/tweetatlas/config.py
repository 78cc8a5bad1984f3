"""Pipeline configuration: a flat ``key = value`` file, overridable by CLI flags.

Recognised keys (dashes and underscores are interchangeable)::

    input                 JSON-lines replay file
    endpoint              URL to poll instead of a file
    rate                  e.g. 450/15m
    interval              e.g. 500-2000ms
    duration              polling duration in seconds
    gazetteer             gazetteer CSV (default: bundled seed)
    patch                 gazetteer patch CSV, prepended
    fictional             fictional-place list
    labels                tweet_id,country_iso CSV for resolver metrics
    native_map            country_iso,language_code CSV (default: bundled)
    hdi                   country_iso,category,un_rank CSV (default: bundled)
    top_users             K for the handle rankings
    top_words             N for the word ranking
    out_dir               output directory
    classic_factor        true/false
    max_rank              present | all
    dedupe_memory_bound   ids held in memory before spilling to disk

Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

OUT_DIR_ENV = "TWEETATLAS_OUT_DIR"


class ConfigError(ValueError):
    pass


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off", ""):
        return False
    raise ConfigError(f"not a boolean: {v!r}")


@dataclass
class PipelineConfig:
    input: Path | None = None
    endpoint: str | None = None
    rate: str = "450/15m"
    interval: str = "500-2000ms"
    duration: float = 60.0
    gazetteer: Path | None = None
    patch: Path | None = None
    fictional: Path | None = None
    labels: Path | None = None
    native_map: Path | None = None
    hdi: Path | None = None
    top_users: int = 500
    top_words: int = 100
    out_dir: Path | None = None
    classic_factor: bool = False
    max_rank: str = "present"
    dedupe_memory_bound: int = 1_000_000

    @classmethod
    def keys(cls) -> set[str]:
        return {f.name for f in fields(cls)}

    def update(self, values: dict) -> "PipelineConfig":
        for key, raw in values.items():
            if raw is None:
                continue
            key = key.replace("-", "_")
            if key not in self.keys():
                raise ConfigError(f"unknown config key {key!r}")
            setattr(self, key, self._coerce(key, raw))
        return self

    def _coerce(self, key, raw):
        try:
            if key in ("top_users", "top_words", "dedupe_memory_bound"):
                return int(raw)
            if key == "duration":
                return float(raw)
            if key == "classic_factor":
                return _bool(raw)
            if key in ("input", "gazetteer", "patch", "fictional", "labels", "native_map", "hdi", "out_dir"):
                return Path(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
        return str(raw)

    def resolved_out_dir(self) -> Path:
        if self.out_dir is not None:
            return self.out_dir
        env = os.environ.get(OUT_DIR_ENV)
        return Path(env) if env else Path("tweetatlas-out")

    def validate(self) -> None:
        from .ingest import RateLimitPolicy

        if (self.input is None) == (self.endpoint is None):
            raise ConfigError("exactly one of input or endpoint is required")
        for key in ("input", "gazetteer", "patch", "fictional", "labels", "native_map", "hdi"):
            p = getattr(self, key)
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"{key}: no such file: {p}")
        if self.top_users < 1 or self.top_words < 1:
            raise ConfigError("top_users and top_words must be >= 1")
        if self.dedupe_memory_bound < 1:
            raise ConfigError("dedupe_memory_bound must be >= 1")
        if self.max_rank not in ("present", "all"):
            raise ConfigError("max_rank must be 'present' or 'all'")
        try:
            RateLimitPolicy.parse(self.rate, self.interval)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def echo(self) -> dict:
        return {f.name: (str(v) if isinstance(v := getattr(self, f.name), Path) else v)
                for f in fields(self)}


def read_config_file(path: str | Path) -> dict[str, str]:
    values = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    unknown = set(values) - PipelineConfig.keys()
    if unknown:
        raise ConfigError(f"{path}: unknown keys: {', '.join(sorted(unknown))}")
    return values
