"""Application configuration files.

One structured-text document (YAML or JSON) configures a whole run: the
backend to talk to, the engine (personas, rounds, templates, extraction
policy), and, for the server, listening and storage settings. The CLI and
the service both load configs through here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .backends import BackendConfig
from .discussion import AgentPersona, DiscussionConfig, default_personas
from .grading import ExtractionPolicy
from .session import EngineConfig


class ConfigError(ValueError):
    """The configuration document is malformed."""


@dataclass(frozen=True)
class ServiceSettings:
    host: str = "127.0.0.1"
    port: int = 8075
    data_dir: str = "./sessions"
    job_pool: int = 4
    queue_challenges: bool = False


@dataclass(frozen=True)
class AppConfig:
    backend: BackendConfig = field(default_factory=BackendConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)
    service: ServiceSettings = field(default_factory=ServiceSettings)
    deterministic: bool = False


def _require_mapping(value: object, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected a mapping")
    return value


def _backend_from(raw: dict, base_dir: Path) -> BackendConfig:
    known = {
        "kind",
        "model_name",
        "temperature",
        "endpoint",
        "credentials_env",
        "request_timeout_s",
        "max_retries",
        "script_path",
        "capture_path",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"backend: unknown field(s) {sorted(unknown)}")
    values = dict(raw)
    for path_field in ("script_path", "capture_path"):
        if values.get(path_field):
            values[path_field] = str((base_dir / values[path_field]).resolve())
    try:
        return BackendConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"backend: {exc}") from exc


def _engine_from(raw: dict, base_dir: Path) -> EngineConfig:
    known = {"personas", "num_rounds", "template_dir", "parallelism", "extraction", "deterministic"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"engine: unknown field(s) {sorted(unknown)}")
    personas: tuple[AgentPersona, ...]
    if "personas" in raw:
        if not isinstance(raw["personas"], list) or len(raw["personas"]) < 2:
            raise ConfigError("engine.personas: expected a list of at least two personas")
        try:
            personas = tuple(AgentPersona(p["name"], p["bias"]) for p in raw["personas"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"engine.personas: {exc}") from exc
    else:
        personas = default_personas()
    try:
        discussion = DiscussionConfig(
            num_agents=len(personas), num_rounds=int(raw.get("num_rounds", 2))
        )
    except ValueError as exc:
        raise ConfigError(f"engine: {exc}") from exc
    extraction_raw = _require_mapping(raw.get("extraction"), "engine.extraction")
    try:
        extraction = ExtractionPolicy(
            max_parse_retries=int(extraction_raw.get("max_parse_retries", 2)),
            unknown_attack_ids=extraction_raw.get("unknown_attack_ids", "drop"),
        )
    except ValueError as exc:
        raise ConfigError(f"engine.extraction: {exc}") from exc
    template_dir = raw.get("template_dir")
    if template_dir:
        template_dir = str((base_dir / template_dir).resolve())
    return EngineConfig(
        personas=personas,
        discussion=discussion,
        extraction=extraction,
        template_dir=template_dir,
        parallelism=int(raw.get("parallelism", 1)),
    )


def parse_app_config(document: str, base_dir: str | Path = ".") -> AppConfig:
    base = Path(base_dir)
    try:
        data = yaml.safe_load(document)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid config document: {exc}") from exc
    data = _require_mapping(data, "config")
    known = {"backend", "engine", "service", "deterministic"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"config: unknown section(s) {sorted(unknown)}")
    backend = _backend_from(_require_mapping(data.get("backend"), "backend"), base)
    engine_raw = _require_mapping(data.get("engine"), "engine")
    deterministic = bool(data.get("deterministic", engine_raw.get("deterministic", False)))
    engine = _engine_from(engine_raw, base)
    service_raw = _require_mapping(data.get("service"), "service")
    known_service = {"host", "port", "data_dir", "job_pool", "queue_challenges"}
    unknown = set(service_raw) - known_service
    if unknown:
        raise ConfigError(f"service: unknown field(s) {sorted(unknown)}")
    service = ServiceSettings(
        host=service_raw.get("host", "127.0.0.1"),
        port=int(service_raw.get("port", 8075)),
        data_dir=str((base / service_raw.get("data_dir", "./sessions"))),
        job_pool=int(service_raw.get("job_pool", 4)),
        queue_challenges=bool(service_raw.get("queue_challenges", False)),
    )
    return AppConfig(backend=backend, engine=engine, service=service, deterministic=deterministic)


def load_app_config(path: str | Path) -> AppConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_app_config(path.read_text("utf-8"), base_dir=path.parent)
