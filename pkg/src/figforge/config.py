"""Run configuration: directories, endpoints, gate thresholds, task mix.

Config files are JSON; credentials never appear in them — each endpoint
names an environment variable instead.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .corpus.gates import DEFAULT_LICENSE_ALLOWLIST
from .figures import AlwaysMedicalClassifier, BrightnessClassifier
from .gateway import Gateway, HttpBackend, MockBackend, ModelEndpointConfig, ReplyCache
from .forge.records import TASK_TYPES

STAGE_ROLES = ("stage1", "stage2", "stage3", "stage4", "stage5")
ALL_ROLES = STAGE_ROLES + ("embed", "judge", "tagger")

CLASSIFIERS = {
    "passthrough": AlwaysMedicalClassifier,
    "brightness": BrightnessClassifier,
}


@dataclass(frozen=True)
class GateConfig:
    caption_words: int = 50
    sub_caption_words: int = 10
    medical_ratio: float = 0.9
    license_allowlist: frozenset[str] = DEFAULT_LICENSE_ALLOWLIST
    classifier: str = "passthrough"
    min_panel: int = 64
    min_gutter: int = 5
    tau: float = 0.05

    def build_classifier(self):
        try:
            return CLASSIFIERS[self.classifier]()
        except KeyError:
            raise ConfigError(f"unknown classifier {self.classifier!r}; know {sorted(CLASSIFIERS)}")


@dataclass
class RunConfig:
    corpus_dir: Path
    output_dir: Path
    cache_dir: Path
    checkpoint_dir: Path
    endpoints: dict[str, ModelEndpointConfig] = field(default_factory=dict)
    gates: GateConfig = field(default_factory=GateConfig)
    workers: int = 1
    seed: int = 42
    task_mix: dict[str, int] = field(default_factory=lambda: {t: 1 for t in TASK_TYPES})

    def __post_init__(self):
        self.corpus_dir = Path(self.corpus_dir)
        self.output_dir = Path(self.output_dir)
        self.cache_dir = Path(self.cache_dir)
        self.checkpoint_dir = Path(self.checkpoint_dir)
        dirs = [self.corpus_dir, self.output_dir, self.cache_dir, self.checkpoint_dir]
        if len({str(d.resolve()) for d in dirs}) != len(dirs):
            raise ConfigError("corpus, output, cache, and checkpoint directories must be distinct")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for task_type in self.task_mix:
            if task_type not in TASK_TYPES:
                raise ConfigError(f"task_mix names unknown task type {task_type!r}")

    def endpoint(self, role: str) -> ModelEndpointConfig:
        try:
            return self.endpoints[role]
        except KeyError:
            raise ConfigError(f"config names no endpoint for role {role!r}")

    def require_stage_endpoints(self) -> None:
        missing = [r for r in STAGE_ROLES if r not in self.endpoints]
        if missing:
            raise ConfigError(f"config must name endpoints for stages 1-5; missing {missing}")

    def with_mock_defaults(self) -> "RunConfig":
        """Fill any missing role with a mock endpoint (high rate limit)."""
        endpoints = dict(self.endpoints)
        for role in ALL_ROLES:
            endpoints.setdefault(role, ModelEndpointConfig(
                endpoint_id=f"mock-{role}",
                base_url="mock://",
                model_name=f"mock-{role}",
                requests_per_minute=1_000_000,
            ))
        return replace(self, endpoints=endpoints)


def load_config(path: str | Path, overrides: dict | None = None) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    data.update(overrides or {})
    return config_from_dict(data, base_dir=Path(path).parent)


def config_from_dict(data: dict, base_dir: Path | None = None) -> RunConfig:
    def resolve(key: str) -> Path:
        try:
            raw = Path(data[key])
        except KeyError:
            raise ConfigError(f"config missing {key!r}")
        if base_dir is not None and not raw.is_absolute():
            return base_dir / raw
        return raw

    gates_data = dict(data.get("gates") or {})
    if "license_allowlist" in gates_data:
        gates_data["license_allowlist"] = frozenset(gates_data["license_allowlist"])
    endpoints = {
        role: ModelEndpointConfig.from_json(cfg)
        for role, cfg in (data.get("endpoints") or {}).items()
    }
    task_mix = {t: int(n) for t, n in (data.get("task_mix") or {t: 1 for t in TASK_TYPES}).items()}
    try:
        gates = GateConfig(**gates_data)
    except TypeError as exc:
        raise ConfigError(f"bad gates section: {exc}")
    return RunConfig(
        corpus_dir=resolve("corpus_dir"),
        output_dir=resolve("output_dir"),
        cache_dir=resolve("cache_dir"),
        checkpoint_dir=resolve("checkpoint_dir"),
        endpoints=endpoints,
        gates=gates,
        workers=int(data.get("workers", 1)),
        seed=int(data.get("seed", 42)),
        task_mix=task_mix,
    )


def build_gateway(config: RunConfig, mock: bool = False, transport=None, clock=None,
                  fixtures: dict | None = None) -> Gateway:
    cache = ReplyCache(config.cache_dir)
    if mock:
        backend = MockBackend(fixtures=fixtures)
    else:
        backend = HttpBackend(transport=transport)
    return Gateway(cache, backend, clock=clock)
