"""Gateway data model: endpoint configs, calls, replies, cache keys."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

CHAT = "chat"
VISION_CHAT = "vision_chat"
EMBED = "embed"

CALL_KINDS = (CHAT, VISION_CHAT, EMBED)


@dataclass(frozen=True)
class ModelEndpointConfig:
    endpoint_id: str
    base_url: str
    model_name: str
    credential_ref: str = ""  # env var name; empty means no credential needed
    requests_per_minute: int = 60
    timeout: float = 60.0
    max_retries: int = 3

    def __post_init__(self):
        if self.requests_per_minute < 1:
            raise ValueError("requests_per_minute must be >= 1")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @classmethod
    def from_json(cls, data: dict) -> "ModelEndpointConfig":
        return cls(
            endpoint_id=data["endpoint_id"],
            base_url=data["base_url"],
            model_name=data["model_name"],
            credential_ref=data.get("credential_ref", ""),
            requests_per_minute=int(data.get("requests_per_minute", 60)),
            timeout=float(data.get("timeout", 60.0)),
            max_retries=int(data.get("max_retries", 3)),
        )


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    digest: str  # sha256 hex of the raw bytes
    data: bytes

    @classmethod
    def from_bytes(cls, data: bytes) -> "ImagePart":
        return cls(hashlib.sha256(data).hexdigest(), data)


@dataclass(frozen=True)
class SamplingParams:
    temperature: float = 0.0
    max_tokens: int = 1024
    seed: int | None = None


@dataclass(frozen=True)
class ModelCall:
    kind: str
    system_prompt: str = ""
    user_parts: tuple = ()
    sampling: SamplingParams = SamplingParams()

    def __post_init__(self):
        if self.kind not in CALL_KINDS:
            raise ValueError(f"unknown call kind {self.kind!r}")
        images = [p for p in self.user_parts if isinstance(p, ImagePart)]
        if self.kind == VISION_CHAT and not images:
            raise ValueError("vision_chat calls need at least one image part")
        if self.kind == EMBED and images:
            raise ValueError("embed calls take text parts only")

    def prompt_text(self) -> str:
        return "\n".join(p.text for p in self.user_parts if isinstance(p, TextPart))

    def text_parts(self) -> list[str]:
        return [p.text for p in self.user_parts if isinstance(p, TextPart)]

    def image_digests(self) -> list[str]:
        return [p.digest for p in self.user_parts if isinstance(p, ImagePart)]


@dataclass(frozen=True)
class CacheKey:
    digest: str  # sha256 hex

    @property
    def prefix(self) -> str:
        return self.digest[:8]


def cache_key(config: ModelEndpointConfig, call: ModelCall) -> CacheKey:
    """Content hash over everything that can change a reply."""
    material = json.dumps(
        {
            "endpoint_id": config.endpoint_id,
            "model": config.model_name,
            "kind": call.kind,
            "system": call.system_prompt,
            "texts": call.text_parts(),
            "images": call.image_digests(),
            "sampling": {
                "temperature": call.sampling.temperature,
                "max_tokens": call.sampling.max_tokens,
                "seed": call.sampling.seed,
            },
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return CacheKey(hashlib.sha256(material.encode("utf-8")).hexdigest())


@dataclass(frozen=True)
class ModelReply:
    text: str | None = None
    vectors: tuple[tuple[float, ...], ...] | None = None
    usage: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "text": self.text,
            "vectors": [list(v) for v in self.vectors] if self.vectors is not None else None,
            "usage": dict(self.usage),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ModelReply":
        vectors = data.get("vectors")
        return cls(
            text=data.get("text"),
            vectors=tuple(tuple(v) for v in vectors) if vectors is not None else None,
            usage=dict(data.get("usage") or {}),
        )
