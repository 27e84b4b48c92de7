from .model import (
    CHAT,
    EMBED,
    VISION_CHAT,
    CacheKey,
    ImagePart,
    ModelCall,
    ModelEndpointConfig,
    ModelReply,
    SamplingParams,
    TextPart,
    cache_key,
)
from .cache import ReplyCache
from .client import Gateway, GatewayStats, HttpBackend
from .mock import MockBackend, split_sections
from .ratelimit import FakeClock, SlidingWindowLimiter, SystemClock

__all__ = [
    "CHAT",
    "VISION_CHAT",
    "EMBED",
    "ModelEndpointConfig",
    "ModelCall",
    "ModelReply",
    "SamplingParams",
    "TextPart",
    "ImagePart",
    "CacheKey",
    "cache_key",
    "ReplyCache",
    "Gateway",
    "GatewayStats",
    "HttpBackend",
    "MockBackend",
    "split_sections",
    "SlidingWindowLimiter",
    "SystemClock",
    "FakeClock",
]
