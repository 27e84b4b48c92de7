"""Sliding-window rate limiting with an injectable clock."""
from __future__ import annotations

import threading
import time
from collections import deque
from typing import Protocol

WINDOW_SECONDS = 60.0


class Clock(Protocol):
    def now(self) -> float: ...
    def sleep(self, seconds: float) -> None: ...


class SystemClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class FakeClock:
    """Deterministic clock for tests: sleep() advances shared time instantly.

    Safe for multi-threaded use; time never goes backwards.
    """

    def __init__(self, start: float = 0.0):
        self._now = start
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._now

    def sleep(self, seconds: float) -> None:
        with self._lock:
            self._now += max(0.0, seconds)


class SlidingWindowLimiter:
    """Admits at most ``rpm`` acquisitions in any sliding 60s window."""

    def __init__(self, rpm: int, clock: Clock | None = None):
        if rpm < 1:
            raise ValueError("rpm must be >= 1")
        self.rpm = rpm
        self.clock = clock or SystemClock()
        self._admitted: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> float:
        """Block until a slot is free; returns the admission timestamp."""
        while True:
            with self._lock:
                now = self.clock.now()
                while self._admitted and now - self._admitted[0] >= WINDOW_SECONDS:
                    self._admitted.popleft()
                if len(self._admitted) < self.rpm:
                    self._admitted.append(now)
                    return now
                wait = self._admitted[0] + WINDOW_SECONDS - now
            self.clock.sleep(wait)
