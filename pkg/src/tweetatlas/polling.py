"""Rate-limited HTTP polling source (stand-in for the live search API)."""

from __future__ import annotations

import collections
import logging
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

import httpx

from .ingest import RateLimitPolicy

logger = logging.getLogger(__name__)


class RateLimiter:
    """Sliding-window request limiter with a randomized gap between requests.

    ``acquire`` blocks until both hold: fewer than ``max_requests`` request
    starts fall inside the trailing window, and the gap drawn after the
    previous request has elapsed. The gap is drawn uniformly from
    ``[poll_interval_min, poll_interval_max]``.
    """

    def __init__(self, policy: RateLimitPolicy, clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep, rng: random.Random | None = None):
        self.policy = policy
        self.clock = clock
        self.sleep = sleep
        self.rng = rng or random.Random()
        self._recent: collections.deque[float] = collections.deque()
        self._next_allowed = float("-inf")

    def wait_time(self, now: float) -> float:
        # expiry is compared as t0 + window <= now everywhere; mixing in
        # now - t0 >= window disagrees in the last float bit
        window = self.policy.window
        while self._recent and self._recent[0] + window <= now:
            self._recent.popleft()
        wait = max(0.0, self._next_allowed - now)
        if len(self._recent) >= self.policy.max_requests:
            wait = max(wait, self._recent[0] + window - now)
        return wait

    def acquire(self, deadline: float | None = None) -> float | None:
        """Block for the next slot; returns its timestamp, or None if past ``deadline``."""
        while True:
            now = self.clock()
            wait = self.wait_time(now)
            if wait <= 0:
                break
            # guard against a wait that rounds away when added to now
            wait = max(wait, abs(now) * 1e-15)
            if deadline is not None and now + wait >= deadline:
                return None
            self.sleep(wait)
        self._recent.append(now)
        p = self.policy
        self._next_allowed = now + self.rng.uniform(p.poll_interval_min, p.poll_interval_max)
        return now


@dataclass
class PollStats:
    requests: int = 0
    retries: int = 0
    failures: int = 0
    lines: int = 0
    request_times: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"requests": self.requests, "retries": self.retries,
                "failures": self.failures, "lines": self.lines}


class PollSource:
    """Iterate raw lines fetched by polling ``endpoint`` for ``duration`` seconds.

    Failed requests (network errors or non-2xx) are retried up to
    ``max_attempts`` times with exponential backoff starting at
    ``backoff``; a request that still fails is counted in
    ``stats.failures`` and polling carries on. Every attempt, retries
    included, goes through the rate limiter.
    """

    def __init__(self, endpoint: str, policy: RateLimitPolicy, duration: float, *,
                 client: httpx.Client | None = None, max_attempts: int = 3, backoff: float = 1.0,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep, seed: int | None = None,
                 timeout: float = 10.0):
        self.endpoint = endpoint
        self.duration = duration
        self.limiter = RateLimiter(policy, clock, sleep, random.Random(seed))
        self.client = client
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.clock = clock
        self.sleep = sleep
        self.timeout = timeout
        self.stats = PollStats()

    def __iter__(self) -> Iterator[bytes]:
        own = self.client is None
        client = self.client or httpx.Client(timeout=self.timeout)
        deadline = self.clock() + self.duration
        try:
            while True:
                body = self._fetch(client, deadline)
                if body is _DONE:
                    return
                if body is None:
                    continue
                for line in body.splitlines():
                    if line.strip():
                        self.stats.lines += 1
                        yield line
        finally:
            if own:
                client.close()

    def _fetch(self, client, deadline):
        for attempt in range(self.max_attempts):
            if attempt:
                self.stats.retries += 1
                delay = self.backoff * 2 ** (attempt - 1)
                if self.clock() + delay >= deadline:
                    self.stats.failures += 1
                    return _DONE
                self.sleep(delay)
            t = self.limiter.acquire(deadline)
            if t is None:
                if attempt:
                    self.stats.failures += 1
                return _DONE
            self.stats.requests += 1
            self.stats.request_times.append(t)
            try:
                resp = client.get(self.endpoint)
            except httpx.HTTPError as exc:
                logger.warning("request to %s failed: %s", self.endpoint, exc)
                continue
            if 200 <= resp.status_code < 300:
                return resp.content
            logger.warning("request to %s returned %d", self.endpoint, resp.status_code)
        self.stats.failures += 1
        return None


_DONE = object()


def poll_source(endpoint: str, policy: RateLimitPolicy, duration: float, **kwargs) -> PollSource:
    return PollSource(endpoint, policy, duration, **kwargs)
