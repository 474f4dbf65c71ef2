"""Polite HTTP plumbing shared by the ingest and DCS modules: a per-host
rate limiter, a content-addressed HTML cache, and a GET with exponential
backoff. Clock and sleep are injectable so tests never actually wait.
"""

from __future__ import annotations

import hashlib
import threading
import time
from pathlib import Path
from typing import Callable, Optional
from urllib.parse import urlsplit

from .errors import FetchError

DEFAULT_TIMEOUT = 20.0
DEFAULT_RETRIES = 3
BACKOFF_BASE = 1.0  # seconds; doubles per retry on 429/5xx


class RateLimiter:
    """Enforces a minimum interval between requests per key (usually host).

    Process-global when shared; all waits go through one lock so concurrent
    workers cannot exceed the rate together.
    """

    def __init__(
        self,
        requests_per_second: float = 1.0,
        clock: Callable[[], float] = time.monotonic,
        sleep: Optional[Callable[[float], None]] = None,
    ):
        if requests_per_second <= 0:
            raise ValueError("requests_per_second must be positive")
        self.interval = 1.0 / requests_per_second
        self._clock = clock
        self._sleep = sleep if sleep is not None else time.sleep
        self._lock = threading.Lock()
        self._next_allowed: dict[str, float] = {}

    def wait(self, key: str) -> None:
        """Block until a request to ``key`` is allowed, then reserve the slot."""
        while True:
            with self._lock:
                now = self._clock()
                allowed_at = self._next_allowed.get(key, now)
                if allowed_at <= now:
                    self._next_allowed[key] = now + self.interval
                    return
                delay = allowed_at - now
            self._sleep(delay)


def url_host(url: str) -> str:
    return urlsplit(url).netloc.lower()


class HtmlCache:
    """Raw-HTML store keyed by sha256 of the URL: ``<dir>/<sha256(url)>.html``."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path_for(self, url: str) -> Path:
        digest = hashlib.sha256(url.encode("utf-8")).hexdigest()
        return self.directory / f"{digest}.html"

    def get(self, url: str) -> Optional[str]:
        p = self.path_for(url)
        if p.exists():
            return p.read_text(encoding="utf-8", errors="replace")
        return None

    def put(self, url: str, html: str) -> None:
        self.path_for(url).write_text(html, encoding="utf-8")


def polite_get(
    url: str,
    limiter: Optional[RateLimiter] = None,
    session=None,
    max_retries: int = DEFAULT_RETRIES,
    timeout: float = DEFAULT_TIMEOUT,
    sleep: Optional[Callable[[float], None]] = None,
) -> str:
    """GET a URL honoring the per-host rate limit, with exponential backoff
    on 429/5xx. Raises FetchError on exhaustion or any HTTP failure."""
    import requests

    do_sleep = sleep if sleep is not None else time.sleep
    sess = session if session is not None else requests
    host = url_host(url)
    last_status: Optional[int] = None
    for attempt in range(max_retries + 1):
        if limiter is not None:
            limiter.wait(host)
        try:
            resp = sess.get(url, timeout=timeout, headers={"User-Agent": "evverkit/0.1"})
        except Exception as exc:  # DNS, connection, timeout
            raise FetchError(f"GET {url} failed: {exc}", retryable=True) from exc
        if resp.status_code == 200:
            return resp.text
        last_status = resp.status_code
        if resp.status_code == 429 or resp.status_code >= 500:
            if attempt < max_retries:
                do_sleep(BACKOFF_BASE * (2**attempt))
                continue
        break
    raise FetchError(f"GET {url} returned HTTP {last_status}", retryable=True)


def fetch_cached(
    url: str,
    cache: HtmlCache,
    limiter: Optional[RateLimiter] = None,
    session=None,
    sleep: Optional[Callable[[float], None]] = None,
) -> str:
    """Cache-first fetch: hits never touch the network, misses are stored so
    re-runs are offline-reproducible."""
    cached = cache.get(url)
    if cached is not None:
        return cached
    html = polite_get(url, limiter=limiter, session=session, sleep=sleep)
    cache.put(url, html)
    return html
