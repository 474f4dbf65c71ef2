"""Domain credibility scores: MBFC rating lookup, integer encoding, and
normalization to the (0,1) scalar fed to the classifier.

Encoding of the factual-reporting category (credibility rating only breaks
the "mixed" tie):

    satire -3 | very low -2 | low -1 | mixed -1/1/2 | mostly factual 2
    high 3 | very high 4 | absent 0

    mixed + low credibility    -> -1
    mixed + medium credibility ->  1
    mixed + high credibility   ->  2
    mixed + no credibility     ->  0   (treated as no information)

The normalized score is min-max over the fixed range [-3, 4], i.e.
(encoded + 3) / 7, so it never depends on corpus composition.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

from .errors import DataError, FetchError
from .web import RateLimiter, polite_get

ENCODED_MIN = -3
ENCODED_MAX = 4

FACTUALITY_LEVELS = ("satire", "very low", "low", "mixed", "mostly factual", "high", "very high")
CREDIBILITY_LEVELS = ("low credibility", "medium credibility", "high credibility")

_PLAIN_ENCODING = {
    "satire": -3,
    "very low": -2,
    "low": -1,
    "mostly factual": 2,
    "high": 3,
    "very high": 4,
}
_MIXED_BY_CREDIBILITY = {
    "low credibility": -1,
    "medium credibility": 1,
    "high credibility": 2,
    None: 0,
}

DEFAULT_TTL_SECONDS = 90 * 24 * 3600


def _norm_category(value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    v = value.strip().lower()
    return v if v else None


def encode_dcs(factual_reporting: Optional[str], credibility_rating: Optional[str]) -> int:
    """Encode the rating pair to the integer scale in [-3, 4]."""
    fr = _norm_category(factual_reporting)
    cr = _norm_category(credibility_rating)
    if cr is not None and cr not in CREDIBILITY_LEVELS:
        raise DataError(f"unrecognized credibility rating {credibility_rating!r}")
    if fr is None:
        return 0
    if fr == "mixed":
        return _MIXED_BY_CREDIBILITY[cr]
    if fr not in _PLAIN_ENCODING:
        raise DataError(f"unrecognized factual reporting category {factual_reporting!r}")
    return _PLAIN_ENCODING[fr]


def normalize_dcs(encoded: int) -> float:
    """Min-max map of the encoded score onto [0, 1]."""
    if not ENCODED_MIN <= encoded <= ENCODED_MAX:
        raise DataError(f"encoded score {encoded} outside [{ENCODED_MIN}, {ENCODED_MAX}]")
    return (encoded - ENCODED_MIN) / (ENCODED_MAX - ENCODED_MIN)


ABSENT_NORMALIZED = normalize_dcs(0)  # score used when a domain has no rating


@dataclass(frozen=True)
class DcsRecord:
    domain: str
    bias_rating: Optional[str]
    factual_reporting: Optional[str]
    credibility_rating: Optional[str]
    encoded: int
    normalized: float
    parse_failed: bool = False
    fetched_at: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "domain": self.domain,
            "bias_rating": self.bias_rating,
            "factual_reporting": self.factual_reporting,
            "credibility_rating": self.credibility_rating,
            "encoded": self.encoded,
            "normalized": self.normalized,
        }
        if self.parse_failed:
            out["parse_failed"] = True
        if self.fetched_at is not None:
            out["fetched_at"] = self.fetched_at
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "DcsRecord":
        return cls(
            domain=d["domain"],
            bias_rating=d.get("bias_rating"),
            factual_reporting=d.get("factual_reporting"),
            credibility_rating=d.get("credibility_rating"),
            encoded=int(d["encoded"]),
            normalized=float(d["normalized"]),
            parse_failed=bool(d.get("parse_failed", False)),
            fetched_at=d.get("fetched_at"),
        )


def make_record(
    domain: str,
    bias_rating: Optional[str] = None,
    factual_reporting: Optional[str] = None,
    credibility_rating: Optional[str] = None,
    parse_failed: bool = False,
    fetched_at: Optional[float] = None,
) -> DcsRecord:
    encoded = encode_dcs(factual_reporting, credibility_rating)
    return DcsRecord(
        domain=domain.strip().lower(),
        bias_rating=_norm_category(bias_rating),
        factual_reporting=_norm_category(factual_reporting),
        credibility_rating=_norm_category(credibility_rating),
        encoded=encoded,
        normalized=normalize_dcs(encoded),
        parse_failed=parse_failed,
        fetched_at=fetched_at,
    )


_BIAS_RE = re.compile(r"bias rating:\s*([a-z -]+?)(?:\s{2,}|$|\n)", re.IGNORECASE)
_FACTUAL_RE = re.compile(r"factual reporting:\s*([a-z ]+?)(?:\s{2,}|$|\n)", re.IGNORECASE)
_CRED_RE = re.compile(r"credibility rating:\s*([a-z ]+?)(?:\s{2,}|$|\n)", re.IGNORECASE)
_TAG_RE = re.compile(r"<[^>]+>")


def parse_mbfc_page(html: str) -> tuple[Optional[str], Optional[str], Optional[str]]:
    """Pull (bias, factual reporting, credibility) strings out of a rating page.

    Returns lowercased category strings, or None for any rating the page does
    not state. Raises DataError when the page carries none of the three.
    """
    text = _TAG_RE.sub("\n", html)
    bias = _BIAS_RE.search(text)
    factual = _FACTUAL_RE.search(text)
    cred = _CRED_RE.search(text)
    if not (bias or factual or cred):
        raise DataError("no rating fields found on page")

    def clean(m, suffix=""):
        if not m:
            return None
        value = m.group(1).strip().lower()
        value = re.sub(r"\s+", " ", value).replace("-", " ")
        if suffix and not value.endswith(suffix):
            value = f"{value} {suffix}".strip()
        return value or None

    return clean(bias), clean(factual), clean(cred, suffix="credibility")


class DcsCache:
    """Single-file key-value store of DcsRecords with snapshot export/import."""

    def __init__(self, path, ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self.path = Path(path)
        self.ttl_seconds = ttl_seconds
        self._records: dict[str, DcsRecord] = {}
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        for line in self.path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line:
                rec = DcsRecord.from_dict(json.loads(line))
                self._records[rec.domain] = rec

    def save(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8") as fh:
            for rec in self._records.values():
                fh.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")

    def get(self, domain: str, now: Optional[float] = None) -> Optional[DcsRecord]:
        rec = self._records.get(domain.strip().lower())
        if rec is None:
            return None
        if rec.fetched_at is not None and now is not None:
            if now - rec.fetched_at > self.ttl_seconds:
                return None
        return rec

    def put(self, rec: DcsRecord) -> None:
        self._records[rec.domain] = rec

    def __len__(self) -> int:
        return len(self._records)

    def export_snapshot(self, path) -> int:
        """Write all records as JSON-Lines; the snapshot doubles as the
        ``fetch-dcs`` output format."""
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self._records.values():
                fh.write(json.dumps(rec.to_dict(), ensure_ascii=False) + "\n")
        return len(self._records)

    def import_snapshot(self, path) -> int:
        n = 0
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line:
                self.put(DcsRecord.from_dict(json.loads(line)))
                n += 1
        return n


class MbfcClient:
    """Rate-limited lookup of per-domain ratings, cache-first.

    ``fetch`` is injectable so tests and offline runs never touch the
    network; the default fetcher tries the rating page slugs derived from
    the domain name.
    """

    BASE_URL = "https://mediabiasfactcheck.com"

    def __init__(
        self,
        cache: DcsCache,
        fetch: Optional[Callable[[str], str]] = None,
        clock: Callable[[], float] = time.monotonic,
        wall_clock: Callable[[], float] = time.time,
        requests_per_second: float = 1.0,
    ):
        self.cache = cache
        self._fetch = fetch if fetch is not None else self._default_fetch
        self._limiter = RateLimiter(requests_per_second, clock=clock)
        self._wall_clock = wall_clock

    def _default_fetch(self, domain: str) -> str:
        slugs = [domain.split(".")[0], domain.replace(".", "-")]
        last_error: Optional[Exception] = None
        for slug in slugs:
            try:
                return polite_get(f"{self.BASE_URL}/{slug}/", limiter=self._limiter)
            except FetchError as exc:
                last_error = exc
        raise last_error  # type: ignore[misc]

    def lookup_domain(self, domain: str) -> DcsRecord:
        """Return the cached record or fetch, parse, encode and store one.

        Unfindable domains yield a record with all ratings absent (encoded
        0); parse failures are stored with ``parse_failed`` set so they are
        not refetched on every run.
        """
        domain = domain.strip().lower()
        now = self._wall_clock()
        cached = self.cache.get(domain, now=now)
        if cached is not None:
            return cached

        self._limiter.wait("mbfc")
        try:
            html = self._fetch(domain)
        except FetchError as exc:
            if exc.retryable:
                raise
            rec = make_record(domain, fetched_at=now)
            self.cache.put(rec)
            return rec

        try:
            bias, factual, cred = parse_mbfc_page(html)
            rec = make_record(domain, bias, factual, cred, fetched_at=now)
        except DataError:
            rec = make_record(domain, parse_failed=True, fetched_at=now)
        self.cache.put(rec)
        return rec


def load_dcs_table(path) -> dict[str, DcsRecord]:
    """Read a DcsRecord JSON-Lines snapshot into a domain-keyed table."""
    table: dict[str, DcsRecord] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            rec = DcsRecord.from_dict(json.loads(line))
            table[rec.domain] = rec
    return table


def score_for_domain(table: Optional[dict], domain: Optional[str]) -> float:
    """Normalized score for a domain; absent table entries (or no domain at
    all) fall back to the no-information score."""
    if table is None or domain is None:
        return ABSENT_NORMALIZED
    rec = table.get(domain.strip().lower())
    return rec.normalized if rec is not None else ABSENT_NORMALIZED
