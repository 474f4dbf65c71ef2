"""Source adapters normalizing the six upstream datasets into Articles,
plus URL-slug title derivation and cache-first HTML body extraction.

Rows that fail mandatory fields are skipped with a reason code, never
fatal: upstream files are noisy and a single bad row must not abort a run.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from datetime import date as Date
from datetime import datetime
from pathlib import Path
from typing import Iterator, Optional
from urllib.parse import unquote, urlsplit

from . import html_text
from .errors import DataError, FetchError
from .types import Article, ClassLabel, article_id, read_jsonl
from .web import HtmlCache, RateLimiter, fetch_cached

# Minimal multi-label public suffixes; enough for news domains without a PSL dependency.
_SECOND_LEVEL_SUFFIXES = {
    "co.uk", "org.uk", "gov.uk", "ac.uk", "com.au", "net.au", "org.au",
    "co.jp", "com.br", "co.in", "co.nz", "com.mx", "co.za",
}


def registrable_domain(url_or_host: str) -> str:
    """Lowercased registrable domain: no scheme, path, port or www prefix."""
    value = url_or_host.strip().lower()
    if "//" in value:
        value = urlsplit(value).netloc
    value = value.split("/")[0].split(":")[0]
    if value.startswith("www."):
        value = value[4:]
    labels = value.split(".")
    if len(labels) > 2 and ".".join(labels[-2:]) in _SECOND_LEVEL_SUFFIXES:
        return ".".join(labels[-3:])
    if len(labels) > 2:
        return ".".join(labels[-2:])
    return value


_BRAND_TOKEN = "politifact"
_SLUG_EXT_RE = re.compile(r"\.(html?|php|aspx?|shtml|cms)$", re.IGNORECASE)
_TRACKING_SEGMENTS = {"index.html", "index.htm", "index.php", "amp", "rss", "feed"}


def scrub_brand(title: str, domain: str = "") -> str:
    """Remove the fact-checker brand and the article's own domain name from a
    title so source identity cannot leak into the text."""
    patterns = [_BRAND_TOKEN]
    domain = registrable_domain(domain) if domain else ""
    if domain:
        patterns.append(re.escape(domain))
        patterns.append(re.escape(domain.split(".")[0]))
    cleaned = title
    for pat in patterns:
        cleaned = re.sub(pat, " ", cleaned, flags=re.IGNORECASE)
    cleaned = re.sub(r"\s+", " ", cleaned)
    return cleaned.strip(" -|:·—–").strip()


def title_from_url(url: str) -> str:
    """Derive a human-readable title from the last usable URL path segment.

    Numeric-only segments and index/tracking segments are dropped; hyphens
    and underscores become spaces; brand tokens are removed.
    """
    parts = urlsplit(url)
    segments = [unquote(s) for s in parts.path.split("/") if s]
    segments = [
        s for s in segments
        if not s.isdigit() and s.lower() not in _TRACKING_SEGMENTS
    ]
    if not segments:
        raise DataError(f"no usable path segment in {url!r}")
    slug = _SLUG_EXT_RE.sub("", segments[-1])
    text = re.sub(r"[-_]+", " ", slug)
    text = scrub_brand(text, parts.netloc)
    if not text:
        raise DataError(f"title derived from {url!r} is empty after cleaning")
    return text.strip()


_DATE_FORMATS = (
    "%Y-%m-%d", "%Y/%m/%d", "%m/%d/%Y", "%B %d, %Y", "%b %d, %Y",
    "%d %B %Y", "%d %b %Y", "%Y%m%d",
)
_MONTH_FORMATS = ("%Y-%m", "%B %Y", "%b %Y")
_URL_DATE_RE = re.compile(r"/(20\d\d)/([a-z]{3})/(\d{1,2})/", re.IGNORECASE)
_MONTHS = {m: i + 1 for i, m in enumerate(
    ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"]
)}


def parse_date(value) -> Optional[Date]:
    """Best-effort date parsing; month-precision dates land on the 1st."""
    if value is None:
        return None
    if isinstance(value, Date):
        return value
    s = str(value).strip()
    if not s:
        return None
    if "T" in s:
        s = s.split("T", 1)[0]
    for fmt in _DATE_FORMATS:
        try:
            return datetime.strptime(s, fmt).date()
        except ValueError:
            pass
    for fmt in _MONTH_FORMATS:
        try:
            d = datetime.strptime(s, fmt).date()
            return d.replace(day=1)
        except ValueError:
            pass
    if re.fullmatch(r"\d{4}", s):
        return Date(int(s), 1, 1)
    return None


def date_from_url(url: str) -> Optional[Date]:
    m = _URL_DATE_RE.search(url)
    if not m:
        return None
    month = _MONTHS.get(m.group(2).lower())
    if month is None:
        return None
    try:
        return Date(int(m.group(1)), month, int(m.group(3)))
    except ValueError:
        return None


@dataclass(frozen=True)
class SourceAdapterConfig:
    """How one upstream file maps onto Articles.

    ``field_mapping`` maps source columns to Article fields (title, date,
    url, body, topic, domain) and must cover at least title-or-url, date
    and url. Labels come either from ``fixed_label`` or from
    ``label_column`` looked up through ``label_map``.
    """

    source_dataset: str
    input_path: str
    field_mapping: dict
    fixed_label: Optional[ClassLabel] = None
    label_column: Optional[str] = None
    label_map: dict = field(default_factory=dict)
    row_filters: dict = field(default_factory=dict)  # column -> allowed value set

    def __post_init__(self):
        mapped = set(self.field_mapping.values())
        if "url" not in mapped or "date" not in mapped:
            if not ("date" in mapped and ("title" in mapped or "url" in mapped)):
                raise DataError("field_mapping must cover title-or-url, date and url")
        if self.fixed_label is None and self.label_column is None:
            raise DataError("either fixed_label or label_column is required")


# Default column mappings for the six supported upstream layouts. These are
# configuration, not contracts: upstream exports drift, so every mapping can
# be overridden from the CLI.
DEFAULT_ADAPTERS: dict[str, dict] = {
    "multifc": {
        "field_mapping": {"articleTitle": "title", "publishDate": "date", "claimURL": "url", "category": "topic"},
        "fixed_label": ClassLabel.FACT_CHECKED,
    },
    "pubhealth": {
        "field_mapping": {"claim": "title", "date_published": "date", "url": "url", "main_text": "body", "subjects": "topic"},
        "fixed_label": ClassLabel.FACT_CHECKED,
    },
    "politifact": {
        "field_mapping": {"factcheck_date": "date", "factcheck_analysis_link": "url"},
        "fixed_label": ClassLabel.FACT_CHECKED,
    },
    "fnc": {
        "field_mapping": {"title": "title", "scraped_at": "date", "url": "url", "content": "body", "domain": "domain"},
        "fixed_label": ClassLabel.CREDIBLE,
        "row_filters": {"type": {"reliable"}},
    },
    "nelagt": {
        "field_mapping": {"title": "title", "date": "date", "url": "url", "content": "body", "source": "domain"},
        "label_column": "credibility",
        "label_map": {"reliable": ClassLabel.CREDIBLE, "0": ClassLabel.CREDIBLE,
                      "unreliable": ClassLabel.UNRELIABLE, "2": ClassLabel.UNRELIABLE},
    },
    "grafn": {
        "field_mapping": {"title": "title", "published": "date", "site_url": "url", "text": "body"},
        "fixed_label": ClassLabel.UNRELIABLE,
        "row_filters": {"language": {"english"}, "type": {"bs", "conspiracy", "satire", "junksci", "fake"}},
    },
}


def default_adapter_config(source: str, input_path: str, **overrides) -> SourceAdapterConfig:
    if source not in DEFAULT_ADAPTERS:
        raise DataError(f"no default adapter for source {source!r}")
    base = dict(DEFAULT_ADAPTERS[source])
    base.update(overrides)
    return SourceAdapterConfig(source_dataset=source, input_path=input_path, **base)


def _read_rows(path: str) -> Iterator[dict]:
    p = Path(path)
    if not p.exists():
        raise DataError(f"input file not found: {path}")
    suffix = p.suffix.lower()
    if suffix in (".jsonl", ".ndjson", ".json"):
        yield from read_jsonl(p)
        return
    delimiter = "\t" if suffix in (".tsv", ".tab") else ","
    with open(p, newline="", encoding="utf-8", errors="replace") as fh:
        yield from csv.DictReader(fh, delimiter=delimiter)


def ingest_source(config: SourceAdapterConfig, skip_sink: Optional[list] = None) -> Iterator[Article]:
    """Normalize one upstream file into a stream of Articles.

    Malformed rows are appended to ``skip_sink`` as {row, reason} records
    and skipped. Only an unreadable input file is fatal.
    """

    def skip(row_no: int, reason: str):
        if skip_sink is not None:
            skip_sink.append({"row": row_no, "reason": reason})

    for row_no, row in enumerate(_read_rows(config.input_path), 1):
        mapped: dict[str, str] = {}
        for col, target in config.field_mapping.items():
            value = row.get(col)
            if value is not None and str(value).strip():
                mapped[target] = str(value).strip()

        passed_filters = True
        for col, allowed in config.row_filters.items():
            if str(row.get(col, "")).strip().lower() not in allowed:
                skip(row_no, f"row_filter:{col}")
                passed_filters = False
                break
        if not passed_filters:
            continue

        url = mapped.get("url", "")
        if not url:
            skip(row_no, "missing_url")
            continue
        domain = mapped.get("domain") or registrable_domain(url)
        domain = registrable_domain(domain)

        title = mapped.get("title", "")
        if not title:
            try:
                title = title_from_url(url)
            except DataError:
                skip(row_no, "missing_title")
                continue
        title = scrub_brand(title, domain)
        if not title:
            skip(row_no, "empty_title_after_cleaning")
            continue

        parsed_date = parse_date(mapped.get("date")) or date_from_url(url)
        if parsed_date is None:
            skip(row_no, "missing_date" if "date" not in mapped else "bad_date")
            continue

        if config.fixed_label is not None:
            label = config.fixed_label
        else:
            raw_label = str(row.get(config.label_column, "")).strip().lower()
            label = config.label_map.get(raw_label)
            if label is None:
                skip(row_no, f"unmapped_label:{raw_label or '<empty>'}")
                continue

        yield Article(
            id=article_id(title, config.source_dataset),
            title=title,
            date=parsed_date,
            url=url,
            domain=domain,
            topic=mapped.get("topic", "").lower(),
            label=label,
            source_dataset=config.source_dataset,
            body=mapped.get("body"),
        )


@dataclass(frozen=True)
class ExtractionRule:
    """Per-domain selectors for pulling title/body out of article pages."""

    domain: str
    title_selector: Optional[str] = None
    body_selector: Optional[str] = None

    def __post_init__(self):
        if not self.title_selector and not self.body_selector:
            raise DataError(f"extraction rule for {self.domain!r} has no selectors")


@dataclass(frozen=True)
class FetchResult:
    title: Optional[str]
    body: Optional[str]
    warnings: tuple = ()


MIN_BODY_CHARS = 200


def _render_block(node: html_text.Node) -> Optional[str]:
    paragraphs = [
        c.text() for c in node.children
        if isinstance(c, html_text.Node) and c.tag == "p"
    ]
    paragraphs = [p for p in paragraphs if p]
    if paragraphs:
        return "\n\n".join(paragraphs)
    return node.text() or None


def extract_article(html: str, url: str, rules: tuple = ()) -> FetchResult:
    """Apply the matching domain rule, falling back to the readability
    heuristic (largest text block after noise removal). Output is plain
    text; no markup survives."""
    domain = registrable_domain(url)
    rule = next((r for r in rules if registrable_domain(r.domain) == domain), None)

    full = html_text.parse_html(html)
    title: Optional[str] = None
    body: Optional[str] = None

    if rule is not None:
        if rule.title_selector:
            node = html_text.select_first(full, rule.title_selector)
            title = node.text() if node else None
        if rule.body_selector:
            node = html_text.select_first(full, rule.body_selector)
            body = _render_block(node) if node else None

    if title is None:
        title = html_text.page_title(full)
    if body is None:
        stripped = html_text.strip_noise(html_text.parse_html(html))
        body = html_text.largest_text_block(stripped)

    warnings: list[str] = []
    if body is not None and len(body) < MIN_BODY_CHARS:
        warnings.append("thin_content")
        body = None
    if title is not None:
        title = scrub_brand(title, domain) or None
    return FetchResult(title=title, body=body, warnings=tuple(warnings))


def fetch_article(
    url: str,
    rules: tuple = (),
    cache: Optional[HtmlCache] = None,
    limiter: Optional[RateLimiter] = None,
    session=None,
) -> FetchResult:
    """Cache-first fetch of a page followed by text extraction.

    HTTP failures surface as retryable FetchErrors; callers decide whether
    to retry, queue, or record the miss.
    """
    if cache is not None:
        html = fetch_cached(url, cache, limiter=limiter, session=session)
    else:
        from .web import polite_get

        html = polite_get(url, limiter=limiter, session=session)
    return extract_article(html, url, rules)


def fetch_missing_bodies(
    articles: list[Article],
    rules: tuple = (),
    cache: Optional[HtmlCache] = None,
    limiter: Optional[RateLimiter] = None,
    session=None,
    workers: int = 4,
) -> tuple[list[Article], list[dict]]:
    """Fill absent bodies via a bounded worker pool; the shared rate limiter
    keeps the per-host request rate polite regardless of pool width."""
    from concurrent.futures import ThreadPoolExecutor

    limiter = limiter if limiter is not None else RateLimiter(1.0)
    todo = [(i, a) for i, a in enumerate(articles) if a.body is None]
    errors: list[dict] = []
    results = list(articles)

    def work(item):
        idx, art = item
        try:
            fetched = fetch_article(art.url, rules, cache=cache, limiter=limiter, session=session)
            return idx, fetched, None
        except FetchError as exc:
            return idx, None, str(exc)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for idx, fetched, error in pool.map(work, todo):
            if error is not None:
                errors.append({"url": results[idx].url, "reason": error})
            elif fetched is not None and fetched.body:
                art = results[idx]
                results[idx] = Article(
                    id=art.id, title=art.title, date=art.date, url=art.url,
                    domain=art.domain, topic=art.topic, label=art.label,
                    source_dataset=art.source_dataset, body=fetched.body,
                )
    return results, errors


def load_extraction_rules(path) -> tuple:
    """Rules file: JSON list of {domain, title_selector?, body_selector?}."""
    import json

    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return tuple(
        ExtractionRule(
            domain=r["domain"],
            title_selector=r.get("title_selector"),
            body_selector=r.get("body_selector"),
        )
        for r in raw
    )
