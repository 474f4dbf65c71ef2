"""Shared domain types: class labels, articles, evidence items, splits.

All types are immutable value objects and serialize to/from plain dicts so
the canonical corpus format (JSON-Lines, one record per line, UTF-8) stays
trivial to produce from any language.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import date as Date
from enum import IntEnum
from typing import Iterable, Iterator, Optional

from .errors import DataError

SOURCE_DATASETS = ("multifc", "pubhealth", "politifact", "fnc", "nelagt", "grafn")


class ClassLabel(IntEnum):
    """Three-way article/evidence label. Code 1 is the unique "pass" label
    used by the evidence filter."""

    FACT_CHECKED = 0
    CREDIBLE = 1
    UNRELIABLE = 2

    @property
    def label_name(self) -> str:
        return _CODE_TO_NAME[int(self)]


_CODE_TO_NAME = {0: "fact_checked", 1: "credible", 2: "unreliable"}
_NAME_TO_CODE = {v: k for k, v in _CODE_TO_NAME.items()}


def label_from_code(code: int) -> ClassLabel:
    """Map an integer code to its label; anything outside {0,1,2} is a DataError."""
    if not isinstance(code, int) or isinstance(code, bool) or code not in _CODE_TO_NAME:
        raise DataError(f"unknown class code {code!r}; expected 0, 1 or 2")
    return ClassLabel(code)


def label_from_name(name: str) -> ClassLabel:
    key = str(name).strip().lower()
    if key not in _NAME_TO_CODE:
        raise DataError(f"unknown class name {name!r}")
    return ClassLabel(_NAME_TO_CODE[key])


_WS_RE = re.compile(r"\s+")
_PUNCT_RE = re.compile(r"[^\w\s]", re.UNICODE)


def normalize_title_key(title: str) -> str:
    """Dedup key: lowercase, punctuation stripped, whitespace collapsed."""
    key = _PUNCT_RE.sub(" ", title.lower())
    return _WS_RE.sub(" ", key).strip()


def article_id(title: str, source_dataset: str) -> str:
    """Stable content hash of (normalized title, source); survives re-runs."""
    key = f"{normalize_title_key(title)}\x1f{source_dataset}"
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Article:
    """One news item after ingestion.

    ``topic`` holds the raw category until the dataset pipeline consolidates
    it into one of the 12 groups; articles in a finished corpus always carry
    a consolidated topic.
    """

    id: str
    title: str
    date: Date
    url: str
    domain: str
    topic: str
    label: ClassLabel
    source_dataset: str
    body: Optional[str] = None

    def __post_init__(self):
        if self.source_dataset not in SOURCE_DATASETS:
            raise DataError(f"unknown source_dataset {self.source_dataset!r}")
        if not self.title.strip():
            raise DataError("article title is empty after cleaning")

    @property
    def year(self) -> int:
        return self.date.year

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "title": self.title,
            "date": self.date.isoformat(),
            "url": self.url,
            "domain": self.domain,
            "topic": self.topic,
            "label": int(self.label),
            "source_dataset": self.source_dataset,
        }
        if self.body is not None:
            out["body"] = self.body
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Article":
        try:
            return cls(
                id=d["id"],
                title=d["title"],
                date=Date.fromisoformat(d["date"]),
                url=d["url"],
                domain=d["domain"],
                topic=d["topic"],
                label=label_from_code(int(d["label"])),
                source_dataset=d["source_dataset"],
                body=d.get("body"),
            )
        except KeyError as exc:
            raise DataError(f"article record missing field {exc}") from exc


@dataclass(frozen=True)
class EvidenceItem:
    """A text snippet retrieved as evidence, optionally with its source domain."""

    id: str
    text: str
    domain: Optional[str] = None
    kind: str = "short"  # short | long

    def __post_init__(self):
        if self.kind not in ("short", "long"):
            raise DataError(f"evidence kind must be short or long, got {self.kind!r}")

    def to_dict(self) -> dict:
        out = {"id": self.id, "text": self.text, "kind": self.kind}
        if self.domain is not None:
            out["domain"] = self.domain
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "EvidenceItem":
        try:
            return cls(id=d["id"], text=d["text"], domain=d.get("domain"), kind=d.get("kind", "short"))
        except KeyError as exc:
            raise DataError(f"evidence record missing field {exc}") from exc


@dataclass(frozen=True)
class DatasetSplit:
    """One of the train/validation/test partitions, as an ordered id list."""

    split: str  # train | validation | test
    article_ids: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.split not in ("train", "validation", "test"):
            raise DataError(f"unknown split name {self.split!r}")

    def to_dict(self) -> dict:
        return {"split": self.split, "article_ids": list(self.article_ids)}

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetSplit":
        return cls(split=d["split"], article_ids=tuple(d["article_ids"]))


def write_jsonl(path, records: Iterable[dict]) -> int:
    """Write dicts as JSON-Lines; returns the record count."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
            n += 1
    return n


def read_jsonl(path) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{line_no}: invalid JSON: {exc}") from exc


def write_articles(path, articles: Iterable[Article]) -> int:
    return write_jsonl(path, (a.to_dict() for a in articles))


def read_articles(path) -> list[Article]:
    return [Article.from_dict(d) for d in read_jsonl(path)]
