"""Merges ingested articles into a balanced three-class corpus: year
filtering, dedup, topic consolidation, per-(year, topic) class balancing
against the fact-checked marginal, and the deterministic 80/10/10 split.

Balancing never fabricates data: when a cell cannot supply enough credible
or unreliable articles, it is filled to the available supply and the gap is
recorded as a shortfall entry.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator, Optional

import numpy as np

from .errors import DataError
from .features import tokenize
from .types import Article, ClassLabel, DatasetSplit, normalize_title_key

YEAR_LO = 2016
YEAR_HI = 2022

# Preference order when drawing credible articles for a cell; unreliable
# articles come from a single combined pool.
CREDIBLE_SOURCE_PREFERENCE = ("fnc", "nelagt")

FALLBACK_GROUP = "other"


@dataclass
class TopicMap:
    """Editorial consolidation of raw categories into topic groups.

    The shipped map covers 42 raw categories and lands on exactly 12
    groups; unknown raw values map to the fallback group and bump
    ``unknown_count`` so noisy upstream labels stay visible.
    """

    raw_to_group: dict
    groups: tuple
    unknown_count: int = 0

    def consolidate(self, raw_topic: str) -> str:
        key = (raw_topic or "").strip().lower()
        group = self.raw_to_group.get(key)
        if group is None:
            self.unknown_count += 1
            return FALLBACK_GROUP
        return group


def load_topic_map(path=None) -> TopicMap:
    if path is None:
        raw = resources.files("evverkit.data").joinpath("topic_groups.json").read_text("utf-8")
        data = json.loads(raw)
    else:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    return TopicMap(raw_to_group=dict(data["raw_to_group"]), groups=tuple(data["groups"]))


def consolidate_topic(raw_topic: str, topic_map: TopicMap) -> str:
    return topic_map.consolidate(raw_topic)


def dedup(articles: Iterable[Article]) -> Iterator[Article]:
    """Keep the first occurrence per normalized-title key; drop empties."""
    seen: set[str] = set()
    for art in articles:
        key = normalize_title_key(art.title)
        if not key or key in seen:
            continue
        seen.add(key)
        yield art


def filter_years(articles: Iterable[Article], lo: int = YEAR_LO, hi: int = YEAR_HI) -> Iterator[Article]:
    for art in articles:
        if lo <= art.year <= hi:
            yield art


@dataclass(frozen=True)
class BalancePlan:
    """Target counts per (year, topic, label) derived from the fact-checked
    marginal; credible/unreliable targets are clamped to available supply."""

    target_counts: dict
    reference_label: ClassLabel = ClassLabel.FACT_CHECKED


@dataclass
class BalanceReport:
    shortfalls: list = field(default_factory=list)  # {year, topic, label, missing}

    def total_missing(self, year: Optional[int] = None) -> int:
        return sum(
            s["missing"] for s in self.shortfalls
            if year is None or s["year"] == year
        )

    def to_dict(self) -> dict:
        return {"shortfalls": self.shortfalls, "total_missing": self.total_missing()}


def derive_balance_plan(articles: list[Article]) -> BalancePlan:
    """Targets: every (year, topic) cell keeps all fact-checked articles and
    aims for the same number of credible and unreliable ones."""
    fc_counts: Counter = Counter()
    supply: Counter = Counter()
    for art in articles:
        supply[(art.year, art.topic, art.label)] += 1
        if art.label == ClassLabel.FACT_CHECKED:
            fc_counts[(art.year, art.topic)] += 1

    targets: dict = {}
    for (year, topic), n_fc in fc_counts.items():
        targets[(year, topic, ClassLabel.FACT_CHECKED)] = n_fc
        for label in (ClassLabel.CREDIBLE, ClassLabel.UNRELIABLE):
            targets[(year, topic, label)] = min(n_fc, supply[(year, topic, label)])
    return BalancePlan(target_counts=targets)


def _cell_rng(seed: int, year: int, topic: str, label: ClassLabel) -> np.random.Generator:
    # Per-cell generator derived from a stable digest so parallel and serial
    # runs select identical samples.
    digest = hashlib.sha256(f"{seed}|{year}|{topic}|{int(label)}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def _draw(pool: list[Article], count: int, rng: np.random.Generator) -> list[Article]:
    if count >= len(pool):
        return list(pool)
    idx = rng.choice(len(pool), size=count, replace=False)
    return [pool[i] for i in sorted(idx)]


def balance(
    articles: list[Article], plan: BalancePlan, seed: int
) -> tuple[list[Article], BalanceReport]:
    """Draw credible/unreliable samples per (year, topic) cell to match the
    fact-checked count, preferring the configured credible sources first.

    Deterministic under ``seed``; shortfalls are recorded, never filled by
    borrowing across cells.
    """
    by_cell: dict = defaultdict(list)
    for art in articles:
        by_cell[(art.year, art.topic, art.label)].append(art)

    report = BalanceReport()
    corpus: list[Article] = []
    cells = sorted({(y, t) for (y, t, _l) in plan.target_counts})
    for year, topic in cells:
        n_fc = plan.target_counts.get((year, topic, ClassLabel.FACT_CHECKED), 0)
        corpus.extend(by_cell.get((year, topic, ClassLabel.FACT_CHECKED), []))

        for label in (ClassLabel.CREDIBLE, ClassLabel.UNRELIABLE):
            pool = by_cell.get((year, topic, label), [])
            rng = _cell_rng(seed, year, topic, label)
            if label == ClassLabel.CREDIBLE:
                chosen: list[Article] = []
                remaining = n_fc
                tiers = [
                    [a for a in pool if a.source_dataset == src]
                    for src in CREDIBLE_SOURCE_PREFERENCE
                ]
                tiers.append([a for a in pool if a.source_dataset not in CREDIBLE_SOURCE_PREFERENCE])
                for tier in tiers:
                    if remaining <= 0:
                        break
                    picked = _draw(tier, remaining, rng)
                    chosen.extend(picked)
                    remaining -= len(picked)
            else:
                chosen = _draw(pool, n_fc, rng)
                remaining = n_fc - len(chosen)
            corpus.extend(chosen)
            if remaining > 0:
                report.shortfalls.append(
                    {"year": year, "topic": topic, "label": label.label_name, "missing": remaining}
                )
    return corpus, report


TRAIN_FRACTION = 0.8
VALIDATION_FRACTION = 0.1


def split(corpus: list[Article], seed: int = 42) -> dict[str, DatasetSplit]:
    """Stratified 80/10/10 split: per class, train = floor(0.8 n),
    validation = floor(0.1 n), test = remainder. Deterministic under seed."""
    if not corpus:
        raise DataError("cannot split an empty corpus")
    by_label: dict = defaultdict(list)
    for art in corpus:
        by_label[art.label].append(art.id)

    parts: dict[str, list[str]] = {"train": [], "validation": [], "test": []}
    for label in sorted(by_label):
        ids = by_label[label]
        rng = np.random.default_rng([seed, int(label)])
        order = rng.permutation(len(ids))
        shuffled = [ids[i] for i in order]
        n = len(shuffled)
        n_train = int(np.floor(TRAIN_FRACTION * n))
        n_val = int(np.floor(VALIDATION_FRACTION * n))
        parts["train"].extend(shuffled[:n_train])
        parts["validation"].extend(shuffled[n_train:n_train + n_val])
        parts["test"].extend(shuffled[n_train + n_val:])

    return {name: DatasetSplit(split=name, article_ids=tuple(ids)) for name, ids in parts.items()}


def split_id_hash(splits: dict[str, DatasetSplit]) -> str:
    """Stable digest of the three id lists; equal across identical runs."""
    h = hashlib.sha256()
    for name in ("train", "validation", "test"):
        h.update(name.encode())
        for art_id in splits[name].article_ids:
            h.update(art_id.encode())
        h.update(b"\x1e")
    return h.hexdigest()


def corpus_stats(corpus: list[Article]) -> dict:
    """Summary used by the stats CLI: class totals, per-year histogram,
    title-length moments per class, full-text coverage."""
    per_class = Counter(a.label.label_name for a in corpus)
    per_year: dict = defaultdict(Counter)
    for a in corpus:
        per_year[a.year][a.label.label_name] += 1

    title_lengths: dict = defaultdict(list)
    for a in corpus:
        title_lengths[a.label.label_name].append(len(tokenize(a.title)))
    length_stats = {
        name: {
            "mean": float(np.mean(v)) if v else 0.0,
            "stddev": float(np.std(v)) if v else 0.0,
        }
        for name, v in sorted(title_lengths.items())
    }

    with_body = sum(1 for a in corpus if a.body)
    return {
        "total": len(corpus),
        "per_class": {k: per_class.get(k, 0) for k in ("fact_checked", "credible", "unreliable")},
        "per_year": {str(y): dict(per_year[y]) for y in sorted(per_year)},
        "title_token_length": length_stats,
        "full_text_coverage": round(100.0 * with_body / len(corpus), 1) if corpus else 0.0,
    }


def title_length_balance_gap(corpus: list[Article], max_length: int = 40) -> float:
    """Post-hoc balance check: the largest CDF gap between any two classes
    over title token-length histograms (KS-style; smaller is more balanced)."""
    cdfs = []
    for label in (ClassLabel.FACT_CHECKED, ClassLabel.CREDIBLE, ClassLabel.UNRELIABLE):
        lengths = [min(len(tokenize(a.title)), max_length) for a in corpus if a.label == label]
        if not lengths:
            continue
        hist = np.bincount(lengths, minlength=max_length + 1).astype(np.float64)
        cdfs.append(np.cumsum(hist) / hist.sum())
    if len(cdfs) < 2:
        return 0.0
    gap = 0.0
    for i in range(len(cdfs)):
        for j in range(i + 1, len(cdfs)):
            gap = max(gap, float(np.max(np.abs(cdfs[i] - cdfs[j]))))
    return gap


def build_corpus(
    articles: Iterable[Article],
    topic_map: Optional[TopicMap] = None,
    seed: int = 42,
) -> tuple[list[Article], BalanceReport, dict[str, DatasetSplit]]:
    """Full pipeline: year filter, dedup, topic consolidation, balance, split."""
    tmap = topic_map if topic_map is not None else load_topic_map()
    staged = [
        _with_topic(a, tmap.consolidate(a.topic))
        for a in dedup(filter_years(articles))
    ]
    plan = derive_balance_plan(staged)
    corpus, report = balance(staged, plan, seed=seed)
    splits = split(corpus, seed=seed)
    return corpus, report, splits


def _with_topic(art: Article, topic: str) -> Article:
    if art.topic == topic:
        return art
    return Article(
        id=art.id, title=art.title, date=art.date, url=art.url, domain=art.domain,
        topic=topic, label=art.label, source_dataset=art.source_dataset, body=art.body,
    )
