"""Applies a trained classifier to evidence sets, keeps only items labeled
credible, and produces class-distribution audit reports.

Argmax ties resolve to the lowest class code: for a leakage detector the
conservative move is to exclude ambiguous evidence rather than pass it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dcs import score_for_domain
from .errors import DataError
from .features import EmbeddingSet, tokenize
from .network import EvverModel, forward
from .types import ClassLabel, EvidenceItem


@dataclass(frozen=True)
class Prediction:
    item_id: str
    probabilities: tuple
    label: ClassLabel
    dcs_used: bool

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "probabilities": list(self.probabilities),
            "label": int(self.label),
            "dcs_used": self.dcs_used,
        }


def _argmax_label(probs: np.ndarray) -> ClassLabel:
    # np.argmax returns the first maximum, i.e. the lowest class code on ties
    return ClassLabel(int(np.argmax(probs)))


def classify_evidence(
    items: list[EvidenceItem],
    model: EvverModel,
    embeddings: EmbeddingSet,
    dcs_table: Optional[dict] = None,
) -> tuple[list[Prediction], list[dict]]:
    """One prediction per item, input order preserved.

    Items lacking an embedding become error entries rather than aborting
    the run. When the model uses credibility scores, items without a known
    domain get the no-information score.
    """
    predictions: list[Prediction] = []
    errors: list[dict] = []
    use_dcs = model.config.use_dcs
    for item in items:
        if item.id not in embeddings:
            errors.append({"item_id": item.id, "reason": "missing_embedding"})
            continue
        vector = embeddings.row(item.id)
        dcs_value = score_for_domain(dcs_table, item.domain) if use_dcs else None
        probs = forward(model, vector, dcs=dcs_value)
        predictions.append(Prediction(
            item_id=item.id,
            probabilities=tuple(float(p) for p in probs),
            label=_argmax_label(probs),
            dcs_used=use_dcs,
        ))
    return predictions, errors


def filter_credible(items: list[EvidenceItem], predictions: list[Prediction]) -> list[EvidenceItem]:
    """Keep exactly the items labeled credible, in their original order."""
    if len(items) != len(predictions):
        raise DataError(f"{len(items)} items but {len(predictions)} predictions")
    for item, pred in zip(items, predictions):
        if item.id != pred.item_id:
            raise DataError(f"prediction for {pred.item_id!r} misaligned with item {item.id!r}")
    return [item for item, pred in zip(items, predictions) if pred.label == ClassLabel.CREDIBLE]


@dataclass(frozen=True)
class AuditReport:
    corpus_name: str
    sample_count: int
    percent_fact_checked: float
    percent_credible: float
    percent_unreliable: float

    def __post_init__(self):
        total = self.percent_fact_checked + self.percent_credible + self.percent_unreliable
        if self.sample_count > 0 and abs(total - 100.0) > 0.1:
            raise DataError(f"audit percentages sum to {total}, not 100")

    def to_dict(self) -> dict:
        return {
            "corpus_name": self.corpus_name,
            "sample_count": self.sample_count,
            "percent_fact_checked": self.percent_fact_checked,
            "percent_credible": self.percent_credible,
            "percent_unreliable": self.percent_unreliable,
        }


def audit(corpus_name: str, predictions: list[Prediction]) -> AuditReport:
    """Class shares as percentages with one decimal."""
    if not predictions:
        raise DataError("cannot audit an empty prediction set")
    n = len(predictions)
    counts = {label: 0 for label in ClassLabel}
    for pred in predictions:
        counts[pred.label] += 1

    # Rounding three shares to one decimal keeps the sum within the
    # invariant's +/- 0.1 of 100, so no redistribution is needed.
    rounded = {label: round(100.0 * counts[label] / n, 1) for label in ClassLabel}
    return AuditReport(
        corpus_name=corpus_name,
        sample_count=n,
        percent_fact_checked=rounded[ClassLabel.FACT_CHECKED],
        percent_credible=rounded[ClassLabel.CREDIBLE],
        percent_unreliable=rounded[ClassLabel.UNRELIABLE],
    )


def render_audit_table(reports: list[AuditReport]) -> str:
    """Aligned plain-text table of audit rows."""
    headers = ("Corpus", "Fact-checked", "Credible", "Unreliable", "Samples")
    rows = [
        (
            r.corpus_name,
            f"{r.percent_fact_checked:.1f}%",
            f"{r.percent_credible:.1f}%",
            f"{r.percent_unreliable:.1f}%",
            f"{r.sample_count:,}",
        )
        for r in reports
    ]
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)


_FILENAME_RE = re.compile(
    r"^[\w\-. ()\[\]]+\.(jpe?g|png|gif|webp|svg|bmp|tiff?|mp4|mov|avi|pdf|docx?)$",
    re.IGNORECASE,
)
_ERROR_BOILERPLATE = (
    "page not found", "404 not found", "error 404", "404 error",
    "403 forbidden", "access denied", "not found", "no longer available",
    "page cannot be found", "this page isn", "request blocked",
)
MIN_EVIDENCE_TOKENS = 3


@dataclass
class CleanReport:
    kept: int = 0
    dropped_filename: int = 0
    dropped_boilerplate: int = 0
    dropped_short: int = 0

    def to_dict(self) -> dict:
        return {
            "kept": self.kept,
            "dropped_filename": self.dropped_filename,
            "dropped_boilerplate": self.dropped_boilerplate,
            "dropped_short": self.dropped_short,
        }


def clean_evidence(raw_items: list[EvidenceItem]) -> tuple[list[EvidenceItem], CleanReport]:
    """Drop inaccurately scraped entries: bare file names, HTTP error
    boilerplate, and fragments shorter than three tokens."""
    report = CleanReport()
    kept: list[EvidenceItem] = []
    for item in raw_items:
        text = item.text.strip()
        lowered = text.lower()
        if _FILENAME_RE.match(text):
            report.dropped_filename += 1
            continue
        if any(lowered == pat or (pat in lowered and len(lowered) <= len(pat) + 20)
               for pat in _ERROR_BOILERPLATE):
            report.dropped_boilerplate += 1
            continue
        if len(tokenize(text)) < MIN_EVIDENCE_TOKENS:
            report.dropped_short += 1
            continue
        kept.append(item)
        report.kept += 1
    return kept, report
