"""Label codes, value-object invariants and serialization round-trips."""

from datetime import date

import pytest

from evverkit.errors import DataError
from evverkit.types import (
    Article,
    ClassLabel,
    DatasetSplit,
    EvidenceItem,
    article_id,
    label_from_code,
    normalize_title_key,
)


class TestClassLabel:
    def test_code_one_is_credible(self):
        assert label_from_code(1) is ClassLabel.CREDIBLE

    def test_code_zero_is_fact_checked(self):
        assert label_from_code(0) is ClassLabel.FACT_CHECKED

    def test_code_two_is_unreliable(self):
        assert label_from_code(2) is ClassLabel.UNRELIABLE

    @pytest.mark.parametrize("bad", [7, -1, 3, "1", 1.0, True, None])
    def test_out_of_range_codes_rejected(self, bad):
        with pytest.raises(DataError):
            label_from_code(bad)

    def test_mapping_is_total_and_injective(self):
        names = {label_from_code(c).label_name for c in (0, 1, 2)}
        assert names == {"fact_checked", "credible", "unreliable"}


def _article(**overrides):
    base = dict(
        id="abc123", title="Some headline", date=date(2019, 5, 1),
        url="https://example.org/some-headline", domain="example.org",
        topic="politics", label=ClassLabel.CREDIBLE, source_dataset="fnc",
    )
    base.update(overrides)
    return Article(**base)


class TestArticle:
    def test_roundtrip_identity(self):
        art = _article(body="full text here")
        assert Article.from_dict(art.to_dict()) == art

    def test_missing_body_omitted_from_dict(self):
        assert "body" not in _article().to_dict()

    def test_empty_title_rejected(self):
        with pytest.raises(DataError):
            _article(title="   ")

    def test_unknown_source_rejected(self):
        with pytest.raises(DataError):
            _article(source_dataset="mystery")


class TestEvidenceItem:
    def test_roundtrip(self):
        item = EvidenceItem(id="e1", text="a snippet", domain="example.org", kind="long")
        assert EvidenceItem.from_dict(item.to_dict()) == item

    def test_domain_optional(self):
        item = EvidenceItem(id="e2", text="no domain")
        assert EvidenceItem.from_dict(item.to_dict()) == item

    def test_bad_kind_rejected(self):
        with pytest.raises(DataError):
            EvidenceItem(id="e3", text="x", kind="medium")


class TestDatasetSplit:
    def test_roundtrip(self):
        s = DatasetSplit(split="train", article_ids=("a", "b"))
        assert DatasetSplit.from_dict(s.to_dict()) == s

    def test_unknown_split_rejected(self):
        with pytest.raises(DataError):
            DatasetSplit(split="holdout")


class TestIdsAndKeys:
    def test_normalization_collapses_case_space_punctuation(self):
        assert normalize_title_key("Claim A!") == normalize_title_key("claim  a")

    def test_id_stable_across_runs(self):
        assert article_id("Claim A", "fnc") == article_id("Claim A", "fnc")

    def test_id_differs_by_source(self):
        assert article_id("Claim A", "fnc") != article_id("Claim A", "nelagt")
