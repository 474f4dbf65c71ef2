"""Encoding table, normalization arithmetic, rating-page parsing, and the
cached rate-limited lookup client."""

from fractions import Fraction

import pytest

from evverkit.dcs import (
    ABSENT_NORMALIZED,
    DcsCache,
    DcsRecord,
    MbfcClient,
    encode_dcs,
    make_record,
    normalize_dcs,
    parse_mbfc_page,
)
from evverkit.errors import DataError, FetchError

# Exhaustive (factuality x credibility) encoding table: 8 x 4 = 32 cases.
# Credibility only matters for "mixed"; absent factuality encodes 0.
FACTUALITY_VALUES = (None, "satire", "very low", "low", "mixed", "mostly factual", "high", "very high")
CREDIBILITY_VALUES = (None, "low credibility", "medium credibility", "high credibility")


def expected_encoding(factuality, credibility):
    plain = {"satire": -3, "very low": -2, "low": -1,
             "mostly factual": 2, "high": 3, "very high": 4}
    if factuality is None:
        return 0
    if factuality == "mixed":
        return {None: 0, "low credibility": -1,
                "medium credibility": 1, "high credibility": 2}[credibility]
    return plain[factuality]


class TestEncoding:
    @pytest.mark.parametrize("factuality", FACTUALITY_VALUES)
    @pytest.mark.parametrize("credibility", CREDIBILITY_VALUES)
    def test_all_32_combinations(self, factuality, credibility):
        assert encode_dcs(factuality, credibility) == expected_encoding(factuality, credibility)

    def test_case_and_whitespace_insensitive(self):
        assert encode_dcs(" VERY High ", None) == 4
        assert encode_dcs("Mixed", "HIGH CREDIBILITY") == 2

    def test_unknown_factuality_named_in_error(self):
        with pytest.raises(DataError, match="sorta true"):
            encode_dcs("sorta true", None)

    def test_unknown_credibility_named_in_error(self):
        with pytest.raises(DataError, match="great"):
            encode_dcs("mixed", "great")


class TestNormalization:
    def test_endpoints(self):
        assert normalize_dcs(-3) == 0.0
        assert normalize_dcs(4) == 1.0

    def test_absent_value(self):
        assert abs(normalize_dcs(0) - float(Fraction(3, 7))) < 1e-12
        assert ABSENT_NORMALIZED == normalize_dcs(0)

    def test_exact_rational_on_all_values(self):
        for encoded in range(-3, 5):
            want = Fraction(encoded + 3, 7)
            assert abs(normalize_dcs(encoded) - float(want)) < 1e-12

    def test_strictly_monotone(self):
        values = [normalize_dcs(e) for e in range(-3, 5)]
        assert all(a < b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("bad", [-4, 5, 100])
    def test_out_of_range_rejected(self, bad):
        with pytest.raises(DataError):
            normalize_dcs(bad)

    def test_normalize_of_every_encoding_in_unit_interval(self):
        for factuality in FACTUALITY_VALUES:
            for credibility in CREDIBILITY_VALUES:
                value = normalize_dcs(encode_dcs(factuality, credibility))
                assert 0.0 <= value <= 1.0


FIXTURE_PAGE = """
<html><body><article>
<p>These media sources are evaluated on several axes.</p>
<p>Bias Rating: LEFT-CENTER</p>
<p>Factual Reporting: HIGH</p>
<p>MBFC Credibility Rating: HIGH CREDIBILITY</p>
</article></body></html>
"""

MIXED_PAGE = """
<html><body>
<p>Bias Rating: RIGHT</p>
<p>Factual Reporting: MIXED</p>
<p>MBFC Credibility Rating: MEDIUM CREDIBILITY</p>
</body></html>
"""


class TestPageParsing:
    def test_fixture_page_high_encodes_3(self):
        bias, factual, cred = parse_mbfc_page(FIXTURE_PAGE)
        assert factual == "high"
        assert encode_dcs(factual, cred) == 3

    def test_mixed_medium_encodes_1(self):
        _, factual, cred = parse_mbfc_page(MIXED_PAGE)
        assert (factual, cred) == ("mixed", "medium credibility")
        assert encode_dcs(factual, cred) == 1

    def test_page_without_ratings_raises(self):
        with pytest.raises(DataError):
            parse_mbfc_page("<html><body><p>nothing here</p></body></html>")


class FakeClock:
    def __init__(self):
        self.now = 0.0

    def __call__(self):
        return self.now

    def sleep(self, seconds):
        self.now += seconds


class TestLookupClient:
    def _client(self, tmp_path, fetch, clock=None):
        clock = clock or FakeClock()
        cache = DcsCache(tmp_path / "dcs.db")
        client = MbfcClient(cache, fetch=fetch, clock=clock, wall_clock=clock)
        client._limiter._sleep = clock.sleep
        return client, cache, clock

    def test_cache_hit_returns_identical_record(self, tmp_path):
        calls = []

        def fetch(domain):
            calls.append(domain)
            return FIXTURE_PAGE

        client, _, _ = self._client(tmp_path, fetch)
        first = client.lookup_domain("example.org")
        second = client.lookup_domain("example.org")
        assert first == second
        assert calls == ["example.org"]  # second call never refetched

    def test_unknown_domain_gets_absent_record(self, tmp_path):
        def fetch(domain):
            raise FetchError("404", retryable=False)

        client, _, _ = self._client(tmp_path, fetch)
        rec = client.lookup_domain("nowhere.test")
        assert rec.encoded == 0
        assert rec.normalized == pytest.approx(3 / 7)
        assert rec.factual_reporting is None

    def test_parse_failure_recorded_not_raised(self, tmp_path):
        client, cache, _ = self._client(tmp_path, lambda d: "<p>no ratings</p>")
        rec = client.lookup_domain("odd.site")
        assert rec.parse_failed
        assert rec.encoded == 0
        assert cache.get("odd.site").parse_failed

    def test_rate_limit_one_request_per_second(self, tmp_path):
        times = []
        clock = FakeClock()

        def fetch(domain):
            times.append(clock.now)
            return FIXTURE_PAGE

        client, _, _ = self._client(tmp_path, fetch, clock)
        for k in range(3):
            client.lookup_domain(f"site{k}.org")
        gaps = [b - a for a, b in zip(times, times[1:])]
        assert all(gap >= 1.0 for gap in gaps)

    def test_ttl_expiry_triggers_refetch(self, tmp_path):
        calls = []
        clock = FakeClock()

        def fetch(domain):
            calls.append(clock.now)
            return FIXTURE_PAGE

        cache = DcsCache(tmp_path / "dcs.db", ttl_seconds=100)
        client = MbfcClient(cache, fetch=fetch, clock=clock, wall_clock=clock)
        client._limiter._sleep = clock.sleep
        client.lookup_domain("example.org")
        clock.now += 50
        client.lookup_domain("example.org")
        assert len(calls) == 1  # still fresh
        clock.now += 100
        client.lookup_domain("example.org")
        assert len(calls) == 2  # expired, refetched


class TestCachePersistence:
    def test_save_reload(self, tmp_path):
        path = tmp_path / "dcs.db"
        cache = DcsCache(path)
        cache.put(make_record("a.org", None, "high", "high credibility"))
        cache.save()
        again = DcsCache(path)
        assert again.get("a.org").encoded == 3

    def test_snapshot_roundtrip(self, tmp_path):
        cache = DcsCache(tmp_path / "dcs.db")
        cache.put(make_record("a.org", "left", "mixed", "low credibility"))
        cache.put(make_record("b.org"))
        snap = tmp_path / "snap.jsonl"
        assert cache.export_snapshot(snap) == 2
        other = DcsCache(tmp_path / "other.db")
        assert other.import_snapshot(snap) == 2
        assert other.get("a.org").encoded == -1

    def test_record_roundtrip(self):
        rec = make_record("x.org", "center", "very low", None, fetched_at=123.0)
        assert DcsRecord.from_dict(rec.to_dict()) == rec
