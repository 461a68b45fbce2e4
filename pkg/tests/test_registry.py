import json
from datetime import datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from newstrust.registry import (
    TOPICS,
    TRUST_LEVELS,
    Admission,
    ArticleDraft,
    LabelingError,
    Source,
    ValidationError,
    admit_source,
    coarse_level_from_score,
    coarsen_level,
    inherit_labels,
    level_from_score,
    load_registry,
    save_registry,
    source_from_dict,
    topic_by_id,
)

NOW = datetime(2023, 5, 10, tzinfo=timezone.utc)


def make_draft(domain="example.com", url="https://example.com/a"):
    return ArticleDraft(
        article_id="a1",
        source_domain=domain,
        url=url,
        text="word " * 250,
        word_count=250,
        fetched_at=NOW,
    )


class TestTaxonomy:
    def test_five_levels_partition_range(self):
        assert len(TRUST_LEVELS) == 5
        covered = []
        for lv in TRUST_LEVELS:
            covered.extend(range(lv.score_lo, lv.score_hi + 1))
        assert sorted(covered) == list(range(101))

    def test_index_increases_with_score(self):
        los = [lv.score_lo for lv in TRUST_LEVELS]
        assert los == sorted(los)
        assert [lv.index for lv in TRUST_LEVELS] == [0, 1, 2, 3, 4]

    def test_four_topics(self):
        assert [t.display_name for t in TOPICS] == [
            "Political news or commentary",
            "Conspiracy theories or hoaxes",
            "Sports and athletics",
            "Health or medical information",
        ]


class TestLevelFromScore:
    @pytest.mark.parametrize(
        "score,name",
        [
            (100, "High Credibility"),
            (0, "Proceed with Maximum Caution"),
            (39, "Proceed with Maximum Caution"),
            (40, "Proceed with Caution"),
            (59, "Proceed with Caution"),
            (60, "Credible with Exceptions"),
            (74, "Credible with Exceptions"),
            (75, "Generally Credible"),
            (99, "Generally Credible"),
        ],
    )
    def test_bin_boundaries(self, score, name):
        assert level_from_score(score).name == name

    def test_every_score_has_exactly_one_level(self):
        for score in range(101):
            level = level_from_score(score)
            containing = [
                lv for lv in TRUST_LEVELS if lv.score_lo <= score <= lv.score_hi
            ]
            assert containing == [level]

    @pytest.mark.parametrize("bad", [-1, 101, 250, 59.5, "60", None, True])
    def test_rejects_bad_scores(self, bad):
        with pytest.raises(ValidationError):
            level_from_score(bad)


class TestCoarse:
    @pytest.mark.parametrize(
        "score,expected", [(59, "untrusted"), (60, "trusted"), (100, "trusted"), (0, "untrusted")]
    )
    def test_threshold(self, score, expected):
        assert coarse_level_from_score(score) == expected

    @pytest.mark.parametrize(
        "name,expected",
        [
            ("Proceed with Caution", "untrusted"),
            ("Credible with Exceptions", "trusted"),
            ("High Credibility", "trusted"),
        ],
    )
    def test_coarsen_level(self, name, expected):
        level = next(lv for lv in TRUST_LEVELS if lv.name == name)
        assert coarsen_level(level) == expected

    def test_coarsen_consistent_with_score_everywhere(self):
        for score in range(101):
            assert coarsen_level(level_from_score(score)) == coarse_level_from_score(score)


class TestAdmission:
    def test_paywall_rejected(self):
        s = Source("example.com", 80, TOPICS[0], paywalled=True)
        assert admit_source(s) == Admission(False, "paywall")

    def test_language_rejected(self):
        s = Source("esempio.it", 80, TOPICS[0], language="it")
        assert admit_source(s) == Admission(False, "language")

    @pytest.mark.parametrize("lang", ["en", "EN", "en-GB"])
    def test_english_accepted(self, lang):
        s = Source("example.com", 80, TOPICS[0], language=lang)
        assert admit_source(s).accepted

    @pytest.mark.parametrize("bad", ["", "no spaces allowed.com x", "-bad.com", "http://x.com"])
    def test_malformed_domain(self, bad):
        with pytest.raises(ValidationError):
            Source(bad, 80, TOPICS[0])


class TestInheritance:
    def test_direct_inheritance(self):
        source = Source("example.com", 100, topic_by_id("sports"))
        article = inherit_labels(make_draft(), source)
        assert article.trust_level.name == "High Credibility"
        assert article.topic.id == "sports"

    def test_low_score_conspiracy(self):
        source = Source("example.com", 30, topic_by_id("conspiracy"))
        article = inherit_labels(make_draft(), source)
        assert article.trust_level.name == "Proceed with Maximum Caution"
        assert article.topic.id == "conspiracy"

    def test_domain_mismatch(self):
        source = Source("other.com", 30, topic_by_id("conspiracy"))
        with pytest.raises(LabelingError):
            inherit_labels(make_draft(domain="example.com"), source)

    @given(st.integers(min_value=0, max_value=100), st.sampled_from([t.id for t in TOPICS]))
    def test_inheritance_is_pure_function_of_source(self, score, topic_id):
        source = Source("example.com", score, topic_by_id(topic_id))
        a1 = inherit_labels(make_draft(url="https://example.com/1"), source)
        a2 = inherit_labels(make_draft(url="https://example.com/2"), source)
        assert a1.trust_level == a2.trust_level
        assert a1.topic == a2.topic


class TestRegistryFile:
    def test_round_trip_derives_level(self, tmp_path):
        path = tmp_path / "registry.json"
        path.write_text(
            json.dumps(
                [
                    {"domain": "a.example", "trust_score": 80, "topic": "health"},
                    {
                        "domain": "b.example",
                        "trust_score": 30,
                        "topic": "conspiracy",
                        "language": "en",
                        "paywalled": True,
                    },
                ]
            )
        )
        sources = load_registry(path)
        assert [s.trust_level.name for s in sources] == [
            "Generally Credible",
            "Proceed with Maximum Caution",
        ]
        out = tmp_path / "copy.json"
        save_registry(sources, out)
        assert load_registry(out) == sources

    def test_input_trust_level_is_ignored(self):
        source = source_from_dict(
            {"domain": "a.example", "trust_score": 100, "topic": "sports",
             "trust_level": "Proceed with Caution"}
        )
        assert source.trust_level.name == "High Credibility"

    def test_missing_topic_rejected(self):
        with pytest.raises(ValidationError):
            source_from_dict({"domain": "a.example", "trust_score": 50})
