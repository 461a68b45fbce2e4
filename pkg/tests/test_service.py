import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from newstrust.classifier import FeaturizerConfig, Model, TrainConfig, save_model
from newstrust.registry import TOPICS, TRUST_LEVELS
from newstrust.service import (
    BalancedSampleRequest,
    assess_source,
    balanced_sample,
    classify_article,
    create_app,
)

LEVEL_NAMES = [lv.name for lv in TRUST_LEVELS]
TOPIC_IDS = [t.id for t in TOPICS]


def keyword_model(classes, prefix, dim=2**10):
    """A model that predicts class i for texts containing '<prefix><i>'."""
    from newstrust.classifier import hashed_features

    weights = np.zeros((len(classes), dim))
    feat = FeaturizerConfig(dim=dim)
    for i in range(len(classes)):
        for index, value in hashed_features(f"{prefix}{i}", feat).items():
            weights[i, index] = 50.0 * value
    return Model(
        classes=list(classes),
        weights=weights,
        bias=np.zeros(len(classes)),
        featurizer=feat,
        train_config=TrainConfig(dim=dim),
        seed=0,
    )


TRUST_MODEL = keyword_model(LEVEL_NAMES, "lvltok")
TOPIC_MODEL = keyword_model(TOPIC_IDS, "toptok")


def text_for(level_index, topic_index=0):
    return f"lvltok{level_index} some words toptok{topic_index}"


class TestClassifyArticle:
    def test_lowest_level_flagged(self):
        result = classify_article("lvltok0 filler words", TRUST_MODEL)
        assert result.predicted_level == "Proceed with Maximum Caution"
        assert result.flagged
        assert "untrustworthy newspapers" in result.message

    def test_second_level_flagged(self):
        assert classify_article("lvltok1 filler", TRUST_MODEL).flagged

    def test_credible_not_flagged(self):
        result = classify_article("lvltok3 filler", TRUST_MODEL)
        assert result.predicted_level == "Generally Credible"
        assert not result.flagged
        assert result.message == ""

    def test_probabilities_echo_predict_proba(self):
        from newstrust.classifier import predict_proba

        text = "lvltok2 some words"
        result = classify_article(text, TRUST_MODEL)
        expected = predict_proba(TRUST_MODEL, text)
        assert list(result.probabilities.values()) == pytest.approx(list(expected))

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            classify_article("   ", TRUST_MODEL)

    def test_flagged_iff_coarse_untrusted(self):
        from newstrust.registry import coarsen_level, level_by_name

        for i in range(5):
            result = classify_article(f"lvltok{i} x", TRUST_MODEL)
            coarse = coarsen_level(level_by_name(result.predicted_level))
            assert result.flagged == (coarse == "untrusted")


class TestAssessSource:
    def test_unanimous(self):
        texts = [text_for(4) for _ in range(10)]
        a = assess_source("unknown.example", texts, TRUST_MODEL, TOPIC_MODEL)
        assert a.inferred_level == "High Credibility"
        assert a.confidence == 1.0
        assert a.inferred_coarse == "trusted"
        assert sum(a.level_histogram.values()) == a.n_articles == 10

    def test_tie_breaks_to_lower_trust(self):
        texts = [text_for(0)] * 3 + [text_for(3)] * 3
        a = assess_source("tied.example", texts, TRUST_MODEL, TOPIC_MODEL)
        assert a.inferred_level == "Proceed with Maximum Caution"

    def test_plurality_and_confidence(self):
        texts = [text_for(3)] * 7 + [text_for(4)] * 3
        a = assess_source("plural.example", texts, TRUST_MODEL, TOPIC_MODEL)
        assert a.inferred_level == "Generally Credible"
        assert a.confidence == pytest.approx(0.7)

    def test_permutation_invariant(self):
        texts = [text_for(i % 5, i % 4) for i in range(20)]
        a1 = assess_source("p.example", texts, TRUST_MODEL, TOPIC_MODEL)
        a2 = assess_source("p.example", texts[::-1], TRUST_MODEL, TOPIC_MODEL)
        assert a1.level_histogram == a2.level_histogram
        assert a1.inferred_level == a2.inferred_level

    def test_small_sample_warns(self):
        a = assess_source("few.example", [text_for(2)], TRUST_MODEL, TOPIC_MODEL)
        assert a.warnings

    def test_zero_articles_rejected(self):
        with pytest.raises(ValueError):
            assess_source("none.example", [], TRUST_MODEL, TOPIC_MODEL)


def candidates_in_cells(cells: dict[tuple[str, str], int]):
    out = []
    i = 0
    for (level, topic), count in cells.items():
        for _ in range(count):
            out.append({"article_id": f"a{i}", "level": level, "topic": topic})
            i += 1
    return tuple(out)


class TestBalancedSample:
    def test_one_per_cell_when_n_equals_cells(self):
        cells = {
            (lv, t): 3 for lv in LEVEL_NAMES for t in TOPIC_IDS
        }  # 20 non-empty cells
        request = BalancedSampleRequest(candidates_in_cells(cells), n=20, seed=1)
        ids, truncated = balanced_sample(request)
        assert len(ids) == 20 and not truncated
        by_cell = {}
        lookup = {c["article_id"]: (c["level"], c["topic"]) for c in request.candidates}
        for article_id in ids:
            by_cell[lookup[article_id]] = by_cell.get(lookup[article_id], 0) + 1
        assert all(v == 1 for v in by_cell.values())
        assert len(by_cell) == 20

    def test_single_cell(self):
        cells = {(LEVEL_NAMES[0], "sports"): 8}
        request = BalancedSampleRequest(candidates_in_cells(cells), n=5, seed=0)
        ids, truncated = balanced_sample(request)
        assert len(ids) == 5 and not truncated

    def test_small_cell_exhausts_round_robin_continues(self):
        cells = {(LEVEL_NAMES[0], "sports"): 5, (LEVEL_NAMES[1], "health"): 1}
        request = BalancedSampleRequest(candidates_in_cells(cells), n=4, seed=0)
        ids, truncated = balanced_sample(request)
        lookup = {c["article_id"]: c["level"] for c in request.candidates}
        counts = {}
        for article_id in ids:
            counts[lookup[article_id]] = counts.get(lookup[article_id], 0) + 1
        assert counts[LEVEL_NAMES[0]] == 3
        assert counts[LEVEL_NAMES[1]] == 1

    def test_truncation(self):
        cells = {(LEVEL_NAMES[0], "sports"): 2}
        request = BalancedSampleRequest(candidates_in_cells(cells), n=10, seed=0)
        ids, truncated = balanced_sample(request)
        assert len(ids) == 2 and truncated

    def test_deterministic_no_duplicates(self):
        cells = {(lv, t): 4 for lv in LEVEL_NAMES[:3] for t in TOPIC_IDS[:2]}
        request = BalancedSampleRequest(candidates_in_cells(cells), n=9, seed=77)
        first, _ = balanced_sample(request)
        second, _ = balanced_sample(request)
        assert first == second
        assert len(set(first)) == len(first)

    def test_n_must_be_positive(self):
        with pytest.raises(ValueError):
            BalancedSampleRequest((), n=0)


@pytest.fixture
def client(tmp_path):
    app = create_app(tmp_path / "ws", max_workers=2)
    save_model(TRUST_MODEL, tmp_path / "ws" / "models" / "trust-base.json")
    save_model(TOPIC_MODEL, tmp_path / "ws" / "models" / "topic-base.json")
    with TestClient(app) as c:
        yield c


class TestHttpApi:
    def test_classify_endpoint(self, client):
        resp = client.post("/v1/classify", json={"text": "lvltok0 words"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["flagged"] is True
        assert body["predicted_level"] == "Proceed with Maximum Caution"
        assert body["model_id"] == "trust-base"

    def test_classify_empty_text_400(self, client):
        assert client.post("/v1/classify", json={"text": " "}).status_code == 400

    def test_sources_round_trip(self, client):
        resp = client.post(
            "/v1/sources",
            json={"domain": "new-outlet.example", "trust_score": 85, "topic": "health"},
        )
        assert resp.status_code == 200
        assert resp.json()["trust_level"] == "Generally Credible"
        assert resp.json()["admitted"] is True
        listing = client.get("/v1/sources").json()
        assert [s["domain"] for s in listing] == ["new-outlet.example"]

    def test_bad_source_400(self, client):
        resp = client.post("/v1/sources", json={"domain": "x", "trust_score": 5})
        assert resp.status_code == 400

    def test_unknown_job_404(self, client):
        assert client.get("/v1/jobs/nope").status_code == 404

    def test_crawl_job_lifecycle(self, client, site):
        resp = client.post(
            "/v1/sources/fixture.example/crawl",
            json={
                "history_url_template": f"{site.base_url}/history/{{page}}/",
                "article_link_selector": r"/articles/\d+$",
                "max_pages": 5,
                "min_articles": 10,
                "max_articles": 15,
                "politeness_delay_ms": 0,
            },
        )
        assert resp.status_code == 200
        job_id = resp.json()["job_id"]
        for _ in range(100):
            state = client.get(f"/v1/jobs/{job_id}").json()["state"]
            if state in ("done", "failed", "cancelled"):
                break
            time.sleep(0.1)
        snapshot = client.get(f"/v1/jobs/{job_id}").json()
        assert snapshot["state"] == "done"
        assert snapshot["archived"] == 15

    def test_cancel_terminal_job_409(self, client, site):
        resp = client.post(
            "/v1/sources/fixture.example/crawl",
            json={
                "history_url_template": f"{site.base_url}/history/{{page}}/",
                "article_link_selector": r"/articles/\d+$",
                "max_pages": 1,
                "min_articles": 1,
                "max_articles": 3,
                "politeness_delay_ms": 0,
            },
        )
        job_id = resp.json()["job_id"]
        for _ in range(100):
            if client.get(f"/v1/jobs/{job_id}").json()["state"] == "done":
                break
            time.sleep(0.1)
        assert client.post(f"/v1/jobs/{job_id}/cancel").status_code == 409

    def test_bad_crawl_config_400(self, client):
        resp = client.post(
            "/v1/sources/fixture.example/crawl",
            json={"history_url_template": "no placeholder", "article_link_selector": ".*"},
        )
        assert resp.status_code == 400

    def test_assess_and_decision_round_trip(self, client):
        texts = [text_for(3, 2)] * 7 + [text_for(4, 2)] * 3
        resp = client.post(
            "/v1/sources/unknown-outlet.example/assess", json={"texts": texts}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["inferred_level"] == "Generally Credible"
        assert body["confidence"] == pytest.approx(0.7)
        assert body["decision"] == "pending"
        assert sum(body["level_histogram"].values()) == 10
        assert body["warnings"]  # below the 40-article floor

        decide = client.post(
            "/v1/sources/unknown-outlet.example/assess", json={"decision": "escalate"}
        )
        assert decide.status_code == 200
        assert decide.json()["decision"] == "escalate"
        # decisions are final once made
        again = client.post(
            "/v1/sources/unknown-outlet.example/assess", json={"decision": "dismiss"}
        )
        assert again.status_code == 409

    def test_assess_without_texts_400(self, client):
        resp = client.post("/v1/sources/x.example/assess", json={})
        assert resp.status_code == 400

    def test_balanced_sample_endpoint(self, client):
        cells = {(lv, t): 2 for lv in LEVEL_NAMES[:2] for t in TOPIC_IDS[:2]}
        resp = client.post(
            "/v1/samples/balanced",
            json={"candidates": list(candidates_in_cells(cells)), "n": 4, "seed": 5},
        )
        assert resp.status_code == 200
        body = resp.json()
        assert len(body["article_ids"]) == 4
        assert body["truncated"] is False
        redo = client.post(
            "/v1/samples/balanced",
            json={"candidates": list(candidates_in_cells(cells)), "n": 4, "seed": 5},
        )
        assert redo.json()["article_ids"] == body["article_ids"]

    def test_models_listing(self, client):
        models = client.get("/v1/models").json()
        ids = [m["model_id"] for m in models]
        assert ids == ["topic-base", "trust-base"]

    def test_evaluation_job(self, client, tmp_path):
        from newstrust.dataset import save_dataset
        from test_dataset import make_dataset

        ds = make_dataset(
            {"good-sports.example": 30, "ok-health.example": 30}, label_kind="topic"
        )
        save_dataset(ds, tmp_path / "ds")
        resp = client.post(
            "/v1/evaluations",
            json={"dataset_dir": str(tmp_path / "ds"), "k": 2, "epochs": 2},
        )
        assert resp.status_code == 200
        job_id = resp.json()["job_id"]
        for _ in range(200):
            body = client.get(f"/v1/evaluations/{job_id}").json()
            if body["state"] in ("done", "failed"):
                break
            time.sleep(0.1)
        assert body["state"] == "done"
        assert "f1_macro" in body["result"]

    def test_unknown_evaluation_404(self, client):
        assert client.get("/v1/evaluations/nope").status_code == 404
