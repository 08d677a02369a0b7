import pytest
from fastapi.testclient import TestClient

from service_helpers import contract_suite
from scorer_service.app import create_app
from scorer_service.errors import ConfigurationError
from scorer_service.scorers import build_registry, build_scorer

PAIRS = [
    {"src": "The dog slept all afternoon.", "hyp": "Der Hund schlief den ganzen Nachmittag.", "refs": None},
    {"src": "Prices rose sharply.", "hyp": "Die Preise stiegen stark.", "refs": None},
]
REF_PAIRS = [
    {"src": "The dog slept.", "hyp": "Der Hund schlief.", "refs": ["Der Hund hat geschlafen."]},
    {"src": "Prices rose.", "hyp": "Die Preise stiegen.", "refs": ["Die Preise sind gestiegen."]},
]


class TestContractSuite:
    """Criterion: the identical black-box suite the harness runs against its
    built-in scorer passes against the service, for both metric kinds."""

    def test_qe_metric(self, backend):
        contract_suite.ScorerContract(backend, "qe-lex").run_all()

    def test_ref_based_metric(self, backend):
        suite = contract_suite.ScorerContract(backend, "eval-lex")
        suite.check_determinism()
        suite.check_batch_invariance()
        suite.check_healthz()


class TestScore:
    def test_alignment_two_pairs(self, client):
        resp = client.post("/score", json={"metric": "qe-lex", "pairs": PAIRS})
        assert resp.status_code == 200
        scores = resp.json()["scores"]
        assert len(scores) == 2
        assert all(isinstance(s, float) for s in scores)

    def test_identical_pair_identical_score(self, client):
        resp = client.post("/score", json={"metric": "qe-lex", "pairs": [PAIRS[0], PAIRS[0]]})
        a, b = resp.json()["scores"]
        assert a == b

    def test_ref_based_scores_refs(self, client):
        resp = client.post("/score", json={"metric": "eval-lex", "pairs": REF_PAIRS})
        assert resp.status_code == 200
        assert all(0.0 <= s <= 1.0 for s in resp.json()["scores"])

    def test_unknown_metric_400(self, client):
        resp = client.post("/score", json={"metric": "nope", "pairs": PAIRS})
        assert resp.status_code == 400
        assert "nope" in resp.json()["detail"]

    def test_missing_refs_400_names_index(self, client):
        pairs = [REF_PAIRS[0], {"src": "a", "hyp": "b", "refs": []}]
        resp = client.post("/score", json={"metric": "eval-lex", "pairs": pairs})
        assert resp.status_code == 400
        assert "pair 1" in resp.json()["detail"]

    def test_malformed_pair_400_names_index(self, client):
        resp = client.post("/score", json={"metric": "qe-lex", "pairs": [{"hyp": "no src"}]})
        assert resp.status_code == 400
        assert "pair 0" in resp.json()["detail"]

    def test_empty_pairs_400(self, client):
        resp = client.post("/score", json={"metric": "qe-lex", "pairs": []})
        assert resp.status_code == 400

    def test_oversized_batch_413(self):
        with TestClient(create_app(max_batch=3)) as client:
            pairs = [PAIRS[0]] * 4
            resp = client.post("/score", json={"metric": "qe-lex", "pairs": pairs})
            assert resp.status_code == 413


class TestHealthz:
    def test_reports_metrics_versions_orientation(self, client):
        body = client.get("/healthz").json()
        assert body["metric_names"] == ["eval-lex", "qe-lex"]
        assert set(body["model_versions"]) == {"eval-lex", "qe-lex"}
        assert body["orientation"] == {"eval-lex": "higher", "qe-lex": "higher"}

    def test_503_before_startup(self):
        # TestClient without the context manager never runs startup hooks
        client = TestClient(create_app())
        assert client.get("/healthz").status_code == 503
        assert client.post("/score", json={"metric": "qe-lex", "pairs": PAIRS}).status_code == 503

    def test_version_hash_stable_across_restarts(self, tmp_path):
        weights = tmp_path / "qe.bin"
        weights.write_bytes(b"frozen weights blob")
        config = {"qe-lex": {"type": "lexical_qe", "weights": str(weights)}}
        versions = []
        for _ in range(2):
            with TestClient(create_app(config=config)) as client:
                versions.append(client.get("/healthz").json()["model_versions"]["qe-lex"])
        assert versions[0] == versions[1]
        weights.write_bytes(b"different weights blob")
        with TestClient(create_app(config=config)) as client:
            assert client.get("/healthz").json()["model_versions"]["qe-lex"] != versions[0]


class TestAuth:
    def test_token_required_when_configured(self):
        with TestClient(create_app(auth_token="sesame")) as client:
            assert client.get("/healthz").status_code == 401
            ok = client.get("/healthz", headers={"X-Auth-Token": "sesame"})
            assert ok.status_code == 200
            resp = client.post(
                "/score",
                json={"metric": "qe-lex", "pairs": PAIRS},
                headers={"X-Auth-Token": "sesame"},
            )
            assert resp.status_code == 200


class TestConfig:
    def test_unknown_scorer_type_rejected(self):
        with pytest.raises(ConfigurationError):
            build_scorer("x", {"type": "transformer"})

    def test_empty_config_rejected(self):
        with pytest.raises(ConfigurationError):
            build_registry({})

    def test_missing_weights_rejected(self):
        with pytest.raises(ConfigurationError):
            build_scorer("x", {"type": "lexical_qe", "weights": "/no/such/file"})
