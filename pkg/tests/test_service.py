import pytest
from fastapi.testclient import TestClient

from anatreport.service import ServiceContext, create_app, region_color


@pytest.fixture(scope="module")
def client(tiny_pipeline):
    state, train, val, test = tiny_pipeline
    context = ServiceContext(state=state, splits={"train": train, "test": test})
    return TestClient(create_app(context))


class TestHealthAndSamples:
    def test_health(self, client):
        body = client.get("/api/health").json()
        assert body["status"] == "ok"
        assert body["schema_version"] == 1
        assert body["splits"]["test"] == 6

    def test_list_samples(self, client):
        response = client.get("/api/samples", params={"split": "test"})
        body = response.json()
        assert response.status_code == 200
        assert len(body["samples"]) == 6
        assert all("sample_id" in s for s in body["samples"])

    def test_unknown_split_404(self, client):
        response = client.get("/api/samples", params={"split": "holdout"})
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "unknown_split"

    def test_sample_detail_has_boxes_gold_and_colors(self, client):
        sample_id = client.get("/api/samples", params={"split": "test"}).json()["samples"][0]["sample_id"]
        body = client.get(f"/api/samples/{sample_id}").json()
        assert len(body["regions"]) == 29
        region = body["regions"][0]
        assert len(region["box"]) == 4
        assert region["color"] == region_color(0)
        assert "clinical_context" in body and "reference_report" in body

    def test_unknown_sample_404(self, client):
        response = client.get("/api/samples/nope")
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "unknown_sample"

    def test_regions_listing(self, client):
        body = client.get("/api/regions").json()
        assert len(body["regions"]) == 29
        assert body["regions"][0]["region_name"] == "right lung"


class TestGenerate:
    def sample_id(self, client):
        return client.get("/api/samples", params={"split": "test"}).json()["samples"][0]["sample_id"]

    def test_deterministic_byte_identical(self, client):
        request = {"sample_id": self.sample_id(client), "backend": "mock", "preset": "f"}
        a = client.post("/api/generate", json=request)
        b = client.post("/api/generate", json=request)
        assert a.status_code == 200
        assert a.content == b.content

    def test_payload_embeds_prompt_document(self, client):
        body = client.post("/api/generate",
                           json={"sample_id": self.sample_id(client), "preset": "f"}).json()
        assert "## Region sentences" in body["prompt_document"]
        assert len(body["region_sentences"]) == 29
        assert body["region_sentences"][3]["color"] == region_color(3)
        assert body["report"]["raw_text"]

    def test_all_false_mask_zero_sections(self, client):
        body = client.post("/api/generate", json={
            "sample_id": self.sample_id(client), "preset": "f",
            "region_mask": [False] * 29,
        }).json()
        assert body["report"]["sections"] == []

    def test_unknown_sample_404(self, client):
        response = client.post("/api/generate", json={"sample_id": "missing"})
        assert response.status_code == 404

    def test_invalid_mask_length_422(self, client):
        response = client.post("/api/generate", json={
            "sample_id": self.sample_id(client), "region_mask": [True] * 5,
        })
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "invalid_request"

    def test_unknown_preset_422(self, client):
        response = client.post("/api/generate", json={
            "sample_id": self.sample_id(client), "preset": "q",
        })
        assert response.status_code == 422

    def test_preset_e_vs_f_differ_exactly_in_anatomy_sections(self, client):
        sid = self.sample_id(client)
        doc_e = client.post("/api/generate", json={"sample_id": sid, "preset": "e"}).json()["prompt_document"]
        doc_f = client.post("/api/generate", json={"sample_id": sid, "preset": "f"}).json()["prompt_document"]
        assert "## Anatomy prompts" not in doc_e
        assert "## Anatomy prompts" in doc_f
        assert doc_e.split("## Clinical context")[1] == doc_f.split("## Clinical context")[1]

    def test_context_override_propagates(self, client):
        body = client.post("/api/generate", json={
            "sample_id": self.sample_id(client), "preset": "f",
            "clinical_context": {"history": "persistent dyspnea on exertion",
                                 "indication": "follow up", "reason_for_exam": ""},
        }).json()
        assert "persistent dyspnea on exertion" in body["report"]["context_summary"]

    def test_explicit_ablation_flags(self, client):
        body = client.post("/api/generate", json={
            "sample_id": self.sample_id(client),
            "ablation": {"l1": True, "l2": True, "p1": False, "p2": False,
                         "p3": False, "c": False},
        }).json()
        assert "## Instruction" not in body["prompt_document"]
        assert "## Clinical context" not in body["prompt_document"]

    def test_remote_without_config_502(self, client):
        response = client.post("/api/generate", json={
            "sample_id": self.sample_id(client), "backend": "remote",
        })
        assert response.status_code == 502
        assert response.json()["error"]["code"] == "remote_backend_failure"

    def test_include_metrics(self, client):
        body = client.post("/api/generate", json={
            "sample_id": self.sample_id(client), "preset": "f", "include_metrics": True,
        }).json()
        assert set(body["metrics"]["nlg"]) == {"bleu1", "bleu2", "bleu3", "bleu4",
                                               "meteor", "rouge_l"}
        assert len(body["metrics"]["candidate_labels"]) == 14


class TestEvaluate:
    def test_scores_and_labels(self, client):
        response = client.post("/api/evaluate", json={
            "candidate": "Right lung: the right lung is clear.",
            "reference": "Right lung: the right lung is clear.",
        })
        body = response.json()
        assert body["nlg"]["bleu1"] == 1.0
        assert body["candidate_labels"]["No Finding"] == "positive"

    def test_missing_fields_422(self, client):
        response = client.post("/api/evaluate", json={"candidate": "x"})
        assert response.status_code == 422
