"""HTTP service routes, error envelopes, and CLI/service payload parity."""

from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from helpers import synth_context, synth_corpus
from reibun.cli import run_cli
from reibun.config import EngineConfig
from reibun.corpus import serialize_conllu
from reibun.engine import Engine
from reibun.service import create_app


@pytest.fixture(scope="module")
def corpus_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("svc") / "corpus.conllu"
    path.write_text(serialize_conllu(synth_corpus(80, seed=51)), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def client(corpus_file):
    cfg = EngineConfig(corpus_path=str(corpus_file))
    return TestClient(create_app(Engine.from_config(cfg)))


CONTEXT = serialize_conllu([synth_context("本")])


def _suggest_body(**overrides):
    body = {"word": "本", "context": CONTEXT, "level": "N3", "k": 3}
    body.update(overrides)
    return body


class TestHealthAndStats:
    def test_health(self, client):
        got = client.get("/v1/health")
        assert got.status_code == 200
        assert got.json() == {"status": "ok", "index_sentences": 80}

    def test_bare_alias_matches(self, client):
        assert client.get("/health").json() == client.get("/v1/health").json()

    def test_stats(self, client):
        got = client.get("/v1/stats")
        assert got.status_code == 200
        payload = got.json()
        assert payload["corpus"]["sentence_count"] == 80
        assert payload["index"]["doc_count"] == 80
        assert payload["index"]["keys"] > 0
        assert payload["embeddings_mode"] == "stub"

    def test_stats_alias(self, client):
        assert client.get("/stats").json() == client.get("/v1/stats").json()


class TestSuggestRoute:
    def test_success(self, client):
        got = client.post("/v1/suggest", json=_suggest_body())
        assert got.status_code == 200
        payload = got.json()
        assert payload["word"] == "本"
        assert payload["target_level"] == "N3"
        assert 0 < len(payload["items"]) <= 3
        for item in payload["items"]:
            assert "本" in item["surface"]

    def test_alias_parity(self, client):
        a = client.post("/v1/suggest", json=_suggest_body())
        b = client.post("/suggest", json=_suggest_body())
        assert a.json() == b.json()

    def test_empty_result_still_200(self, client):
        ctx = serialize_conllu([synth_context("珈琲")])
        got = client.post("/v1/suggest", json=_suggest_body(word="珈琲", context=ctx))
        assert got.status_code == 200
        payload = got.json()
        assert payload["items"] == []
        assert payload["reason"] == "no_candidates"

    def test_missing_fields(self, client):
        got = client.post("/v1/suggest", json={"word": "本"})
        assert got.status_code == 400
        err = got.json()["error"]
        assert err["type"] == "bad_request"
        assert "context" in err["message"]
        assert "level" in err["message"]

    def test_malformed_json(self, client):
        got = client.post(
            "/v1/suggest",
            content=b"{not json",
            headers={"content-type": "application/json"},
        )
        assert got.status_code == 400
        assert got.json()["error"]["type"] == "bad_request"

    def test_non_object_body(self, client):
        got = client.post("/v1/suggest", json=[1, 2, 3])
        assert got.status_code == 400
        assert "object" in got.json()["error"]["message"]

    def test_bad_level(self, client):
        got = client.post("/v1/suggest", json=_suggest_body(level="N9"))
        assert got.status_code == 400

    def test_raw_context_without_annotator(self, client):
        got = client.post(
            "/v1/suggest", json=_suggest_body(context="本を読むのが好きだ。")
        )
        assert got.status_code == 400
        assert "annotator" in got.json()["error"]["message"]

    def test_bad_k(self, client):
        got = client.post("/v1/suggest", json=_suggest_body(k=0))
        assert got.status_code == 400


class TestGenerateRoute:
    def _client(self, corpus_file, tmp_path, replies=None):
        cfg = EngineConfig(corpus_path=str(corpus_file))
        if replies is not None:
            transcript = tmp_path / "gen.txt"
            transcript.write_text("\n---\n".join(replies), encoding="utf-8")
            cfg.generation_transcript = str(transcript)
        return TestClient(create_app(Engine.from_config(cfg)))

    def test_transcript_generation(self, corpus_file, tmp_path):
        client = self._client(
            corpus_file, tmp_path, ["1. 本を読む。\n2. 本を買う。", "1. 本を送る。"]
        )
        got = client.post(
            "/v1/generate",
            json={"word": "本", "context": "本が好きだ。", "level": "N3", "k": 3},
        )
        assert got.status_code == 200
        payload = got.json()
        assert payload["sentences"] == ["本を読む。", "本を買う。", "本を送る。"]
        assert payload["rounds"] == 2
        assert payload["truncated"] is False

    def test_unconfigured_is_503(self, client):
        got = client.post(
            "/v1/generate",
            json={"word": "本", "context": "本が好きだ。", "level": "N3"},
        )
        assert got.status_code == 503
        assert got.json()["error"]["type"] == "not_configured"

    def test_endpoint_exhaustion_is_502(self, corpus_file, tmp_path):
        client = self._client(corpus_file, tmp_path, [""])
        got = client.post(
            "/v1/generate",
            json={"word": "本", "context": "本が好きだ。", "level": "N3", "k": 2},
        )
        assert got.status_code == 502
        assert got.json()["error"]["type"] == "generation_failure"

    def test_missing_fields(self, corpus_file, tmp_path):
        client = self._client(corpus_file, tmp_path, ["x"])
        got = client.post("/v1/generate", json={"word": "本"})
        assert got.status_code == 400


def _judge_reply(systems: dict, ranking=None) -> str:
    return json.dumps(
        {
            "systems": {
                sid: {
                    "sentences": [
                        {"difficulty": "N3", "sense": "similar", "reject": False}
                        for _ in sentences
                    ],
                    "syntax_diversity": "Medium",
                }
                for sid, sentences in systems.items()
            },
            "ranking": list(ranking or sorted(systems)),
            "comment": "ok",
        }
    )


class TestJudgeRoute:
    SYSTEMS = {"corpus": ["本を読む。"], "generative": ["本を買う。"]}

    def _client(self, corpus_file, tmp_path, replies=None):
        cfg = EngineConfig(corpus_path=str(corpus_file))
        if replies is not None:
            transcript = tmp_path / "judge.txt"
            transcript.write_text("\n---\n".join(replies), encoding="utf-8")
            cfg.judge_transcript = str(transcript)
        return TestClient(create_app(Engine.from_config(cfg)))

    def _body(self, **overrides):
        body = {
            "word": "本",
            "context": "本が好きだ。",
            "level": "N3",
            "systems": self.SYSTEMS,
            "votes": 3,
        }
        body.update(overrides)
        return body

    def test_majority_vote(self, corpus_file, tmp_path):
        reply = _judge_reply(self.SYSTEMS)
        client = self._client(corpus_file, tmp_path, [reply, "garbage", reply])
        got = client.post("/v1/judge", json=self._body())
        assert got.status_code == 200
        payload = got.json()
        assert sorted(payload["display_order"]) == ["corpus", "generative"]
        assert payload["votes_valid"] == [True, False, True]
        assert payload["majority"]["n_valid"] == 2
        assert payload["majority"]["ranking"] == ["corpus", "generative"]

    def test_all_votes_invalid_is_502(self, corpus_file, tmp_path):
        client = self._client(corpus_file, tmp_path, ["a", "b", "c"])
        got = client.post("/v1/judge", json=self._body())
        assert got.status_code == 502
        assert got.json()["error"]["type"] == "judge_failure"

    def test_unconfigured_is_503(self, client):
        got = client.post(
            "/v1/judge",
            json={
                "word": "本",
                "context": "c",
                "level": "N3",
                "systems": TestJudgeRoute.SYSTEMS,
            },
        )
        assert got.status_code == 503

    def test_bad_systems_shape(self, corpus_file, tmp_path):
        client = self._client(corpus_file, tmp_path, ["x"])
        got = client.post("/v1/judge", json=self._body(systems=[]))
        assert got.status_code == 400

    def test_missing_fields(self, corpus_file, tmp_path):
        client = self._client(corpus_file, tmp_path, ["x"])
        got = client.post("/v1/judge", json={"word": "本"})
        assert got.status_code == 400


class TestCliParity:
    def test_suggest_payloads_match(self, capsys, corpus_file, tmp_path, client):
        ctx_file = tmp_path / "ctx.conllu"
        ctx_file.write_text(CONTEXT, encoding="utf-8")
        code = run_cli(
            [
                "suggest",
                "--word",
                "本",
                "--context",
                f"@{ctx_file}",
                "--level",
                "N3",
                "--k",
                "3",
                "--corpus",
                str(corpus_file),
            ]
        )
        cli_payload = json.loads(capsys.readouterr().out)
        assert code == 0
        http_payload = client.post("/v1/suggest", json=_suggest_body()).json()
        assert cli_payload == http_payload
