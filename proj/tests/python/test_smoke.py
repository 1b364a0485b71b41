import math

import pytest

import wrag


@pytest.fixture(scope="module")
def corpus():
    return wrag.generate_corpus(7, chunks_per_source=120, queries=20)


def test_embedding_is_unit_length():
    v = wrag.embed_local("fan error on boot", 64)
    assert len(v) == 64
    assert math.isclose(sum(x * x for x in v), 1.0, rel_tol=1e-5)


def test_adjust_distance():
    assert wrag.adjust_distance(0.5, 1.5) == 0.75


def test_bm25_hand_value():
    index = wrag.Bm25Index(
        [
            {"chunk_id": "c1", "source": "faq", "doc_id": "d", "text": "fan error"},
            {"chunk_id": "c2", "source": "faq", "doc_id": "d", "text": "fan fan noise"},
        ]
    )
    assert index.score("noise", "c2") == pytest.approx(0.6407, abs=1e-3)
    assert index.search("fan", 2)[0][0] == "c2"


def test_index_round_trip(tmp_path, corpus):
    chunks = corpus["sources"]["manuals"]
    index = wrag.FlatIndex.build("manuals", chunks, dim=64)
    path = tmp_path / "manuals.wrag"
    index.save(path)
    loaded = wrag.FlatIndex.load(path)
    assert loaded == index
    hits = loaded.search(chunks[3]["text"], 3)
    assert hits[0][0] == chunks[3]["chunk_id"]
    assert hits[0][1] == pytest.approx(0.0, abs=1e-6)


def test_corrupt_index_raises(tmp_path, corpus):
    path = tmp_path / "faq.wrag"
    wrag.FlatIndex.build("faq", corpus["sources"]["faq"], dim=16).save(path)
    data = bytearray(path.read_bytes())
    data[-1] ^= 1
    path.write_bytes(bytes(data))
    with pytest.raises(wrag.WragError, match="checksum"):
        wrag.FlatIndex.load(path)


def test_engine_query_in_mock_mode(corpus):
    engine = wrag.Engine.from_corpus(corpus)
    q = corpus["queries"][0]
    response = engine.query(q["query_text"])
    assert response["verdict"] in ("delivered", "suppressed")
    assert 0.0 <= response["confidence"] <= 1.0
    assert set(response["per_source_counts"]) == set(corpus["sources"])
    retrieved = engine.retrieve(q["query_text"], top_k=3)
    assert len(retrieved["final_hits"]) <= 3
    with pytest.raises(wrag.WragError):
        engine.query("   ")


def test_bench_is_reproducible(corpus):
    a = wrag.run_bench(corpus, 7)
    assert a == wrag.run_bench(corpus, 7)
    names = [row["system_name"] for row in a["systems"]]
    assert names == ["keyword_bm25", "uniform_rag", "weighted_rag"]


def test_default_config_round_trips():
    config = wrag.default_config()
    assert set(config) >= {"engine", "profiles", "sources"}
    assert wrag.Engine.from_corpus(wrag.generate_corpus(1, chunks_per_source=60, queries=5), config)
