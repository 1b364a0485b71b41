"""Weighted multi-source retrieval with a confidence-gated generator.

The heavy lifting lives in the compiled ``_wrag`` module; this layer turns
its JSON payloads into Python objects.
"""

import json

from . import _wrag
from ._wrag import Bm25Index as _Bm25Index
from ._wrag import FlatIndex as _FlatIndex
from ._wrag import WragError, adjust_distance, embed_local

__all__ = [
    "Bm25Index",
    "Engine",
    "FlatIndex",
    "WragError",
    "adjust_distance",
    "default_config",
    "embed_local",
    "generate_corpus",
    "run_bench",
]


def _config_text(config):
    if config is None or isinstance(config, str):
        return config
    return json.dumps(config)


def default_config():
    return json.loads(_wrag.default_config())


class Bm25Index:
    def __init__(self, chunks):
        self._index = _Bm25Index.build(json.dumps(list(chunks)))

    def score(self, query, chunk_id):
        return self._index.score(query, chunk_id)

    def idf(self, term):
        return self._index.idf(term)

    def search(self, query, k):
        return self._index.search(query, k)

    def __len__(self):
        return self._index.doc_count


class FlatIndex:
    def __init__(self, raw):
        self._index = raw

    @classmethod
    def build(cls, source, chunks, dim=384):
        return cls(_FlatIndex.build(source, json.dumps(list(chunks)), dim))

    @classmethod
    def load(cls, path):
        return cls(_FlatIndex.load(str(path)))

    def save(self, path):
        self._index.save(str(path))

    def search(self, query, k):
        if isinstance(query, str):
            query = embed_local(query, self.dim)
        return self._index.search(list(query), k)

    @property
    def source(self):
        return self._index.source

    @property
    def dim(self):
        return self._index.dim

    def __len__(self):
        return len(self._index)

    def __eq__(self, other):
        return isinstance(other, FlatIndex) and self._index == other._index


def generate_corpus(seed, sources=4, chunks_per_source=500, queries=100):
    return json.loads(_wrag.generate_corpus(seed, sources, chunks_per_source, queries))


def run_bench(corpus, seed, config=None):
    return json.loads(_wrag.run_bench(json.dumps(corpus), seed, _config_text(config)))


class Engine:
    """Query engine in mock-provider mode unless opened otherwise."""

    def __init__(self, raw):
        self._engine = raw

    @classmethod
    def from_corpus(cls, corpus, config=None):
        return cls(_wrag.Engine.from_corpus(json.dumps(corpus), _config_text(config)))

    @classmethod
    def open(cls, index_dir, config=None, mock_providers=True):
        return cls(_wrag.Engine.open(str(index_dir), _config_text(config), mock_providers))

    def query(self, text, top_k=None, profile=None):
        return json.loads(self._engine.query(text, top_k, profile))

    def retrieve(self, text, top_k=None, profile=None):
        return json.loads(self._engine.retrieve(text, top_k, profile))

    def sources(self, profile=None):
        return json.loads(self._engine.sources(profile))
