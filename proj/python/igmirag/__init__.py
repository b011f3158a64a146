"""Python bindings for the igmirag hypergraph retrieval core."""

import json

from ._igmirag import (
    Error,
    Hypergraph,
    Store,
    canonical_key,
    chunk_document,
    chunk_relevance,
    hashing_embedding,
    normalize_answer,
    preference,
    quotas,
    rrf_fuse,
    short_form_score,
    window_quotas,
)
from ._igmirag import build_index_json as _build_index_json
from ._igmirag import diffuse as _diffuse

__all__ = [
    "Error",
    "Hypergraph",
    "Store",
    "build_index",
    "canonical_key",
    "chunk_document",
    "chunk_relevance",
    "diffuse",
    "hashing_embedding",
    "load_store",
    "normalize_answer",
    "preference",
    "query",
    "quotas",
    "rrf_fuse",
    "short_form_score",
    "window_quotas",
]


def build_index(corpus, config, prefix):
    """Build and persist a store; returns the build statistics."""
    return json.loads(_build_index_json(str(corpus), str(config), str(prefix)))


def load_store(path):
    return Store.load(str(path))


def query(store, question, diffusion=True):
    """Run the full query pipeline; returns answer, strategy, units, chunks and tokens."""
    result = json.loads(store.query_json(question, diffusion))
    if "trace" in result:
        result["trace"] = [json.loads(line) for line in result["trace"].splitlines()]
    return result


def diffuse(anchors, target_layer, depth, graph):
    """Returns (scores, trace records, exit reason)."""
    scores, trace, exit_reason = _diffuse(anchors, target_layer, depth, graph)
    return scores, [json.loads(line) for line in trace.splitlines()], exit_reason
