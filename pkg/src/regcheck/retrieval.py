"""Dense retrieval over the vector store: exact scan, re-rank, truncate.

The first pass ranks every chunk of one source by cosine similarity to the
full dimension query (label plus definition). Survivors are re-scored with an
even blend of the full-query cosine and the bare-label cosine, which keeps
excerpts on-topic for the label when a long definition dilutes the query.
Ties break toward earlier document position.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dimensions import Dimension, form_query
from .documents import PAPER, REGISTRATION
from .embedding import EmbeddingProvider, VectorStore, embed_texts
from .errors import EmptyPartition, ValidationError


@dataclass(frozen=True)
class ScoredExcerpt:
    chunk_id: str
    text: str
    score: float
    first_pass_score: float
    oversized: bool = False


@dataclass(frozen=True)
class RetrievalConfig:
    k: int = 5
    pool_multiplier: int = 3

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.pool_multiplier < 1:
            raise ValidationError("pool_multiplier must be >= 1")

    @property
    def pool_size(self) -> int:
        return self.pool_multiplier * self.k


def first_pass(query_vec: np.ndarray, store: VectorStore, doc_kind: str, pool_size: int) -> list[ScoredExcerpt]:
    """Exact cosine scan of one partition; top ``pool_size`` by score.

    Ties break by ascending chunk ordinal (document order).
    """
    if pool_size < 1:
        raise ValidationError("pool_size must be >= 1")
    entries = store.entries(doc_kind)
    scored = [(float(np.dot(entry.vector, query_vec)), entry) for entry in entries]
    scored.sort(key=lambda pair: (-pair[0], pair[1].ordinal))
    return [
        ScoredExcerpt(
            chunk_id=entry.chunk.chunk_id,
            text=entry.chunk.text,
            score=score,
            first_pass_score=score,
            oversized=entry.chunk.oversized,
        )
        for score, entry in scored[:pool_size]
    ]


def rerank_and_truncate(
    candidates: list[ScoredExcerpt],
    query_vec: np.ndarray,
    label_vec: np.ndarray,
    k: int,
    store: VectorStore,
) -> list[ScoredExcerpt]:
    """Re-score candidates with an even query/label cosine blend; keep top k.

    Store and query vectors are unit-normalized, so each cosine is a plain dot
    product; with ``label_vec == query_vec`` the blend reproduces the
    first-pass score exactly.
    """
    rescored = []
    for candidate in candidates:
        entry = store.get(candidate.chunk_id)
        blend = 0.5 * float(np.dot(entry.vector, query_vec)) + 0.5 * float(np.dot(entry.vector, label_vec))
        rescored.append((blend, entry.ordinal, candidate))
    rescored.sort(key=lambda item: (-item[0], item[1]))
    return [
        ScoredExcerpt(
            chunk_id=candidate.chunk_id,
            text=candidate.text,
            score=blend,
            first_pass_score=candidate.first_pass_score,
            oversized=candidate.oversized,
        )
        for blend, _, candidate in rescored[:k]
    ]


def retrieve_for_dimension(
    dimension: Dimension,
    store: VectorStore,
    config: RetrievalConfig,
    embedder: EmbeddingProvider,
) -> tuple[list[ScoredExcerpt], list[ScoredExcerpt]]:
    """Top-k excerpts from each source for one dimension.

    A source with no chunks yields an empty list rather than failing the task.
    """
    query_vec, label_vec = embed_texts([form_query(dimension), dimension.label], embedder)
    results: dict[str, list[ScoredExcerpt]] = {}
    for doc_kind in (REGISTRATION, PAPER):
        try:
            pool = first_pass(query_vec, store, doc_kind, config.pool_size)
        except EmptyPartition:
            results[doc_kind] = []
            continue
        results[doc_kind] = rerank_and_truncate(pool, query_vec, label_vec, config.k, store)
    return results[REGISTRATION], results[PAPER]
