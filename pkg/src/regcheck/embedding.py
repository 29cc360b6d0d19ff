"""Embedding providers, cosine scoring, and the per-task vector store.

Vectors are unit-normalized on entry so cosine similarity reduces to a dot
product. The mock provider is fully offline and deterministic: each token
contributes a pseudo-random vector seeded by a stable hash of the token, so
similarity grows with token overlap. The live provider speaks the
OpenAI-compatible embeddings HTTP protocol.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Protocol, Sequence

import httpx
import numpy as np

from .chunker import Chunk, tokenize
from .errors import DimensionMismatch, EmptyPartition, ProviderUnavailable, ValidationError

NORM_TOLERANCE = 1e-6


class EmbeddingProvider(Protocol):
    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        """Return one raw (not necessarily normalized) vector per input text."""
        ...


class MockEmbeddingProvider:
    """Deterministic offline embeddings: sum of per-token seeded vectors."""

    def __init__(self, dim: int = 64):
        self.dim = dim
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        cached = self._token_cache.get(token)
        if cached is None:
            seed = int.from_bytes(hashlib.sha256(token.encode("utf-8")).digest()[:8], "big")
            cached = np.random.default_rng(seed).uniform(-1.0, 1.0, self.dim)
            self._token_cache[token] = cached
        return cached

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        vectors = []
        for text in texts:
            tokens = tokenize(text) or [text]
            total = np.zeros(self.dim)
            for token in tokens:
                total = total + self._token_vector(token)
            vectors.append(total)
        return vectors


class OpenAIEmbeddingProvider:
    """Client for an OpenAI-compatible POST /v1/embeddings endpoint."""

    def __init__(
        self,
        base_url: str,
        api_key: str = "",
        model: str = "text-embedding-3-large",
        batch_size: int = 128,
        timeout: float = 60.0,
        retries: int = 3,
        sleeper: Callable[[float], None] = time.sleep,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.model = model
        self.batch_size = batch_size
        self.retries = retries
        self._sleeper = sleeper
        url = base_url.rstrip("/")
        if not url.endswith("/embeddings"):
            url = url + "/v1/embeddings"
        self._url = url
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def _post_batch(self, batch: Sequence[str]) -> list[np.ndarray]:
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = self._client.post(self._url, json={"model": self.model, "input": list(batch)})
                if response.status_code >= 500:
                    raise ProviderUnavailable(f"embeddings endpoint returned {response.status_code}")
                response.raise_for_status()
                payload = response.json()
                rows = sorted(payload["data"], key=lambda item: item["index"])
                return [np.asarray(row["embedding"], dtype=float) for row in rows]
            except (httpx.HTTPError, ProviderUnavailable, KeyError, ValueError) as exc:
                last_error = exc
                if attempt < self.retries:
                    self._sleeper(0.5 * (2**attempt))
        raise ProviderUnavailable(f"embeddings provider failed after {self.retries} retries: {last_error}")

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        vectors: list[np.ndarray] = []
        for start in range(0, len(texts), self.batch_size):
            vectors.extend(self._post_batch(texts[start : start + self.batch_size]))
        return vectors


def normalize(vector: np.ndarray) -> np.ndarray:
    array = np.asarray(vector, dtype=float)
    norm = float(np.linalg.norm(array))
    if norm < 1e-12:
        raise DimensionMismatch("degenerate zero-norm embedding vector")
    return array / norm


def embed_texts(texts: Sequence[str], provider: EmbeddingProvider) -> list[np.ndarray]:
    """Embed texts in order, normalizing and enforcing a consistent dimension."""
    if any(not text for text in texts):
        raise ValidationError("texts to embed must be non-empty strings")
    raw = provider.embed(texts)
    if len(raw) != len(texts):
        raise ProviderUnavailable("embedding provider returned a mismatched number of vectors")
    vectors = [normalize(v) for v in raw]
    dims = {v.shape[0] for v in vectors}
    if len(dims) > 1:
        raise DimensionMismatch(f"provider returned inconsistent dimensions: {sorted(dims)}")
    return vectors


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; equals the dot product for normalized inputs."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector dims differ: {a.shape} vs {b.shape}")
    denom = float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    if denom == 0.0:
        raise DimensionMismatch("cosine undefined for zero vectors")
    return float(np.dot(a, b) / denom)


@dataclass(frozen=True)
class EmbeddedChunk:
    chunk: Chunk
    vector: np.ndarray  # unit-normalized
    ordinal: int  # position within the doc_kind partition, document order


class VectorStore:
    """In-memory exact-scan store of embedded chunks, partitioned by doc kind."""

    def __init__(self):
        self._partitions: dict[str, list[EmbeddedChunk]] = {}
        self._by_id: dict[str, EmbeddedChunk] = {}
        self._dim: int | None = None

    def add(self, chunk: Chunk, vector: np.ndarray) -> None:
        if chunk.chunk_id in self._by_id:
            raise ValidationError(f"duplicate chunk_id: {chunk.chunk_id}")
        vector = normalize(vector)
        if self._dim is None:
            self._dim = vector.shape[0]
        elif vector.shape[0] != self._dim:
            raise DimensionMismatch(f"store dim is {self._dim}, got {vector.shape[0]}")
        partition = self._partitions.setdefault(chunk.doc_kind, [])
        entry = EmbeddedChunk(chunk=chunk, vector=vector, ordinal=len(partition))
        partition.append(entry)
        self._by_id[chunk.chunk_id] = entry

    def add_chunks(self, chunks: Iterable[Chunk], provider: EmbeddingProvider) -> None:
        chunks = list(chunks)
        if not chunks:
            return
        vectors = embed_texts([c.text for c in chunks], provider)
        for chunk, vector in zip(chunks, vectors):
            self.add(chunk, vector)

    def entries(self, doc_kind: str) -> list[EmbeddedChunk]:
        partition = self._partitions.get(doc_kind, [])
        if not partition:
            raise EmptyPartition(f"no chunks of kind {doc_kind!r} in the store")
        return partition

    def has_kind(self, doc_kind: str) -> bool:
        return bool(self._partitions.get(doc_kind))

    def get(self, chunk_id: str) -> EmbeddedChunk:
        return self._by_id[chunk_id]

    @property
    def dim(self) -> int | None:
        return self._dim
