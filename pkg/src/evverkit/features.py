"""Statistical text features (tokenizer, count vectors, TF-IDF) and the
binary embedding file format shared with the exporter.

TF-IDF convention, stated once because nothing upstream pins it:
    tf(t, doc)  = raw count of t in doc
    idf(t)      = ln((1 + N) / (1 + df(t))) + 1
    vector      = L2-normalized (tf * idf); all-zero rows stay zero.

Embedding file layout (little-endian, bit-exact across languages):
    bytes 0..3   magic "EVVR"
    bytes 4..7   version (u32), currently 1
    bytes 8..11  vector count (u32)
    bytes 12..15 dimension (u32)
    payload      count * dim float32, row-major
A sidecar ``<file>.manifest.json`` carries {model_name, pooling, ids}.
"""

from __future__ import annotations

import json
import re
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import DataError, FormatError

EMBEDDING_MAGIC = b"EVVR"
EMBEDDING_VERSION = 1
_HEADER = struct.Struct("<4sIII")

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric run."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Vocabulary:
    token_to_index: dict
    document_frequency: dict
    corpus_size: int

    def __len__(self) -> int:
        return len(self.token_to_index)

    def to_dict(self) -> dict:
        return {
            "tokens": sorted(self.token_to_index, key=self.token_to_index.get),
            "document_frequency": self.document_frequency,
            "corpus_size": self.corpus_size,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        return cls(
            token_to_index={t: i for i, t in enumerate(d["tokens"])},
            document_frequency=dict(d["document_frequency"]),
            corpus_size=int(d["corpus_size"]),
        )


def fit_vocabulary(corpus: Iterable[str], max_features: int = 50_000) -> Vocabulary:
    """Keep the ``max_features`` tokens with highest document frequency,
    ties broken lexicographically; indices are assigned in token sort order."""
    if max_features < 1:
        raise DataError("max_features must be positive")
    df: Counter = Counter()
    n_docs = 0
    for doc in corpus:
        n_docs += 1
        df.update(set(tokenize(doc)))
    if n_docs == 0:
        raise DataError("cannot fit a vocabulary on an empty corpus")
    selected = sorted(df, key=lambda t: (-df[t], t))[:max_features]
    selected.sort()
    return Vocabulary(
        token_to_index={t: i for i, t in enumerate(selected)},
        document_frequency={t: df[t] for t in selected},
        corpus_size=n_docs,
    )


def count_vector(text: str, vocab: Vocabulary) -> sparse.csr_matrix:
    """Raw token counts restricted to the vocabulary, as a 1 x V sparse row."""
    counts = Counter(tokenize(text))
    cols, vals = [], []
    for token, c in counts.items():
        idx = vocab.token_to_index.get(token)
        if idx is not None:
            cols.append(idx)
            vals.append(c)
    return sparse.csr_matrix(
        (np.asarray(vals, dtype=np.int64), (np.zeros(len(cols), dtype=np.int64), cols)),
        shape=(1, len(vocab)),
    )


def _idf(vocab: Vocabulary) -> np.ndarray:
    order = sorted(vocab.token_to_index, key=vocab.token_to_index.get)
    df = np.array([vocab.document_frequency[t] for t in order], dtype=np.float64)
    return np.log((1.0 + vocab.corpus_size) / (1.0 + df)) + 1.0


def tfidf_vector(text: str, vocab: Vocabulary) -> sparse.csr_matrix:
    """TF-IDF row for one document under the module convention above."""
    counts = count_vector(text, vocab).astype(np.float64)
    if counts.nnz == 0:
        return counts
    idf = _idf(vocab)
    weighted = counts.multiply(idf).tocsr()
    norm = np.sqrt(weighted.multiply(weighted).sum())
    if norm > 0:
        weighted = weighted.multiply(1.0 / norm).tocsr()
    return weighted


def count_matrix(texts: Sequence[str], vocab: Vocabulary) -> sparse.csr_matrix:
    return sparse.vstack([count_vector(t, vocab) for t in texts], format="csr")


def tfidf_matrix(texts: Sequence[str], vocab: Vocabulary) -> sparse.csr_matrix:
    return sparse.vstack([tfidf_vector(t, vocab) for t in texts], format="csr")


@dataclass(frozen=True)
class EmbeddingSet:
    """Dense float32 vectors keyed by text id, in manifest order."""

    model_name: str
    pooling: str  # eos | cls | mean
    ids: tuple
    vectors: np.ndarray  # N x d float32

    def __post_init__(self):
        if self.pooling not in ("eos", "cls", "mean"):
            raise FormatError(f"unknown pooling {self.pooling!r}")
        if self.vectors.ndim != 2:
            raise FormatError("vectors must be a 2-d matrix")
        if len(self.ids) != self.vectors.shape[0]:
            raise FormatError(
                f"manifest lists {len(self.ids)} ids but matrix has {self.vectors.shape[0]} rows"
            )
        if len(set(self.ids)) != len(self.ids):
            raise FormatError("duplicate ids in embedding manifest")
        if self.vectors.dtype != np.float32:
            raise FormatError("embedding vectors must be float32")

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def row(self, text_id: str) -> np.ndarray:
        idx = self._index().get(text_id)
        if idx is None:
            raise DataError(f"no embedding for id {text_id!r}")
        return self.vectors[idx]

    def _index(self) -> dict:
        if not hasattr(self, "_id_index"):
            object.__setattr__(self, "_id_index", {i: k for k, i in enumerate(self.ids)})
        return self._id_index

    def __contains__(self, text_id: str) -> bool:
        return text_id in self._index()


def manifest_path(path) -> Path:
    return Path(str(path) + ".manifest.json")


def save_embeddings(path, emb: EmbeddingSet) -> None:
    path = Path(path)
    count, dim = emb.vectors.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(EMBEDDING_MAGIC, EMBEDDING_VERSION, count, dim))
        fh.write(np.ascontiguousarray(emb.vectors, dtype="<f4").tobytes())
    manifest = {"model_name": emb.model_name, "pooling": emb.pooling, "ids": list(emb.ids)}
    manifest_path(path).write_text(json.dumps(manifest, ensure_ascii=False), encoding="utf-8")


def load_embeddings(path) -> EmbeddingSet:
    """Load and validate an embedding file plus its sidecar manifest."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: file shorter than the 16-byte header")
    magic, version, count, dim = _HEADER.unpack_from(raw)
    if magic != EMBEDDING_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {EMBEDDING_MAGIC!r}")
    if version != EMBEDDING_VERSION:
        raise FormatError(f"{path}: unsupported version {version}, expected {EMBEDDING_VERSION}")
    expected = count * dim * 4
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload is {len(payload)} bytes but header implies {expected} "
            f"({count} x {dim} float32)"
        )
    vectors = np.frombuffer(payload, dtype="<f4").reshape(count, dim).copy()

    mpath = manifest_path(path)
    if not mpath.exists():
        raise FormatError(f"{mpath}: manifest sidecar missing")
    manifest = json.loads(mpath.read_text(encoding="utf-8"))
    ids = tuple(manifest["ids"])
    return EmbeddingSet(
        model_name=manifest["model_name"],
        pooling=manifest["pooling"],
        ids=ids,
        vectors=vectors,
    )
