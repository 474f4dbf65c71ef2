"""Tokenizer, vocabulary, count/TF-IDF vectors against a brute-force
oracle, and the binary embedding format."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evverkit.errors import DataError, FormatError
from evverkit.features import (
    EmbeddingSet,
    count_vector,
    fit_vocabulary,
    load_embeddings,
    manifest_path,
    save_embeddings,
    tfidf_matrix,
    tfidf_vector,
    tokenize,
)


def tfidf_oracle(docs: list[str], doc_index: int, vocab) -> np.ndarray:
    """Independent direct evaluation of the module's TF-IDF convention:
    tf * (ln((1+N)/(1+df)) + 1), then L2 normalization."""
    tokens = tokenize(docs[doc_index])
    n = len(docs)
    out = np.zeros(len(vocab.token_to_index))
    for token, idx in vocab.token_to_index.items():
        tf = sum(1 for t in tokens if t == token)
        df = vocab.document_frequency[token]
        out[idx] = tf * (math.log((1 + n) / (1 + df)) + 1.0)
    norm = math.sqrt(float(np.sum(out * out)))
    return out / norm if norm > 0 else out


class TestTokenize:
    def test_basic(self):
        assert tokenize("Biden said X!") == ["biden", "said", "x"]

    def test_empty(self):
        assert tokenize("") == []

    def test_hyphen_splits(self):
        assert tokenize("COVID-19 cure") == ["covid", "19", "cure"]

    def test_unicode_punctuation_runs(self):
        assert tokenize("a--b…c") == ["a", "b", "c"]


class TestVocabulary:
    def test_top_by_document_frequency_with_lexicographic_ties(self):
        vocab = fit_vocabulary(["a b", "b c"], max_features=2)
        assert set(vocab.token_to_index) == {"b", "a"}  # b has df 2; tie a < c
        assert vocab.document_frequency == {"a": 1, "b": 2}
        assert vocab.corpus_size == 2

    def test_cap_larger_than_vocab_keeps_all(self):
        vocab = fit_vocabulary(["x y z"], max_features=100)
        assert len(vocab) == 3

    def test_indices_contiguous(self):
        vocab = fit_vocabulary(["d c b a"], max_features=4)
        assert sorted(vocab.token_to_index.values()) == [0, 1, 2, 3]

    def test_deterministic(self):
        docs = ["alpha beta", "beta gamma", "gamma alpha beta"]
        assert fit_vocabulary(docs, 2).token_to_index == fit_vocabulary(docs, 2).token_to_index

    def test_permutation_invariant_over_document_order(self):
        docs = ["alpha beta", "beta gamma", "delta"]
        a = fit_vocabulary(docs, 10)
        b = fit_vocabulary(list(reversed(docs)), 10)
        assert a.token_to_index == b.token_to_index
        assert a.document_frequency == b.document_frequency

    def test_empty_corpus_rejected(self):
        with pytest.raises(DataError):
            fit_vocabulary([], 10)

    def test_roundtrip(self):
        from evverkit.features import Vocabulary

        vocab = fit_vocabulary(["a b", "b c"], 10)
        assert Vocabulary.from_dict(vocab.to_dict()) == vocab


class TestCountVector:
    def test_direct_count(self):
        vocab = fit_vocabulary(["a b"], 10)  # indices: a=0, b=1
        vec = count_vector("b b a", vocab).toarray()[0]
        assert vec.tolist() == [1, 2]

    def test_out_of_vocabulary_only(self):
        vocab = fit_vocabulary(["a b"], 10)
        assert count_vector("zzz qqq", vocab).nnz == 0

    def test_order_independent(self):
        vocab = fit_vocabulary(["w x y z"], 10)
        a = count_vector("w x y z z", vocab).toarray()
        b = count_vector("z y z x w", vocab).toarray()
        assert (a == b).all()


class TestTfidf:
    def test_hand_example(self):
        # corpus {"a b", "b"}: idf(a) = ln(3/2)+1, idf(b) = ln(3/3)+1
        vocab = fit_vocabulary(["a b", "b"], 10)
        raw_a = math.log(3 / 2) + 1.0
        raw_b = math.log(3 / 3) + 1.0
        norm = math.hypot(raw_a, raw_b)
        vec = tfidf_vector("a b", vocab).toarray()[0]
        assert vec[vocab.token_to_index["a"]] == pytest.approx(raw_a / norm, abs=1e-12)
        assert vec[vocab.token_to_index["b"]] == pytest.approx(raw_b / norm, abs=1e-12)

    def test_zero_vector_stays_zero(self):
        vocab = fit_vocabulary(["a b", "b"], 10)
        vec = tfidf_vector("zzz", vocab).toarray()[0]
        assert not np.isnan(vec).any()
        assert (vec == 0).all()

    def test_identical_docs_identical_vectors(self):
        docs = ["same text here"] * 4
        vocab = fit_vocabulary(docs, 10)
        mat = tfidf_matrix(docs, vocab).toarray()
        assert (mat == mat[0]).all()

    def test_matches_oracle_on_random_corpora(self):
        rng = np.random.default_rng(7)
        alphabet = [f"w{k}" for k in range(30)]
        for _ in range(20):
            n_docs = int(rng.integers(2, 20))
            docs = [
                " ".join(rng.choice(alphabet, size=rng.integers(1, 40)))
                for _ in range(n_docs)
            ]
            vocab = fit_vocabulary(docs, max_features=25)
            for i in range(n_docs):
                got = tfidf_vector(docs[i], vocab).toarray()[0]
                want = tfidf_oracle(docs, i, vocab)
                np.testing.assert_allclose(got, want, atol=1e-9)

    def test_rows_unit_norm_or_zero(self):
        rng = np.random.default_rng(11)
        docs = [" ".join(rng.choice(list("abcdefg"), size=5)) for _ in range(10)]
        vocab = fit_vocabulary(docs, 5)
        mat = tfidf_matrix(docs + ["zzz"], vocab)
        norms = np.sqrt(np.asarray(mat.multiply(mat).sum(axis=1)).ravel())
        for norm in norms:
            assert norm == pytest.approx(1.0, abs=1e-9) or norm == 0.0


def _sample_embeddings(n=4, d=3):
    rng = np.random.default_rng(3)
    return EmbeddingSet(
        model_name="fixture-encoder",
        pooling="cls",
        ids=tuple(f"id{i}" for i in range(n)),
        vectors=rng.standard_normal((n, d)).astype(np.float32),
    )


class TestEmbeddingFormat:
    def test_roundtrip_bit_exact(self, tmp_path):
        emb = _sample_embeddings()
        p = tmp_path / "emb.bin"
        save_embeddings(p, emb)
        loaded = load_embeddings(p)
        assert loaded.ids == emb.ids
        assert loaded.model_name == emb.model_name
        assert loaded.pooling == emb.pooling
        assert loaded.vectors.tobytes() == emb.vectors.tobytes()

    def test_truncated_payload_names_byte_counts(self, tmp_path):
        emb = _sample_embeddings()
        p = tmp_path / "emb.bin"
        save_embeddings(p, emb)
        raw = p.read_bytes()
        p.write_bytes(raw[:-4])
        with pytest.raises(FormatError, match=r"44 bytes.*48"):
            load_embeddings(p)

    def test_bad_magic(self, tmp_path):
        emb = _sample_embeddings()
        p = tmp_path / "emb.bin"
        save_embeddings(p, emb)
        raw = bytearray(p.read_bytes())
        raw[:4] = b"NOPE"
        p.write_bytes(bytes(raw))
        with pytest.raises(FormatError, match="magic"):
            load_embeddings(p)

    def test_bad_version(self, tmp_path):
        emb = _sample_embeddings()
        p = tmp_path / "emb.bin"
        save_embeddings(p, emb)
        raw = bytearray(p.read_bytes())
        raw[4] = 9
        p.write_bytes(bytes(raw))
        with pytest.raises(FormatError, match="version"):
            load_embeddings(p)

    def test_manifest_row_mismatch(self, tmp_path):
        emb = _sample_embeddings()
        p = tmp_path / "emb.bin"
        save_embeddings(p, emb)
        manifest = manifest_path(p)
        doc = manifest.read_text().replace('"id3"', '"id3", "id4"')
        manifest.write_text(doc)
        with pytest.raises(FormatError, match="ids"):
            load_embeddings(p)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(FormatError, match="duplicate"):
            EmbeddingSet(
                model_name="m", pooling="cls", ids=("a", "a"),
                vectors=np.zeros((2, 2), dtype=np.float32),
            )

    def test_missing_manifest(self, tmp_path):
        emb = _sample_embeddings()
        p = tmp_path / "emb.bin"
        save_embeddings(p, emb)
        manifest_path(p).unlink()
        with pytest.raises(FormatError, match="manifest"):
            load_embeddings(p)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.text(max_size=30), max_size=8))
def test_tokenize_outputs_are_lowercase_alnum(texts):
    for text in texts:
        for token in tokenize(text):
            assert token == token.lower()
            assert token.isalnum()
