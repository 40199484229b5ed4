"""Corpus ingestion: tokenization, vocabulary and the document-term matrix.

The document-term matrix is the sole input to model training.  Tokens are
never deleted during preprocessing, only marked ``filtered``, so the close
reading view can still render every surface form at its original position.
Spans are byte offsets into the UTF-8 encoding of the raw text, which keeps
highlighting exact regardless of the reader's string indexing rules.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable

import numpy as np
from scipy import sparse

__all__ = [
    "Token",
    "Document",
    "Vocabulary",
    "DocTermMatrix",
    "PreprocessingConfig",
    "EmptyVocabularyError",
    "tokenize",
    "build_matrix",
    "load_stopwords",
    "load_corpus_dir",
    "load_corpus_jsonl",
]

# Maximal runs of Unicode letters (\w minus digits and underscore).
_LETTER_RUN = re.compile(r"[^\W\d_]+", re.UNICODE)


class EmptyVocabularyError(ValueError):
    """Every term was filtered out; no vocabulary can be built."""


@dataclass(frozen=True)
class Token:
    surface: str
    norm: str
    start: int  # byte offset into raw_text.encode("utf-8"), inclusive
    end: int  # exclusive
    filtered: bool = False


@dataclass
class Document:
    id: str
    title: str
    raw_text: str
    tokens: list[Token] = field(default_factory=list)

    def retained_terms(self) -> list[str]:
        return [t.norm for t in self.tokens if not t.filtered]


@dataclass(frozen=True)
class PreprocessingConfig:
    """Tokenizer settings.

    ``normalizer`` is a pluggable hook applied after lowercasing (a stemmer
    slot); the default is the identity.
    """

    lowercase: bool = True
    stopwords: frozenset[str] = frozenset()
    min_token_len: int = 1
    normalizer: Callable[[str], str] | None = None

    def normalize(self, surface: str) -> str:
        norm = surface.lower() if self.lowercase else surface
        if self.normalizer is not None:
            norm = self.normalizer(norm)
        return norm


class Vocabulary:
    """Dense term-id space: ids 0..V-1 in lexicographic term order."""

    def __init__(self, terms: Iterable[str]):
        self.terms: list[str] = list(terms)
        self.index: dict[str, int] = {t: i for i, t in enumerate(self.terms)}
        if len(self.index) != len(self.terms):
            raise ValueError("vocabulary terms must be unique")

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def lookup(self, term: str) -> int:
        return self.index[term]

    def term_of(self, term_id: int) -> str:
        return self.terms[term_id]

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.terms == other.terms

    def content_hash(self) -> str:
        import hashlib

        return hashlib.sha256("\n".join(self.terms).encode("utf-8")).hexdigest()


@dataclass
class DocTermMatrix:
    """Sparse per-document term counts; rows align with ``doc_ids``."""

    counts: sparse.csr_matrix
    doc_ids: list[str]

    @property
    def n_docs(self) -> int:
        return self.counts.shape[0]

    @property
    def n_terms(self) -> int:
        return self.counts.shape[1]

    def total_tokens(self) -> int:
        return int(self.counts.sum())


def tokenize(raw_text: str, config: PreprocessingConfig) -> list[Token]:
    """Segment text into letter-run tokens with byte spans.

    Deterministic; stopwords and sub-minimum tokens come back marked
    ``filtered`` rather than dropped.  Empty text yields an empty list.
    """
    if not raw_text:
        return []
    # Byte offset of each character boundary, so spans index the UTF-8 bytes.
    byte_at = np.zeros(len(raw_text) + 1, dtype=np.int64)
    np.cumsum([len(c.encode("utf-8")) for c in raw_text], out=byte_at[1:])
    tokens = []
    for match in _LETTER_RUN.finditer(raw_text):
        surface = match.group(0)
        norm = config.normalize(surface)
        filtered = len(norm) < config.min_token_len or norm in config.stopwords
        tokens.append(
            Token(
                surface=surface,
                norm=norm,
                start=int(byte_at[match.start()]),
                end=int(byte_at[match.end()]),
                filtered=filtered,
            )
        )
    return tokens


def build_matrix(
    documents: list[Document], min_doc_freq: int = 1
) -> tuple[Vocabulary, DocTermMatrix]:
    """Build the vocabulary and per-document term counts.

    The vocabulary keeps exactly the unfiltered normalized forms occurring in
    at least ``min_doc_freq`` documents.  Tokens whose term falls below the
    cutoff are marked filtered in place, so afterwards every document token
    either maps to a vocabulary id or carries the filtered flag.
    """
    if min_doc_freq < 1:
        raise ValueError("min_doc_freq must be >= 1")
    doc_freq: dict[str, int] = {}
    for doc in documents:
        for term in set(doc.retained_terms()):
            doc_freq[term] = doc_freq.get(term, 0) + 1
    kept = sorted(t for t, df in doc_freq.items() if df >= min_doc_freq)
    if not kept:
        raise EmptyVocabularyError(
            "all terms filtered out; vocabulary would be empty "
            f"(min_doc_freq={min_doc_freq}, candidate terms={len(doc_freq)})"
        )
    vocab = Vocabulary(kept)

    rows, cols, data = [], [], []
    for d, doc in enumerate(documents):
        counts: dict[int, int] = {}
        new_tokens = []
        for tok in doc.tokens:
            if not tok.filtered and tok.norm not in vocab:
                tok = replace(tok, filtered=True)
            if not tok.filtered:
                tid = vocab.lookup(tok.norm)
                counts[tid] = counts.get(tid, 0) + 1
            new_tokens.append(tok)
        doc.tokens = new_tokens
        for tid in sorted(counts):
            rows.append(d)
            cols.append(tid)
            data.append(counts[tid])
    matrix = sparse.csr_matrix(
        (data, (rows, cols)), shape=(len(documents), len(vocab)), dtype=np.int64
    )
    return vocab, DocTermMatrix(counts=matrix, doc_ids=[d.id for d in documents])


def load_stopwords(path) -> frozenset[str]:
    """One term per line; ``#`` starts a comment; blank lines ignored."""
    terms = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        term = line.split("#", 1)[0].strip()
        if term:
            terms.add(term)
    return frozenset(terms)


def load_corpus_dir(path, config: PreprocessingConfig) -> list[Document]:
    """Read every ``.txt`` file in a directory; the file stem is the doc id."""
    root = Path(path)
    files = sorted(root.glob("*.txt"))
    if not files:
        raise FileNotFoundError(f"no .txt files in {root}")
    docs = []
    for f in files:
        text = f.read_text(encoding="utf-8")
        docs.append(
            Document(id=f.stem, title=f.stem, raw_text=text, tokens=tokenize(text, config))
        )
    return docs


def load_corpus_jsonl(path, config: PreprocessingConfig) -> list[Document]:
    """Read a JSON-lines corpus with ``{"id", "title", "text"}`` per line."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                doc_id, title, text = obj["id"], obj.get("title", obj["id"]), obj["text"]
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{n}: malformed corpus line: {exc}") from exc
            docs.append(
                Document(id=str(doc_id), title=str(title), raw_text=text,
                         tokens=tokenize(text, config))
            )
    if not docs:
        raise ValueError(f"{path}: empty corpus")
    return docs
