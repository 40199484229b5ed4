"""Data behind the document-level views.

Two products: per-topic document rankings (top contributions of a topic,
with the full per-document topic mixture for stacked bars) and per-token
topic highlighting of a document's raw text.  Highlight spans are byte
offsets into the UTF-8 encoded raw text so a UI can slice without
re-tokenizing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .corpus import Document, Vocabulary
from .ensemble import Ensemble, TopicRef
from .lda import TopicModel

__all__ = [
    "CapabilityError",
    "DocRanking",
    "HighlightSpan",
    "HighlightedDocument",
    "rank_documents",
    "highlight",
    "HIGHLIGHT_RULES",
    "DEFAULT_PALETTE_SIZE",
]

HIGHLIGHT_RULES = ("contextual", "global")

# Categorical palettes are finite; the emitted color index cycles over one
# of this size while the topic index stays exact.
DEFAULT_PALETTE_SIZE = 10


class CapabilityError(RuntimeError):
    """The requested view needs data this project does not carry."""


@dataclass(frozen=True)
class DocRanking:
    """Strongest documents of one topic, each with its full topic mixture."""

    topic: TopicRef
    rows: tuple[tuple[str, np.ndarray], ...]

    def __post_init__(self):
        last = None
        for doc_id, theta_row in self.rows:
            value = float(theta_row[self.topic.topic_index])
            if last is not None and value > last + 1e-12:
                raise ValueError("ranking rows are not sorted descending")
            last = value


@dataclass(frozen=True)
class HighlightSpan:
    start: int  # byte offset, inclusive
    end: int  # byte offset, exclusive
    topic: int
    color: int


@dataclass(frozen=True)
class HighlightedDocument:
    doc_id: str
    raw_text: str
    spans: tuple[HighlightSpan, ...]


def rank_documents(topic: TopicRef, ensemble: Ensemble, limit: int = 20) -> DocRanking:
    """Top-``limit`` documents by the topic's proportion, ties by doc id.

    Raises CapabilityError when the topic's model has no document-topic
    distribution (imported ensembles without doc-topics files).
    """
    if not ensemble.contains(topic):
        raise ValueError(f"{topic} is not in the ensemble")
    model = ensemble.members[topic.model_index]
    if model.theta is None:
        raise CapabilityError(
            "document ranking is unavailable: this ensemble was imported "
            "without document-topic distributions"
        )
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    n_docs = model.theta.shape[0]
    doc_ids = ensemble.doc_ids or [str(i) for i in range(n_docs)]
    column = model.theta[:, topic.topic_index]
    order = sorted(range(n_docs), key=lambda d: (-column[d], doc_ids[d]))
    rows = tuple(
        (doc_ids[d], model.theta[d].copy()) for d in order[:limit]
    )
    return DocRanking(topic=topic, rows=rows)


def highlight(
    document: Document,
    model: TopicModel,
    vocabulary: Vocabulary,
    theta_row: Optional[np.ndarray] = None,
    rule: str = "contextual",
    palette_size: int = DEFAULT_PALETTE_SIZE,
) -> HighlightedDocument:
    """Assign each retained in-vocabulary token a topic and color index.

    ``contextual`` (default) scores token w as theta_{d,t} * phi_{t,w} with
    the document's own mixture; ``global`` uses phi_{t,w} alone.  Ties break
    toward the lower topic index.  Tokens filtered in preprocessing or
    absent from the vocabulary produce no span.
    """
    if rule not in HIGHLIGHT_RULES:
        raise ValueError(f"unknown highlight rule {rule!r}")
    if model.n_terms != len(vocabulary):
        raise ValueError(
            f"model has {model.n_terms} terms but vocabulary has {len(vocabulary)}"
        )
    if rule == "contextual":
        if theta_row is None:
            raise CapabilityError(
                "contextual highlighting needs the document's topic mixture; "
                "use rule='global' for imported models without one"
            )
        theta_row = np.asarray(theta_row, dtype=np.float64)
        if theta_row.shape != (model.k,):
            raise ValueError(
                f"theta row has shape {theta_row.shape}, expected ({model.k},)"
            )
    spans = []
    for token in document.tokens:
        if token.filtered or token.norm not in vocabulary:
            continue
        w = vocabulary.lookup(token.norm)
        scores = model.phi[:, w] if rule == "global" else theta_row * model.phi[:, w]
        t = int(np.argmax(scores))
        spans.append(
            HighlightSpan(start=token.start, end=token.end, topic=t,
                          color=t % palette_size)
        )
    return HighlightedDocument(
        doc_id=document.id, raw_text=document.raw_text, spans=tuple(spans)
    )
