"""Document rankings and per-token topic highlighting."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from topicuq.corpus import PreprocessingConfig, Vocabulary, build_matrix, tokenize
from topicuq.docviews import (
    DEFAULT_PALETTE_SIZE,
    CapabilityError,
    DocRanking,
    HighlightSpan,
    highlight,
    rank_documents,
)
from topicuq.ensemble import Ensemble, TopicRef
from topicuq.lda import TopicModel

from conftest import make_documents


def ranking_ensemble(theta, doc_ids=None, k=2):
    """Two-member ensemble whose first member carries the given theta."""
    n_terms = 4
    vocabulary = Vocabulary([f"t{i}" for i in range(n_terms)])
    phi = np.full((k, n_terms), 1.0 / n_terms)
    theta = np.asarray(theta, dtype=np.float64)
    members = [
        TopicModel(phi=phi.copy(), theta=theta.copy(), model_id=0),
        TopicModel(phi=phi.copy(), theta=theta.copy(), model_id=1),
    ]
    return Ensemble(members=members, spec=None, vocabulary=vocabulary,
                    doc_ids=doc_ids)


class TestRankDocuments:
    def test_descending_by_anchor_topic(self):
        ensemble = ranking_ensemble(
            [[0.9, 0.1], [0.1, 0.9], [0.5, 0.5]],
            doc_ids=["doc0", "doc1", "doc2"],
        )
        ranking = rank_documents(TopicRef(0, 0), ensemble)
        assert [doc_id for doc_id, _ in ranking.rows] == ["doc0", "doc2", "doc1"]

    def test_limit_clamps_to_corpus_size(self):
        theta = np.tile([[0.6, 0.4]], (5, 1))
        ensemble = ranking_ensemble(theta, doc_ids=[f"d{i}" for i in range(5)])
        ranking = rank_documents(TopicRef(0, 0), ensemble, limit=20)
        assert len(ranking.rows) == 5

    def test_ties_break_by_doc_id_ascending(self):
        theta = np.tile([[0.5, 0.5]], (3, 1))
        ensemble = ranking_ensemble(theta, doc_ids=["b", "a", "c"])
        ranking = rank_documents(TopicRef(0, 1), ensemble)
        assert [doc_id for doc_id, _ in ranking.rows] == ["a", "b", "c"]

    def test_matches_full_sort_oracle(self):
        rng = np.random.default_rng(23)
        theta = rng.dirichlet(np.ones(3), size=50)
        doc_ids = [f"d{i:02d}" for i in range(50)]
        ensemble = ranking_ensemble(theta, doc_ids=doc_ids, k=3)
        topic = TopicRef(0, 1)
        ranking = rank_documents(topic, ensemble, limit=20)
        column = theta[:, 1]
        oracle = sorted(range(50), key=lambda d: (-column[d], doc_ids[d]))
        assert [doc_id for doc_id, _ in ranking.rows] == [
            doc_ids[d] for d in oracle[:20]
        ]
        assert len(ranking.rows) == 20

    def test_rows_carry_full_mixtures(self):
        ensemble = ranking_ensemble([[0.9, 0.1], [0.1, 0.9]],
                                    doc_ids=["x", "y"])
        ranking = rank_documents(TopicRef(0, 0), ensemble)
        for _, theta_row in ranking.rows:
            assert theta_row.shape == (2,)
            assert theta_row.sum() == pytest.approx(1.0, abs=1e-12)

    def test_missing_doc_ids_fall_back_to_indices(self):
        ensemble = ranking_ensemble([[0.9, 0.1], [0.1, 0.9]])
        ranking = rank_documents(TopicRef(0, 0), ensemble)
        assert [doc_id for doc_id, _ in ranking.rows] == ["0", "1"]

    def test_missing_theta_is_capability_error(self):
        ensemble = ranking_ensemble([[0.9, 0.1]])
        ensemble.members[0].theta = None
        with pytest.raises(CapabilityError, match="unavailable"):
            rank_documents(TopicRef(0, 0), ensemble)

    def test_unknown_topic_rejected(self):
        ensemble = ranking_ensemble([[0.9, 0.1]])
        with pytest.raises(ValueError):
            rank_documents(TopicRef(5, 0), ensemble)

    def test_bad_limit_rejected(self):
        ensemble = ranking_ensemble([[0.9, 0.1]])
        with pytest.raises(ValueError):
            rank_documents(TopicRef(0, 0), ensemble, limit=0)

    def test_unsorted_rows_rejected(self):
        rows = (
            ("a", np.array([0.1, 0.9])),
            ("b", np.array([0.9, 0.1])),
        )
        with pytest.raises(ValueError, match="descending"):
            DocRanking(topic=TopicRef(0, 0), rows=rows)


@pytest.fixture
def highlight_setup(tiny_documents):
    vocabulary, _ = build_matrix(tiny_documents)
    # Vocabulary: apple banana cherry date elder fig
    phi = np.array(
        [
            [0.40, 0.30, 0.20, 0.05, 0.03, 0.02],
            [0.05, 0.05, 0.10, 0.30, 0.30, 0.20],
        ]
    )
    model = TopicModel(phi=phi, model_id=0)
    theta_row = np.array([0.6, 0.4])
    return tiny_documents, vocabulary, model, theta_row


class TestHighlight:
    def test_matches_per_token_argmax_oracle(self, highlight_setup):
        documents, vocabulary, model, theta_row = highlight_setup
        for document in documents:
            result = highlight(document, model, vocabulary, theta_row=theta_row)
            expected = []
            for token in document.tokens:
                if token.filtered or token.norm not in vocabulary:
                    continue
                w = vocabulary.lookup(token.norm)
                scores = theta_row * model.phi[:, w]
                t = int(np.argmax(scores))
                expected.append((token.start, token.end, t, t % 10))
            assert [
                (s.start, s.end, s.topic, s.color) for s in result.spans
            ] == expected

    def test_contextual_rule_uses_document_mixture(self, highlight_setup):
        documents, vocabulary, model, _ = highlight_setup
        doc = documents[2]  # "cherry date apple"
        # cherry: phi column (0.20, 0.10).  A mixture tilted far enough
        # toward topic 1 flips cherry from topic 0 to topic 1.
        balanced = highlight(doc, model, vocabulary,
                             theta_row=np.array([0.5, 0.5]))
        tilted = highlight(doc, model, vocabulary,
                           theta_row=np.array([0.2, 0.8]))
        cherry_span = 0
        assert balanced.spans[cherry_span].topic == 0
        assert tilted.spans[cherry_span].topic == 1

    def test_global_rule_ignores_mixture(self, highlight_setup):
        documents, vocabulary, model, _ = highlight_setup
        doc = documents[2]
        result = highlight(doc, model, vocabulary, rule="global")
        expected = [int(np.argmax(model.phi[:, vocabulary.lookup(t.norm)]))
                    for t in doc.tokens]
        assert [s.topic for s in result.spans] == expected

    def test_single_topic_model_assigns_topic_zero(self, highlight_setup):
        documents, vocabulary, _, _ = highlight_setup
        phi = np.full((1, 6), 1.0 / 6.0)
        model = TopicModel(phi=phi, model_id=0)
        result = highlight(documents[0], model, vocabulary,
                           theta_row=np.array([1.0]))
        assert len(result.spans) == len(documents[0].tokens)
        assert all(s.topic == 0 for s in result.spans)

    def test_filtered_tokens_produce_no_span(self):
        config = PreprocessingConfig(stopwords=frozenset({"banana"}))
        text = "apple banana cherry"
        doc_tokens = tokenize(text, config)
        from topicuq.corpus import Document

        doc = Document(id="d", title="d", raw_text=text, tokens=doc_tokens)
        vocabulary = Vocabulary(["apple", "cherry"])
        model = TopicModel(phi=np.array([[0.5, 0.5], [0.5, 0.5]]), model_id=0)
        result = highlight(doc, model, vocabulary,
                           theta_row=np.array([0.5, 0.5]))
        surfaces = {
            doc.raw_text.encode()[s.start:s.end].decode() for s in result.spans
        }
        assert surfaces == {"apple", "cherry"}

    def test_out_of_vocabulary_tokens_skipped(self, highlight_setup):
        documents, _, _, _ = highlight_setup
        narrow = Vocabulary(["apple"])
        model = TopicModel(phi=np.array([[1.0], [1.0]]) / 1.0, model_id=0)
        # Model rows over a single term are trivially 1.0 each.
        result = highlight(documents[0], model, narrow,
                           theta_row=np.array([0.5, 0.5]))
        assert all(
            documents[0].raw_text.encode()[s.start:s.end].decode() == "apple"
            for s in result.spans
        )
        assert len(result.spans) == 2  # "apple banana apple cherry"

    def test_spans_within_bounds_and_disjoint(self, highlight_setup):
        documents, vocabulary, model, theta_row = highlight_setup
        for document in documents:
            result = highlight(document, model, vocabulary, theta_row=theta_row)
            total = len(document.raw_text.encode())
            previous_end = 0
            for span in result.spans:
                assert 0 <= span.start < span.end <= total
                assert span.start >= previous_end
                previous_end = span.end

    def test_byte_offsets_with_multibyte_text(self):
        text = "café äther café"
        config = PreprocessingConfig()
        from topicuq.corpus import Document

        doc = Document(id="m", title="m", raw_text=text,
                       tokens=tokenize(text, config))
        vocabulary = Vocabulary(["café", "äther"])
        model = TopicModel(phi=np.array([[0.7, 0.3], [0.2, 0.8]]), model_id=0)
        result = highlight(doc, model, vocabulary,
                           theta_row=np.array([0.5, 0.5]))
        raw = text.encode()
        assert [raw[s.start:s.end].decode() for s in result.spans] == [
            "café", "äther", "café"
        ]

    def test_tie_breaks_toward_lower_topic(self):
        text = "alpha"
        config = PreprocessingConfig()
        from topicuq.corpus import Document

        doc = Document(id="t", title="t", raw_text=text,
                       tokens=tokenize(text, config))
        vocabulary = Vocabulary(["alpha", "beta"])
        model = TopicModel(phi=np.array([[0.5, 0.5], [0.5, 0.5]]), model_id=0)
        result = highlight(doc, model, vocabulary,
                           theta_row=np.array([0.5, 0.5]))
        assert result.spans[0].topic == 0

    def test_argmax_invariant_under_mixture_rescaling(self, highlight_setup):
        documents, vocabulary, model, theta_row = highlight_setup
        doc = documents[0]
        base = highlight(doc, model, vocabulary, theta_row=theta_row)
        scaled = highlight(doc, model, vocabulary, theta_row=theta_row * 7.5)
        assert base.spans == scaled.spans

    def test_color_cycles_over_palette(self):
        text = "alpha"
        config = PreprocessingConfig()
        from topicuq.corpus import Document

        doc = Document(id="c", title="c", raw_text=text,
                       tokens=tokenize(text, config))
        vocabulary = Vocabulary(["alpha"])
        k = DEFAULT_PALETTE_SIZE + 3
        phi = np.full((k, 1), 1.0)
        model = TopicModel(phi=phi, model_id=0)
        theta_row = np.zeros(k)
        theta_row[DEFAULT_PALETTE_SIZE + 1] = 1.0
        result = highlight(doc, model, vocabulary, theta_row=theta_row)
        span = result.spans[0]
        assert span.topic == DEFAULT_PALETTE_SIZE + 1
        assert span.color == 1

    def test_contextual_without_mixture_is_capability_error(self, highlight_setup):
        documents, vocabulary, model, _ = highlight_setup
        with pytest.raises(CapabilityError, match="global"):
            highlight(documents[0], model, vocabulary)

    def test_wrong_mixture_shape_rejected(self, highlight_setup):
        documents, vocabulary, model, _ = highlight_setup
        with pytest.raises(ValueError, match="theta row"):
            highlight(documents[0], model, vocabulary,
                      theta_row=np.array([0.2, 0.3, 0.5]))

    def test_vocabulary_mismatch_rejected(self, highlight_setup):
        documents, _, model, theta_row = highlight_setup
        with pytest.raises(ValueError, match="vocabulary"):
            highlight(documents[0], model, Vocabulary(["only-one"]),
                      theta_row=theta_row)

    def test_unknown_rule_rejected(self, highlight_setup):
        documents, vocabulary, model, theta_row = highlight_setup
        with pytest.raises(ValueError, match="rule"):
            highlight(documents[0], model, vocabulary,
                      theta_row=theta_row, rule="rainbow")

    def test_span_dataclass_is_plain_data(self):
        span = HighlightSpan(start=0, end=5, topic=3, color=3)
        assert (span.start, span.end, span.topic, span.color) == (0, 5, 3, 3)
