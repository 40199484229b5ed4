"""Shared fixtures: hand-set toy ensembles and one trained synthetic project.

The toy ensemble has phi values chosen by hand so metric expectations can
be computed on paper; the session-scoped project runs the real pipeline
once at small scale and backs the docview, project, and server tests.
"""

import numpy as np
import pytest

from topicuq.corpus import Document, PreprocessingConfig, Vocabulary, build_matrix, tokenize
from topicuq.ensemble import Ensemble, preset, generate
from topicuq.lda import TopicModel
from topicuq.project import assemble_project
from topicuq.synthbench import SyntheticSpec, generate_corpus


def make_documents(texts: dict[str, str]) -> list[Document]:
    config = PreprocessingConfig()
    return [
        Document(id=doc_id, title=doc_id, raw_text=text,
                 tokens=tokenize(text, config))
        for doc_id, text in texts.items()
    ]


@pytest.fixture
def tiny_documents() -> list[Document]:
    return make_documents(
        {
            "a": "apple banana apple cherry",
            "b": "banana banana date",
            "c": "cherry date apple",
            "d": "elder fig elder",
        }
    )


@pytest.fixture
def toy_ensemble() -> Ensemble:
    """Three members, two topics each, over a four-term vocabulary.

    Member 0 and member 1 share near-identical topics (one concentrated on
    the first two terms, one on the last two); member 2's second topic is
    an even mixture, making its match ambiguous by construction.
    """
    vocabulary = Vocabulary(["alpha", "beta", "gamma", "delta"])
    phi_0 = np.array([[0.9, 0.1, 0.0, 0.0], [0.0, 0.0, 0.1, 0.9]])
    phi_1 = np.array([[0.85, 0.15, 0.0, 0.0], [0.0, 0.05, 0.15, 0.8]])
    phi_2 = np.array([[0.8, 0.2, 0.0, 0.0], [0.25, 0.25, 0.25, 0.25]])
    theta = np.array([[0.75, 0.25], [0.5, 0.5]])
    members = [
        TopicModel(phi=phi, theta=theta.copy(), model_id=i)
        for i, phi in enumerate([phi_0, phi_1, phi_2])
    ]
    return Ensemble(members=members, spec=None, vocabulary=vocabulary,
                    doc_ids=["a", "b"])


@pytest.fixture(scope="session")
def synth_corpus():
    spec = SyntheticSpec(true_k=4, vocab_size=60, n_docs=24, doc_length=80,
                         separation=0.9, seed=11)
    return generate_corpus(spec)


@pytest.fixture(scope="session")
def synth_project(synth_corpus):
    vocabulary, matrix = build_matrix(synth_corpus.documents)
    spec = preset("E1", k=5, members=4, iterations=200, base_seed=5)
    ensemble = generate(matrix, spec, vocabulary)
    return assemble_project("fixture", ensemble, documents=synth_corpus.documents)
