"""Single-model LDA training via collapsed Gibbs sampling.

The sampler integrates out the topic-term and document-topic distributions
and resamples each token's topic assignment from the conditional counts:

    p(z = t) ~ (n_dt[d, t] + alpha) * (n_tw[t, w] + beta) / (n_t[t] + V * beta)

with all counts excluding the token being resampled.  After the final sweep
the point estimates are read off the counts:

    phi[t, w]   = (n_tw[t, w] + beta) / (n_t[t] + V * beta)
    theta[d, t] = (n_dt[d, t] + alpha) / (n_d[d] + k * alpha)

Randomness comes from an explicit splitmix64 generator (Steele et al.,
"Fast splittable pseudorandom number generators"), so a (matrix, config)
pair maps to a bit-identical model on every run.  Tokens are replayed from
the count matrix in document-major, term-id-ascending order; the original
surface order is not recoverable from counts and does not affect the
stationary distribution.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit
from scipy import sparse
from sklearn.base import BaseEstimator

from .corpus import DocTermMatrix

__all__ = ["LdaConfig", "TopicModel", "GibbsLda", "train", "log_likelihood"]

DEFAULT_BETA = 0.01
DEFAULT_ITERATIONS = 10_000


@dataclass(frozen=True)
class LdaConfig:
    """Hyperparameters of one training run.

    ``alpha=None`` resolves to the 5/k default; ``beta`` defaults to 0.01.
    """

    k: int
    alpha: Optional[float] = None
    beta: float = DEFAULT_BETA
    iterations: int = DEFAULT_ITERATIONS
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.alpha is None:
            object.__setattr__(self, "alpha", 5.0 / self.k)
        if self.alpha <= 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if self.beta <= 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")


@dataclass
class TopicModel:
    """Point estimate of one LDA run.

    ``phi`` has one row per topic (a distribution over vocabulary terms),
    ``theta`` one row per document (a distribution over topics).  ``theta``
    and ``config`` may be absent for models imported from external tool
    output that lacks them.
    """

    phi: np.ndarray
    theta: Optional[np.ndarray] = None
    config: Optional[LdaConfig] = None
    model_id: int = 0

    @property
    def k(self) -> int:
        return self.phi.shape[0]

    @property
    def n_terms(self) -> int:
        return self.phi.shape[1]

    def validate(self, tol: float = 1e-9) -> None:
        if np.any(self.phi < 0):
            raise ValueError("phi has negative entries")
        if np.any(np.abs(self.phi.sum(axis=1) - 1.0) > tol):
            raise ValueError("phi rows do not sum to 1")
        if self.theta is not None:
            if np.any(self.theta < 0):
                raise ValueError("theta has negative entries")
            if self.theta.shape[1] != self.k:
                raise ValueError("theta column count does not match k")
            if np.any(np.abs(self.theta.sum(axis=1) - 1.0) > tol):
                raise ValueError("theta rows do not sum to 1")

    def top_term_ids(self, topic_index: int, n: int) -> np.ndarray:
        """Ids of the ``n`` highest-probability terms, ties toward lower id."""
        row = self.phi[topic_index]
        return np.argsort(-row, kind="stable")[:n]

    def to_json_dict(self, vocabulary_hash: str) -> dict:
        out = {
            "model_id": self.model_id,
            "vocabulary_sha256": vocabulary_hash,
            "config": None,
            "phi": [[float(x) for x in row] for row in self.phi],
            "theta": None
            if self.theta is None
            else [[float(x) for x in row] for row in self.theta],
        }
        if self.config is not None:
            out["config"] = {
                "k": self.config.k,
                "alpha": self.config.alpha,
                "beta": self.config.beta,
                "iterations": self.config.iterations,
                "seed": self.config.seed,
            }
        return out

    @classmethod
    def from_json_dict(cls, obj: dict) -> "TopicModel":
        config = None
        if obj.get("config") is not None:
            c = obj["config"]
            config = LdaConfig(
                k=c["k"], alpha=c["alpha"], beta=c["beta"],
                iterations=c["iterations"], seed=c["seed"],
            )
        theta = None if obj.get("theta") is None else np.asarray(obj["theta"], dtype=np.float64)
        return cls(
            phi=np.asarray(obj["phi"], dtype=np.float64),
            theta=theta,
            config=config,
            model_id=obj.get("model_id", 0),
        )


# ---------------------------------------------------------------------------
# Sampler kernel
# ---------------------------------------------------------------------------

_SM64_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_SM64_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_SM64_MIX2 = np.uint64(0x94D049BB133111EB)


@njit(cache=True, nogil=True)
def _sm64_next(state):
    """One splitmix64 step; returns (new_state, uniform double in [0, 1))."""
    state = state + _SM64_GAMMA
    z = state
    z = (z ^ (z >> np.uint64(30))) * _SM64_MIX1
    z = (z ^ (z >> np.uint64(27))) * _SM64_MIX2
    z = z ^ (z >> np.uint64(31))
    return state, (z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, nogil=True)
def _gibbs_kernel(doc_of, word_of, k, n_terms, n_docs, alpha, beta,
                  iterations, seed, check_counts):
    n_tokens = doc_of.size
    n_dt = np.zeros((n_docs, k), dtype=np.int64)
    n_tw = np.zeros((k, n_terms), dtype=np.int64)
    n_t = np.zeros(k, dtype=np.int64)
    n_d = np.zeros(n_docs, dtype=np.int64)
    z = np.empty(n_tokens, dtype=np.int64)
    state = np.uint64(seed)

    for i in range(n_tokens):
        state, u = _sm64_next(state)
        t = min(int(u * k), k - 1)
        z[i] = t
        n_dt[doc_of[i], t] += 1
        n_tw[t, word_of[i]] += 1
        n_t[t] += 1
        n_d[doc_of[i]] += 1

    v_beta = n_terms * beta
    p = np.empty(k, dtype=np.float64)
    for _sweep in range(iterations):
        for i in range(n_tokens):
            d = doc_of[i]
            w = word_of[i]
            t = z[i]
            n_dt[d, t] -= 1
            n_tw[t, w] -= 1
            n_t[t] -= 1

            total = 0.0
            for tt in range(k):
                val = (n_dt[d, tt] + alpha) * (n_tw[tt, w] + beta) / (n_t[tt] + v_beta)
                p[tt] = val
                total += val
            state, u = _sm64_next(state)
            r = u * total
            acc = 0.0
            new_t = k - 1
            for tt in range(k):
                acc += p[tt]
                if r < acc:
                    new_t = tt
                    break

            z[i] = new_t
            n_dt[d, new_t] += 1
            n_tw[new_t, w] += 1
            n_t[new_t] += 1

        if check_counts:
            for d in range(n_docs):
                s = 0
                for tt in range(k):
                    s += n_dt[d, tt]
                if s != n_d[d]:
                    raise ValueError("count conservation violated: document-topic counts")
            for tt in range(k):
                s = 0
                for w in range(n_terms):
                    s += n_tw[tt, w]
                if s != n_t[tt]:
                    raise ValueError("count conservation violated: topic-term counts")

    return n_dt, n_tw, n_t, n_d


def _expand_tokens(counts: sparse.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    """Replay the count matrix as (doc, term) token streams, document-major."""
    coo = counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    reps = coo.data[order].astype(np.int64)
    doc_of = np.repeat(coo.row[order].astype(np.int64), reps)
    word_of = np.repeat(coo.col[order].astype(np.int64), reps)
    return doc_of, word_of


class GibbsLda(BaseEstimator):
    """Collapsed Gibbs sampling LDA with a deterministic seeded RNG.

    Parameters
    ----------
    n_topics : number of topics k.
    alpha : document-topic Dirichlet concentration; None means 5 / n_topics.
    beta : topic-term Dirichlet concentration.
    n_iter : full Gibbs sweeps over the corpus.
    seed : 64-bit RNG seed; same seed and input give a bit-identical fit.
    check_counts : verify count-conservation invariants after every sweep
        (debug mode; slows training).

    Attributes after ``fit``: ``phi_`` (n_topics, n_terms), ``theta_``
    (n_docs, n_topics), ``n_tokens_``.
    """

    def __init__(self, n_topics: int = 10, alpha: Optional[float] = None,
                 beta: float = DEFAULT_BETA, n_iter: int = DEFAULT_ITERATIONS,
                 seed: int = 0, check_counts: bool = False):
        self.n_topics = n_topics
        self.alpha = alpha
        self.beta = beta
        self.n_iter = n_iter
        self.seed = seed
        self.check_counts = check_counts

    def _config(self) -> LdaConfig:
        return LdaConfig(k=self.n_topics, alpha=self.alpha, beta=self.beta,
                         iterations=self.n_iter, seed=self.seed)

    def fit(self, X, y=None):
        """Run the sampler on a (n_docs, n_terms) nonnegative count matrix."""
        config = self._config()
        if sparse.issparse(X):
            counts = X.tocsr().astype(np.int64)
        else:
            arr = np.asarray(X)
            if np.any(arr < 0):
                raise ValueError("count matrix has negative entries")
            counts = sparse.csr_matrix(arr.astype(np.int64))
        if counts.nnz and counts.data.min() < 0:
            raise ValueError("count matrix has negative entries")
        n_docs, n_terms = counts.shape
        if counts.sum() == 0:
            raise ValueError("count matrix has zero retained tokens")

        doc_of, word_of = _expand_tokens(counts)
        n_dt, n_tw, n_t, n_d = _gibbs_kernel(
            doc_of, word_of, config.k, n_terms, n_docs,
            float(config.alpha), float(config.beta),
            int(config.iterations), np.uint64(config.seed % (1 << 64)),
            bool(self.check_counts),
        )
        self.phi_ = (n_tw + config.beta) / (n_t[:, None] + n_terms * config.beta)
        self.theta_ = (n_dt + config.alpha) / (n_d[:, None] + config.k * config.alpha)
        self.n_tokens_ = int(doc_of.size)
        self.n_features_in_ = n_terms
        return self

    def fit_transform(self, X, y=None) -> np.ndarray:
        """Fit and return the per-document topic distributions."""
        return self.fit(X).theta_

    def to_topic_model(self, model_id: int = 0) -> TopicModel:
        if not hasattr(self, "phi_"):
            raise ValueError("estimator is not fitted")
        return TopicModel(phi=self.phi_, theta=self.theta_,
                          config=self._config(), model_id=model_id)


def train(matrix: DocTermMatrix, config: LdaConfig, model_id: int = 0,
          check_counts: bool = False) -> TopicModel:
    """Train one topic model from a document-term matrix."""
    est = GibbsLda(n_topics=config.k, alpha=config.alpha, beta=config.beta,
                   n_iter=config.iterations, seed=config.seed,
                   check_counts=check_counts)
    est.fit(matrix.counts)
    return est.to_topic_model(model_id=model_id)


def log_likelihood(model: TopicModel, matrix: DocTermMatrix) -> float:
    """Corpus log likelihood sum(count * log(theta_d . phi_:,w)).

    Finite for any smoothed model; a convergence diagnostic, not part of the
    sampler itself.
    """
    if model.theta is None:
        raise ValueError("model has no document-topic distributions")
    if model.n_terms != matrix.n_terms or model.theta.shape[0] != matrix.n_docs:
        raise ValueError(
            f"dimension mismatch: model ({model.theta.shape[0]} docs, "
            f"{model.n_terms} terms) vs matrix ({matrix.n_docs} docs, "
            f"{matrix.n_terms} terms)"
        )
    coo = matrix.counts.tocoo()
    probs = np.einsum("ij,ji->i", model.theta[coo.row], model.phi[:, coo.col])
    return float(np.sum(coo.data * np.log(probs)))
