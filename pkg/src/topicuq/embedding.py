"""2D topic-overview layout: exact t-SNE over a precomputed distance matrix.

Distances come from the pairwise topic similarity matrix via d = 1 - S.
The implementation is the classic exact O(n^2) algorithm: per-row Gaussian
bandwidths found by bisection to hit a target perplexity, symmetrized joint
probabilities, Student-t low-dimensional affinities, and gradient descent
with momentum, adaptive gains, and early exaggeration.  Ensembles here are
a few hundred topics, so exactness beats Barnes-Hut speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .ensemble import TopicRef
from .metrics import SimilarityMatrix
from .validation import check_distance_matrix

__all__ = [
    "EmbeddingConfig",
    "Embedding",
    "similarity_to_distance",
    "conditional_probabilities",
    "joint_probabilities",
    "kl_objective",
    "kl_gradient",
    "tsne",
    "embed_similarity",
    "SimilarityTsne",
    "write_embedding_csv",
]

_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class EmbeddingConfig:
    """t-SNE hyperparameters; defaults follow the reference implementation."""

    perplexity: float = 30.0
    iterations: int = 1000
    learning_rate: float = 200.0
    early_exaggeration: float = 12.0
    exaggeration_iterations: int = 250
    initial_momentum: float = 0.5
    final_momentum: float = 0.8
    momentum_switch_iteration: int = 250
    seed: int = 0

    def __post_init__(self):
        if self.perplexity <= 0:
            raise ValueError(f"perplexity must be positive, got {self.perplexity}")
        if self.iterations <= 0:
            raise ValueError(f"iterations must be positive, got {self.iterations}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.early_exaggeration <= 0:
            raise ValueError(
                f"early_exaggeration must be positive, got {self.early_exaggeration}"
            )
        if self.exaggeration_iterations < 0 or self.momentum_switch_iteration < 0:
            raise ValueError("iteration switch points must be nonnegative")
        if not 0 < self.initial_momentum < 1 or not 0 < self.final_momentum < 1:
            raise ValueError("momentum values must lie in (0, 1)")


@dataclass(frozen=True)
class Embedding:
    """Final layout: one 2D coordinate per topic, plus the achieved loss."""

    refs: Optional[tuple[TopicRef, ...]]
    coords: np.ndarray
    final_kl: float

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError(f"coords must be (n, 2), got {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coords contain non-finite values")
        if self.refs is not None and len(self.refs) != coords.shape[0]:
            raise ValueError(
                f"{len(self.refs)} refs for {coords.shape[0]} coordinate rows"
            )
        object.__setattr__(self, "coords", coords)


def similarity_to_distance(sim: SimilarityMatrix) -> np.ndarray:
    """d_ij = 1 - S_ij; zero diagonal, symmetric."""
    d = 1.0 - sim.values
    np.fill_diagonal(d, 0.0)
    return d


def conditional_probabilities(
    distances: np.ndarray,
    perplexity: float,
    tol: float = 1e-5,
    max_steps: int = 50,
) -> np.ndarray:
    """Row-stochastic conditional P with per-row bandwidth search.

    For each row a precision beta is bisected until the entropy H of
    p_{j|i} = exp(-beta * d_ij^2) / sum matches log2(perplexity) within
    ``tol`` (so 2^H = perplexity), capped at ``max_steps`` steps.
    """
    d = check_distance_matrix(distances, "distances")
    n = d.shape[0]
    if not perplexity < (n - 1) / 3:
        raise ValueError(
            f"perplexity {perplexity} too large for {n} points; "
            f"needs perplexity < {(n - 1) / 3}"
        )
    d2 = d * d
    target = math.log2(perplexity)

    beta = np.ones(n)
    beta_min = np.full(n, -np.inf)
    beta_max = np.full(n, np.inf)
    off_diag = ~np.eye(n, dtype=bool)
    P = np.zeros((n, n))
    active = np.ones(n, dtype=bool)
    for _ in range(max_steps):
        W = np.exp(-beta[:, None] * d2)
        W[~off_diag] = 0.0
        sums = W.sum(axis=1)
        safe = sums > 0
        P = np.where(safe[:, None], W / np.where(safe, sums, 1.0)[:, None], 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(P > 0, P * np.log2(P), 0.0)
        H = -plogp.sum(axis=1)
        diff = H - target
        active = np.abs(diff) > tol
        if not active.any():
            break
        too_high = active & (diff > 0)
        too_low = active & ~too_high
        beta_min[too_high] = beta[too_high]
        beta_max[too_low] = beta[too_low]
        grow = too_high & ~np.isfinite(beta_max)
        shrink = too_low & ~np.isfinite(beta_min)
        mid = active & ~grow & ~shrink
        beta[grow] *= 2.0
        beta[shrink] /= 2.0
        beta[mid] = 0.5 * (beta_min[mid] + beta_max[mid])
    return P


def joint_probabilities(conditional: np.ndarray) -> np.ndarray:
    """Symmetrized joint P: (P + P^T) / 2n, floored at machine epsilon."""
    p = np.asarray(conditional, dtype=np.float64)
    n = p.shape[0]
    joint = (p + p.T) / (2.0 * n)
    return np.maximum(joint, _EPS)


def _student_t_weights(coords: np.ndarray) -> np.ndarray:
    """w_ij = 1 / (1 + ||y_i - y_j||^2) with zero diagonal."""
    sq = np.sum(coords ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * coords @ coords.T
    w = 1.0 / (1.0 + np.maximum(d2, 0.0))
    np.fill_diagonal(w, 0.0)
    return w


def kl_objective(P: np.ndarray, coords: np.ndarray) -> float:
    """Kullback-Leibler loss sum_{i != j} p_ij ln(p_ij / q_ij)."""
    w = _student_t_weights(np.asarray(coords, dtype=np.float64))
    Q = np.maximum(w / w.sum(), _EPS)
    mask = ~np.eye(P.shape[0], dtype=bool)
    p = P[mask]
    q = Q[mask]
    return float(np.sum(np.where(p > 0, p * np.log(np.maximum(p, _EPS) / q), 0.0)))


def kl_gradient(P: np.ndarray, coords: np.ndarray) -> tuple[float, np.ndarray]:
    """Loss and its analytic gradient 4 * sum_j (p-q) w (y_i - y_j)."""
    coords = np.asarray(coords, dtype=np.float64)
    w = _student_t_weights(coords)
    Q = np.maximum(w / w.sum(), _EPS)
    PQw = (P - Q) * w
    grad = 4.0 * (np.diag(PQw.sum(axis=1)) - PQw) @ coords
    mask = ~np.eye(P.shape[0], dtype=bool)
    p = P[mask]
    q = Q[mask]
    kl = float(np.sum(np.where(p > 0, p * np.log(np.maximum(p, _EPS) / q), 0.0)))
    return kl, grad


def tsne(
    distances: np.ndarray,
    config: EmbeddingConfig = EmbeddingConfig(),
    refs: Optional[Sequence[TopicRef]] = None,
) -> Embedding:
    """Run exact t-SNE on a precomputed distance matrix.

    Gradient descent uses adaptive per-component gains, momentum that
    switches from ``initial_momentum`` to ``final_momentum``, and early
    exaggeration of P for the first ``exaggeration_iterations`` steps.
    Coordinates are mean-centered each step, so output is
    translation-normalized; fixed seeds reproduce bit-identical layouts.
    """
    d = check_distance_matrix(distances, "distances")
    n = d.shape[0]
    if n < 4:
        raise ValueError(f"t-SNE needs at least 4 points, got {n}")
    cond = conditional_probabilities(d, config.perplexity)
    P = joint_probabilities(cond)

    rng = np.random.default_rng(config.seed)
    Y = rng.standard_normal((n, 2)) * 1e-4
    velocity = np.zeros_like(Y)
    gains = np.ones_like(Y)

    P_run = P * config.early_exaggeration
    for it in range(config.iterations):
        if it == config.exaggeration_iterations:
            P_run = P
        momentum = (
            config.initial_momentum
            if it < config.momentum_switch_iteration
            else config.final_momentum
        )
        _, grad = kl_gradient(P_run, Y)
        same_sign = (grad > 0) == (velocity > 0)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.clip(gains, 0.01, None, out=gains)
        velocity = momentum * velocity - config.learning_rate * (gains * grad)
        Y = Y + velocity
        Y = Y - Y.mean(axis=0)

    final_kl = kl_objective(P, Y)
    return Embedding(refs=tuple(refs) if refs is not None else None,
                     coords=Y, final_kl=final_kl)


def embed_similarity(sim: SimilarityMatrix,
                     config: EmbeddingConfig = EmbeddingConfig()) -> Embedding:
    """Convenience wrapper: similarity matrix -> distances -> layout."""
    return tsne(similarity_to_distance(sim), config, refs=sim.refs)


class SimilarityTsne(BaseEstimator):
    """Estimator-style wrapper around :func:`tsne` for precomputed distances.

    Parameters mirror EmbeddingConfig.  After ``fit``, the layout is in
    ``embedding_`` and the achieved loss in ``kl_divergence_``.
    """

    def __init__(self, perplexity=30.0, n_iter=1000, learning_rate=200.0,
                 early_exaggeration=12.0, seed=0):
        self.perplexity = perplexity
        self.n_iter = n_iter
        self.learning_rate = learning_rate
        self.early_exaggeration = early_exaggeration
        self.seed = seed

    def _config(self) -> EmbeddingConfig:
        return EmbeddingConfig(
            perplexity=self.perplexity,
            iterations=self.n_iter,
            learning_rate=self.learning_rate,
            early_exaggeration=self.early_exaggeration,
            seed=self.seed,
        )

    def fit(self, X, y=None):
        result = tsne(X, self._config())
        self.embedding_ = result.coords
        self.kl_divergence_ = result.final_kl
        self.n_features_in_ = np.asarray(X).shape[1]
        return self

    def fit_transform(self, X, y=None):
        self.fit(X)
        return self.embedding_


def write_embedding_csv(embedding: Embedding, path) -> None:
    """CSV export: model_index, topic_index, x, y."""
    if embedding.refs is None:
        raise ValueError("embedding has no topic refs to export")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("model_index,topic_index,x,y\n")
        for ref, (x, y) in zip(embedding.refs, embedding.coords):
            fh.write(f"{ref.model_index},{ref.topic_index},{float(x)!r},{float(y)!r}\n")
