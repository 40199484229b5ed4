"""Topic similarity and per-topic uncertainty measures over a model ensemble.

Two uncertainty measures are computed for every topic of every ensemble
member, both in [0, 1]:

* matching uncertainty ``u_match``: how ambiguously the topic matches the
  topics of each other member.  The row of pairwise cosine similarities
  against one other member is normalized into a match distribution; its
  divergence from the one-hot (certain) and uniform (maximally ambiguous)
  reference distributions yields a pairwise value, averaged over all other
  members.
* existence uncertainty ``u_exist``: one minus the average, over all other
  members, of the best cosine similarity the topic achieves there.  Low when
  a near-duplicate exists in every member.

All divergences use the natural logarithm; ``u_match`` is a ratio of two
divergences so the base cancels.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .ensemble import Ensemble, TopicRef
from .validation import check_probability_vector, check_square_symmetric

__all__ = [
    "DegenerateMatchError",
    "InfiniteDivergenceError",
    "SimilarityMatrix",
    "MatchDistribution",
    "UncertaintyRecord",
    "cosine_similarity",
    "kl_divergence",
    "js_divergence",
    "match_distribution",
    "matching_uncertainty_pair",
    "matching_uncertainty",
    "existence_uncertainty",
    "compute_all",
    "write_similarity_binary",
    "read_similarity_binary",
    "write_similarity_csv",
    "write_uncertainty_csv",
]

SIMILARITY_MAGIC = b"TUQSIM01"


class InfiniteDivergenceError(ValueError):
    """KL divergence is infinite: a has mass where b has none."""


class DegenerateMatchError(ValueError):
    """Every pairwise similarity against the target model is zero."""


@dataclass(frozen=True)
class SimilarityMatrix:
    """Pairwise cosine similarities between all topics of an ensemble.

    ``refs`` orders the rows/columns; ``values`` is symmetric, in [0, 1],
    with a unit diagonal.  ``model_offsets[l]`` is the row of the first topic
    of member ``l``.
    """

    refs: tuple[TopicRef, ...]
    values: np.ndarray
    model_offsets: tuple[int, ...]
    model_sizes: tuple[int, ...]

    def index_of(self, ref: TopicRef) -> int:
        if ref.model_index < 0 or ref.model_index >= len(self.model_sizes):
            raise KeyError(f"unknown model index {ref.model_index}")
        if ref.topic_index < 0 or ref.topic_index >= self.model_sizes[ref.model_index]:
            raise KeyError(f"unknown topic {ref.topic_index} in model {ref.model_index}")
        return self.model_offsets[ref.model_index] + ref.topic_index

    def block(self, row: int, model_index: int) -> np.ndarray:
        """Similarities of topic ``row`` against all topics of one member."""
        off = self.model_offsets[model_index]
        return self.values[row, off : off + self.model_sizes[model_index]]


@dataclass(frozen=True)
class MatchDistribution:
    """Normalized similarity row of one topic against one target member."""

    source: TopicRef
    target_model: int
    s: np.ndarray

    def __post_init__(self):
        check_probability_vector(self.s, name="match distribution", tol=1e-12)


@dataclass(frozen=True)
class UncertaintyRecord:
    ref: TopicRef
    u_match: float
    u_exist: float

    def __post_init__(self):
        for name, value in (("u_match", self.u_match), ("u_exist", self.u_exist)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value!r} outside [0, 1]")


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two nonnegative vectors, in [0, 1].

    Raises ``ValueError`` on dimension mismatch or a zero vector.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = np.sqrt(np.dot(a, a))
    nb = np.sqrt(np.dot(b, b))
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for a zero vector")
    if np.array_equal(a, b):
        # Identical vectors have cosine 1 by definition; the quotient below
        # can land one ulp short of it.
        return 1.0
    return float(min(1.0, max(0.0, np.dot(a, b) / (na * nb))))


def kl_divergence(a, b) -> float:
    """Kullback-Leibler divergence sum(a * log(a / b)), natural log.

    Uses the convention 0 * log 0 = 0.  Raises ``InfiniteDivergenceError``
    where ``a`` has mass but ``b`` does not.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    support = a > 0.0
    if np.any(b[support] == 0.0):
        raise InfiniteDivergenceError("a has mass where b is zero")
    av = a[support]
    return float(np.sum(av * np.log(av / b[support])))


def js_divergence(a, b) -> float:
    """Jensen-Shannon divergence: symmetric, in [0, ln 2]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    m = 0.5 * (a + b)
    return 0.5 * kl_divergence(a, m) + 0.5 * kl_divergence(b, m)


def match_distribution(
    ref: TopicRef, target_model: int, ensemble: Ensemble, sim: SimilarityMatrix
) -> MatchDistribution:
    """Normalize one topic's similarities against a target member into a
    probability vector.

    Raises ``DegenerateMatchError`` when every similarity is zero (the topic
    shares no support with the entire target model); batch callers map that
    case to maximal matching uncertainty.
    """
    if target_model == ref.model_index:
        raise ValueError("target model must differ from the topic's own model")
    row = sim.index_of(ref)
    sims = sim.block(row, target_model)
    total = sims.sum()
    if total == 0.0:
        raise DegenerateMatchError(
            f"topic {ref} has zero similarity to every topic of model {target_model}"
        )
    return MatchDistribution(source=ref, target_model=target_model, s=sims / total)


def _pair_uncertainty_from_sims(sims: np.ndarray) -> float:
    """Pairwise matching uncertainty from one raw similarity block.

    1 - KL(s || s_max) / KL(s_min || s_max) where s is the normalized block,
    s_max is uniform and s_min is one-hot.  The denominator equals ln k.
    A one-topic target matches trivially (0); an all-zero block means no
    match can be found at all (1).
    """
    k = sims.size
    if k == 1:
        return 0.0
    total = sims.sum()
    if total == 0.0:
        return 1.0
    s = sims / total
    uniform = np.full(k, 1.0 / k)
    u = 1.0 - kl_divergence(s, uniform) / np.log(k)
    return float(min(1.0, max(0.0, u)))


def matching_uncertainty_pair(s: MatchDistribution) -> float:
    """Matching uncertainty of one topic against one target member, in [0, 1].

    0 for a one-hot match distribution, 1 for a uniform one.
    """
    k = s.s.size
    if k == 1:
        return 0.0
    uniform = np.full(k, 1.0 / k)
    u = 1.0 - kl_divergence(s.s, uniform) / np.log(k)
    return float(min(1.0, max(0.0, u)))


def matching_uncertainty(ref: TopicRef, ensemble: Ensemble, sim: SimilarityMatrix) -> float:
    """Mean pairwise matching uncertainty over all other ensemble members."""
    n_members = len(ensemble.members)
    if n_members < 2:
        raise ValueError("matching uncertainty requires at least 2 ensemble members")
    row = sim.index_of(ref)
    values = [
        _pair_uncertainty_from_sims(sim.block(row, l))
        for l in range(n_members)
        if l != ref.model_index
    ]
    return float(np.mean(values))


def existence_uncertainty(ref: TopicRef, ensemble: Ensemble, sim: SimilarityMatrix) -> float:
    """One minus the average best similarity in every other member."""
    n_members = len(ensemble.members)
    if n_members < 2:
        raise ValueError("existence uncertainty requires at least 2 ensemble members")
    row = sim.index_of(ref)
    best = [
        float(sim.block(row, l).max())
        for l in range(n_members)
        if l != ref.model_index
    ]
    u = 1.0 - float(np.mean(best))
    return float(min(1.0, max(0.0, u)))


def similarity_matrix(ensemble: Ensemble) -> SimilarityMatrix:
    """Full pairwise cosine similarity matrix over all topics."""
    phi = np.vstack([m.phi for m in ensemble.members])
    norms = np.sqrt((phi * phi).sum(axis=1))
    if np.any(norms == 0.0):
        raise ValueError("ensemble contains an all-zero topic distribution")
    values = (phi @ phi.T) / np.outer(norms, norms)
    values = 0.5 * (values + values.T)
    np.clip(values, 0.0, 1.0, out=values)
    np.fill_diagonal(values, 1.0)
    sizes = tuple(m.k for m in ensemble.members)
    offsets = tuple(int(x) for x in np.concatenate(([0], np.cumsum(sizes)[:-1])))
    return SimilarityMatrix(
        refs=tuple(ensemble.topic_refs()),
        values=values,
        model_offsets=offsets,
        model_sizes=sizes,
    )


def compute_all(ensemble: Ensemble) -> tuple[SimilarityMatrix, list[UncertaintyRecord]]:
    """Similarity matrix plus one uncertainty record per topic.

    Pure function of the ensemble; record order follows ``ensemble.topic_refs()``.
    """
    sim = similarity_matrix(ensemble)
    n_members = len(ensemble.members)
    if n_members < 2:
        raise ValueError("uncertainty measures require at least 2 ensemble members")
    records = []
    for row, ref in enumerate(sim.refs):
        pair_values = []
        best_sims = []
        for l in range(n_members):
            if l == ref.model_index:
                continue
            block = sim.block(row, l)
            pair_values.append(_pair_uncertainty_from_sims(block))
            best_sims.append(float(block.max()))
        u_match = float(np.mean(pair_values))
        u_exist = float(min(1.0, max(0.0, 1.0 - np.mean(best_sims))))
        records.append(UncertaintyRecord(ref=ref, u_match=u_match, u_exist=u_exist))
    return sim, records


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def write_similarity_binary(sim: SimilarityMatrix, path) -> None:
    """Write the similarity values as little-endian float64.

    Layout: 8-byte magic ``TUQSIM01``, uint64 little-endian dimension n,
    then n*n float64 values row-major.
    """
    n = sim.values.shape[0]
    with open(path, "wb") as fh:
        fh.write(SIMILARITY_MAGIC)
        fh.write(struct.pack("<Q", n))
        fh.write(np.ascontiguousarray(sim.values, dtype="<f8").tobytes())


def read_similarity_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != SIMILARITY_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        (n,) = struct.unpack("<Q", fh.read(8))
        data = np.frombuffer(fh.read(8 * n * n), dtype="<f8")
        if data.size != n * n:
            raise ValueError(f"{path}: truncated similarity payload")
    values = data.reshape(n, n).astype(np.float64)
    return check_square_symmetric(values, name="similarity matrix")


def write_similarity_csv(sim: SimilarityMatrix, path) -> None:
    header = ",".join(f"{r.model_index}:{r.topic_index}" for r in sim.refs)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in sim.values:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def write_uncertainty_csv(records: list[UncertaintyRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("model_index,topic_index,u_match,u_exist\n")
        for rec in records:
            fh.write(
                f"{rec.ref.model_index},{rec.ref.topic_index},"
                f"{rec.u_match!r},{rec.u_exist!r}\n"
            )
