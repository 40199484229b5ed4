"""Analyst-facing computations over a scored ensemble.

Covers topic grouping (completeness, convex hulls), stability
classification against the 0.3 / 0.5 uncertainty thresholds, conjunctive
topic filters, rank/moment correlation between the two uncertainty
measures, and whole-ensemble summary statistics.  Groups are always
analyst-authored; there is deliberately no automatic clusterer here.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .embedding import Embedding
from .ensemble import Ensemble, TopicRef
from .metrics import SimilarityMatrix, UncertaintyRecord

__all__ = [
    "DEFAULT_THRESHOLDS",
    "StabilityClass",
    "TopicGroup",
    "FilterSpec",
    "MeasureSummary",
    "completeness",
    "make_group",
    "group_to_json_dict",
    "classify_stability",
    "apply_filter",
    "convex_hull",
    "correlation",
    "ensemble_summary",
]

DEFAULT_THRESHOLDS = (0.3, 0.5)

MEASURES = ("u_match", "u_exist")


class StabilityClass(enum.Enum):
    STABLE = "stable"
    GREY = "grey"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class TopicGroup:
    """An analyst-labeled set of topics with derived completeness and hull."""

    id: str
    label: str
    members: frozenset[TopicRef]
    completeness: float
    hull: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("a topic group needs at least one member")
        if not 0.0 <= self.completeness <= 1.0:
            raise ValueError(f"completeness {self.completeness} outside [0, 1]")


@dataclass(frozen=True)
class FilterSpec:
    """Conjunction of optional topic-filter criteria.

    * ``selected_refs``: explicit allow-set.
    * ``terms``: every listed term must appear among a topic's ``top_n``
      most probable terms.
    * ``u_measure`` with ``u_max`` / ``u_min``: strict bounds on the chosen
      uncertainty, so ``u_max=0.3`` selects exactly the stable class and
      ``u_min=0.5`` exactly the unstable class.
    * ``similar_to``: keep topics with similarity to the anchor at or above
      ``similarity_threshold``; with ``per_model_best`` instead return each
      other member's single most similar topic to the anchor.
    """

    selected_refs: Optional[frozenset[TopicRef]] = None
    terms: Optional[tuple[str, ...]] = None
    top_n: int = 10
    u_measure: Optional[str] = None
    u_max: Optional[float] = None
    u_min: Optional[float] = None
    similar_to: Optional[TopicRef] = None
    similarity_threshold: Optional[float] = None
    per_model_best: bool = False

    def __post_init__(self):
        has_u = self.u_measure is not None and (
            self.u_max is not None or self.u_min is not None
        )
        has_sim = self.similar_to is not None
        if not (self.selected_refs is not None or self.terms or has_u or has_sim):
            raise ValueError("filter needs at least one active criterion")
        if self.u_measure is not None and self.u_measure not in MEASURES:
            raise ValueError(f"unknown uncertainty measure {self.u_measure!r}")
        for name in ("u_max", "u_min", "similarity_threshold"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} {value} outside [0, 1]")
        if self.top_n < 1:
            raise ValueError(f"top_n must be >= 1, got {self.top_n}")


def completeness(members: Iterable[TopicRef], ensemble: Ensemble) -> float:
    """Fraction of ensemble members represented in the group."""
    members = list(members)
    if not members:
        raise ValueError("completeness of an empty group is undefined")
    distinct = {ref.model_index for ref in members}
    return len(distinct) / len(ensemble.members)


def make_group(
    group_id: str,
    label: str,
    members: Iterable[TopicRef],
    ensemble: Ensemble,
    embedding: Optional[Embedding] = None,
) -> TopicGroup:
    """Build a group, deriving completeness and (if coords exist) the hull."""
    member_set = frozenset(members)
    for ref in member_set:
        if not ensemble.contains(ref):
            raise ValueError(f"group member {ref} not in the ensemble")
    hull: tuple[tuple[float, float], ...] = ()
    if embedding is not None and embedding.refs is not None:
        index = {ref: i for i, ref in enumerate(embedding.refs)}
        points = [tuple(embedding.coords[index[ref]]) for ref in sorted(member_set)]
        hull = tuple(convex_hull(points))
    return TopicGroup(
        id=group_id,
        label=label,
        members=member_set,
        completeness=completeness(member_set, ensemble),
        hull=hull,
    )


def group_to_json_dict(group: TopicGroup) -> dict:
    return {
        "id": group.id,
        "label": group.label,
        "members": [
            {"model": ref.model_index, "topic": ref.topic_index}
            for ref in sorted(group.members)
        ],
        "completeness": group.completeness,
        "hull": [[x, y] for x, y in group.hull],
    }


def classify_stability(
    records: Sequence[UncertaintyRecord],
    measure: str,
    thresholds: tuple[float, float] = DEFAULT_THRESHOLDS,
) -> list[StabilityClass]:
    """stable iff U < low, unstable iff U > high, grey in between."""
    if measure not in MEASURES:
        raise ValueError(f"unknown uncertainty measure {measure!r}")
    low, high = thresholds
    if not low <= high:
        raise ValueError(f"thresholds must be ordered, got {thresholds}")
    out = []
    for record in records:
        u = getattr(record, measure)
        if u < low:
            out.append(StabilityClass.STABLE)
        elif u > high:
            out.append(StabilityClass.UNSTABLE)
        else:
            out.append(StabilityClass.GREY)
    return out


def _topics_with_terms(
    ensemble: Ensemble, terms: Sequence[str], top_n: int
) -> set[TopicRef]:
    unknown = [t for t in terms if t not in ensemble.vocabulary]
    if unknown:
        warnings.warn(f"terms not in vocabulary: {unknown}", stacklevel=3)
        return set()
    term_ids = {ensemble.vocabulary.lookup(t) for t in terms}
    keep: set[TopicRef] = set()
    for ref in ensemble.topic_refs():
        row = ensemble.phi_of(ref)
        top = set(np.argsort(-row, kind="stable")[:top_n].tolist())
        if term_ids <= top:
            keep.add(ref)
    return keep


def _similar_topics(
    sim: SimilarityMatrix, spec: FilterSpec, ensemble: Ensemble
) -> set[TopicRef]:
    anchor = spec.similar_to
    anchor_row = sim.index_of(anchor)
    row = sim.values[anchor_row]
    if spec.per_model_best:
        keep: set[TopicRef] = set()
        for m in range(len(ensemble.members)):
            if m == anchor.model_index:
                continue
            block = sim.block(anchor_row, m)
            keep.add(TopicRef(m, int(np.argmax(block))))
        return keep
    threshold = spec.similarity_threshold
    if threshold is None:
        raise ValueError("similar_to without per_model_best needs a threshold")
    return {ref for i, ref in enumerate(sim.refs) if row[i] >= threshold}


def apply_filter(
    spec: FilterSpec,
    ensemble: Ensemble,
    records: Sequence[UncertaintyRecord],
    sim: Optional[SimilarityMatrix] = None,
) -> set[TopicRef]:
    """Intersect all active criteria; never enlarges under added criteria."""
    result = set(ensemble.topic_refs())
    if spec.selected_refs is not None:
        result &= set(spec.selected_refs)
    if spec.terms:
        result &= _topics_with_terms(ensemble, spec.terms, spec.top_n)
    if spec.u_measure is not None and (spec.u_max is not None or spec.u_min is not None):
        by_ref = {record.ref: getattr(record, spec.u_measure) for record in records}
        missing = result - by_ref.keys()
        if missing:
            raise ValueError(f"no uncertainty record for {sorted(missing)[0]}")
        if spec.u_max is not None:
            result = {ref for ref in result if by_ref[ref] < spec.u_max}
        if spec.u_min is not None:
            result = {ref for ref in result if by_ref[ref] > spec.u_min}
    if spec.similar_to is not None:
        if sim is None:
            raise ValueError("similar_to filtering needs a similarity matrix")
        result &= _similar_topics(sim, spec, ensemble)
    return result


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Monotone-chain hull, counter-clockwise, collinear vertices dropped.

    One distinct point yields that point; two, or any fully collinear set,
    yield the extreme pair as a segment.
    """
    if len(points) == 0:
        raise ValueError("convex hull of no points is undefined")
    pts = sorted({(float(x), float(y)) for x, y in points})
    if len(pts) == 1:
        return pts
    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the average of their positions."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.sum(xc * xc) * np.sum(yc * yc))
    if denom == 0.0:
        raise ValueError("correlation undefined: a measure has zero variance")
    return float(np.clip(np.sum(xc * yc) / denom, -1.0, 1.0))


def correlation(records: Sequence[UncertaintyRecord]) -> tuple[float, float]:
    """(Pearson, Spearman) between matching and existence uncertainty."""
    if len(records) < 3:
        raise ValueError(f"correlation needs >= 3 records, got {len(records)}")
    x = np.asarray([record.u_match for record in records], dtype=np.float64)
    y = np.asarray([record.u_exist for record in records], dtype=np.float64)
    pearson = _pearson(x, y)
    spearman = _pearson(_average_ranks(x), _average_ranks(y))
    return pearson, spearman


@dataclass(frozen=True)
class MeasureSummary:
    mean: float
    median: float
    stable: int
    grey: int
    unstable: int


def ensemble_summary(
    records: Sequence[UncertaintyRecord],
    thresholds: tuple[float, float] = DEFAULT_THRESHOLDS,
) -> dict[str, MeasureSummary]:
    """Per-measure mean/median and stability-class counts."""
    if not records:
        raise ValueError("summary of an empty record list is undefined")
    out: dict[str, MeasureSummary] = {}
    for measure in MEASURES:
        values = np.asarray(
            [getattr(record, measure) for record in records], dtype=np.float64
        )
        classes = classify_stability(records, measure, thresholds)
        out[measure] = MeasureSummary(
            mean=float(values.mean()),
            median=float(np.median(values)),
            stable=sum(c is StabilityClass.STABLE for c in classes),
            grey=sum(c is StabilityClass.GREY for c in classes),
            unstable=sum(c is StabilityClass.UNSTABLE for c in classes),
        )
    return out
