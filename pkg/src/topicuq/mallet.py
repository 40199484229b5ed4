"""Parsers for MALLET topic-model output and a matching exporter.

Two tab-separated formats per ensemble member:

* topic-word-weights: ``topic-id<TAB>term<TAB>weight`` lines.  Weights are
  smoothed counts; each topic row is normalized into a probability
  distribution.  When the file is dense (every topic lists the same term
  set) its minimum weight is the smoothing floor, applied to union terms the
  member never saw; sparse files get a zero floor.
* doc-topics: an optional ``#doc ...`` header, then
  ``doc-index<TAB>doc-name<TAB>proportions``.  Proportions are either one
  column per topic (dense) or repeated ``topic<TAB>proportion`` pairs (the
  older sparse layout); with k known from the weights file the trailing
  column count distinguishes them, otherwise column parity decides.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import Vocabulary
from .ensemble import Ensemble
from .lda import TopicModel

__all__ = [
    "MalletParseError",
    "MalletStructureError",
    "parse_topic_word_weights",
    "parse_doc_topics",
    "import_mallet",
    "export_mallet",
]


class MalletParseError(ValueError):
    """A line that cannot be parsed; carries file and line number."""

    def __init__(self, path, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class MalletStructureError(ValueError):
    """Structurally inconsistent member files (e.g. topic count mismatch)."""


@dataclass
class TopicWeights:
    """One member's raw topic-term weights before vocabulary alignment."""

    k: int
    weights: list[dict[str, float]]  # per topic: term -> weight
    baseline: float  # smoothing floor for terms absent from this member


def parse_topic_word_weights(path) -> TopicWeights:
    raw: dict[int, dict[str, float]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 3:
                raise MalletParseError(
                    path, line_no, f"expected 3 tab-separated columns, got {len(fields)}"
                )
            topic_str, term, weight_str = fields
            try:
                topic = int(topic_str)
            except ValueError:
                raise MalletParseError(path, line_no, f"non-integer topic id {topic_str!r}")
            try:
                weight = float(weight_str)
            except ValueError:
                raise MalletParseError(path, line_no, f"non-numeric weight {weight_str!r}")
            if weight < 0:
                raise MalletParseError(path, line_no, f"negative weight {weight!r}")
            raw.setdefault(topic, {})[term] = weight
    if not raw:
        raise MalletStructureError(f"{path}: no topic-word weights found")
    k = max(raw) + 1
    if sorted(raw) != list(range(k)):
        raise MalletStructureError(f"{path}: topic ids are not contiguous from 0")
    weights = [raw[t] for t in range(k)]
    term_sets = [frozenset(w) for w in weights]
    dense = all(s == term_sets[0] for s in term_sets[1:])
    baseline = min(min(w.values()) for w in weights) if dense else 0.0
    return TopicWeights(k=k, weights=weights, baseline=baseline)


def parse_doc_topics(path, expected_k: Optional[int] = None) -> tuple[list[str], np.ndarray]:
    """Read per-document topic proportions; returns (doc names, theta rows)."""
    names: list[str] = []
    rows: list[np.ndarray] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n")
            if not stripped.strip():
                continue
            if stripped.startswith("#"):
                continue
            fields = stripped.split("\t")
            if len(fields) < 3:
                raise MalletParseError(
                    path, line_no, f"expected at least 3 columns, got {len(fields)}"
                )
            try:
                int(fields[0])
            except ValueError:
                raise MalletParseError(path, line_no, f"non-integer doc index {fields[0]!r}")
            name = fields[1]
            trailing = fields[2:]
            if expected_k is not None:
                if len(trailing) == expected_k:
                    pairs = False
                elif len(trailing) == 2 * expected_k:
                    pairs = True
                else:
                    raise MalletStructureError(
                        f"{path}:{line_no}: {len(trailing)} proportion columns do not "
                        f"match {expected_k} topics in either layout"
                    )
            else:
                pairs = len(trailing) % 2 == 0
            try:
                values = [float(x) for x in trailing]
            except ValueError as exc:
                raise MalletParseError(path, line_no, f"non-numeric proportion: {exc}")
            if pairs:
                k = expected_k if expected_k is not None else len(trailing) // 2
                row = np.zeros(k, dtype=np.float64)
                for j in range(0, len(trailing), 2):
                    topic_f, prop = values[j], values[j + 1]
                    if topic_f != int(topic_f):
                        raise MalletParseError(
                            path, line_no, f"non-integer topic id {trailing[j]!r} in pair format"
                        )
                    topic = int(topic_f)
                    if not 0 <= topic < k:
                        raise MalletStructureError(
                            f"{path}:{line_no}: topic id {topic} outside 0..{k - 1}"
                        )
                    row[topic] = prop
            else:
                row = np.asarray(values, dtype=np.float64)
            if np.any(row < 0):
                raise MalletParseError(path, line_no, "negative topic proportion")
            names.append(name)
            rows.append(row)
    if not rows:
        raise MalletStructureError(f"{path}: no document rows found")
    k_seen = {r.size for r in rows}
    if len(k_seen) != 1:
        raise MalletStructureError(f"{path}: inconsistent topic counts across rows: {sorted(k_seen)}")
    theta = np.vstack(rows)
    # Guard against file rounding: rows are renormalized to exact distributions.
    sums = theta.sum(axis=1)
    if np.any(sums <= 0):
        raise MalletStructureError(f"{path}: a document row has zero total proportion")
    theta /= sums[:, None]
    return names, theta


def import_mallet(doc_topics_paths: Sequence, topic_word_weights_paths: Sequence) -> Ensemble:
    """Assemble an ensemble from per-member MALLET output files.

    One doc-topics file and one topic-word-weights file per member, in
    matching order.  The vocabulary is the union of terms across members;
    each member's absent terms receive that member's smoothing baseline
    before per-topic normalization.
    """
    if len(doc_topics_paths) != len(topic_word_weights_paths):
        raise ValueError(
            f"{len(doc_topics_paths)} doc-topics files vs "
            f"{len(topic_word_weights_paths)} topic-word-weights files"
        )
    if len(doc_topics_paths) < 2:
        raise ValueError("an ensemble import needs >= 2 members")

    member_weights = [parse_topic_word_weights(p) for p in topic_word_weights_paths]
    union: set[str] = set()
    for tw in member_weights:
        for w in tw.weights:
            union.update(w)
    vocabulary = Vocabulary(sorted(union))

    members: list[TopicModel] = []
    doc_names_ref: Optional[list[str]] = None
    for idx, (tw, dt_path) in enumerate(zip(member_weights, doc_topics_paths)):
        names, theta = parse_doc_topics(dt_path, expected_k=tw.k)
        if theta.shape[1] != tw.k:
            raise MalletStructureError(
                f"{dt_path}: {theta.shape[1]} topics in doc-topics vs {tw.k} in weights"
            )
        if doc_names_ref is None:
            doc_names_ref = names
        elif names != doc_names_ref:
            raise MalletStructureError(
                f"{dt_path}: document names differ from the first member's doc-topics file"
            )
        phi = np.full((tw.k, len(vocabulary)), tw.baseline, dtype=np.float64)
        for t, w in enumerate(tw.weights):
            for term, weight in w.items():
                phi[t, vocabulary.lookup(term)] = weight
        row_sums = phi.sum(axis=1)
        if np.any(row_sums <= 0):
            raise MalletStructureError(
                f"{topic_word_weights_paths[idx]}: topic with zero total weight"
            )
        phi /= row_sums[:, None]
        members.append(TopicModel(phi=phi, theta=theta, config=None, model_id=idx))

    import_info = {
        "members": [
            {
                "doc_topics": str(doc_topics_paths[i]),
                "topic_word_weights": str(topic_word_weights_paths[i]),
                "baseline": member_weights[i].baseline,
                "k": member_weights[i].k,
            }
            for i in range(len(member_weights))
        ]
    }
    return Ensemble(members=members, spec=None, vocabulary=vocabulary,
                    doc_ids=list(doc_names_ref), import_info=import_info)


def export_mallet(ensemble: Ensemble, out_dir) -> tuple[list[Path], list[Path]]:
    """Write one doc-topics and one topic-word-weights file per member.

    Full-precision decimal output, so import of the exported files
    reproduces phi and theta.  Returns the two path lists.
    """
    if not ensemble.has_theta:
        raise ValueError("ensemble members lack document-topic distributions")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc_ids = ensemble.doc_ids or [
        f"doc{i}" for i in range(ensemble.members[0].theta.shape[0])
    ]
    dt_paths, tw_paths = [], []
    for idx, model in enumerate(ensemble.members):
        tw_path = out / f"member{idx:02d}-topic-word-weights.tsv"
        with open(tw_path, "w", encoding="utf-8") as fh:
            for t in range(model.k):
                for term_id, term in enumerate(ensemble.vocabulary.terms):
                    fh.write(f"{t}\t{term}\t{float(model.phi[t, term_id])!r}\n")
        dt_path = out / f"member{idx:02d}-doc-topics.tsv"
        with open(dt_path, "w", encoding="utf-8") as fh:
            fh.write("#doc name proportions...\n")
            for d, doc_id in enumerate(doc_ids):
                props = "\t".join(repr(float(x)) for x in model.theta[d])
                fh.write(f"{d}\t{doc_id}\t{props}\n")
        dt_paths.append(dt_path)
        tw_paths.append(tw_path)
    return dt_paths, tw_paths
