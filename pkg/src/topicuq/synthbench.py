"""Synthetic corpus generator and desk-scale experiment harness.

Real analysis corpora are large and not shipped, so qualitative claims are
checked against corpora sampled from a known ground-truth topic model:
draw per-document mixtures from a Dirichlet, then per token a topic and a
term.  Because the truth is known, trained ensembles can be scored by
greedy best-match against it, turning cluster-formation claims into
assertable properties.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .analysis import MeasureSummary, correlation, ensemble_summary
from .corpus import Document, PreprocessingConfig, build_matrix, tokenize
from .ensemble import Ensemble, TopicRef, generate, preset
from .metrics import compute_all, cosine_similarity

__all__ = [
    "SyntheticSpec",
    "SyntheticCorpus",
    "ClusterCandidate",
    "ExperimentReport",
    "generate_corpus",
    "match_ground_truth",
    "run_experiment",
    "format_report",
]

_ALPHABET = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a ground-truth corpus.

    ``separation`` is the probability mass each true topic places on its
    own exclusive term block; the blocks are disjoint across topics and
    the remaining mass is spread over a shared pool.
    """

    true_k: int = 10
    vocab_size: int = 200
    n_docs: int = 60
    doc_length: int = 150
    separation: float = 0.8
    doc_alpha: float = 0.1
    seed: int = 0

    def __post_init__(self):
        for name in ("true_k", "vocab_size", "n_docs", "doc_length"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.separation <= 1.0:
            raise ValueError(f"separation {self.separation} outside [0, 1]")
        if self.doc_alpha <= 0:
            raise ValueError(f"doc_alpha must be positive, got {self.doc_alpha}")
        if self.exclusive_per_topic * self.true_k > self.vocab_size:
            raise ValueError("exclusive term blocks exceed the vocabulary")

    @property
    def exclusive_per_topic(self) -> int:
        return int(self.separation * self.vocab_size / self.true_k)


@dataclass
class SyntheticCorpus:
    """Sampled documents plus the ground truth that produced them."""

    spec: SyntheticSpec
    documents: list[Document]
    true_phi: np.ndarray  # (true_k, V) over the term list below
    true_theta: np.ndarray  # (D, true_k)
    terms: list[str]


def _term_name(i: int, width: int) -> str:
    """Alphabetic-only term names so the tokenizer keeps every one."""
    digits = []
    for _ in range(width):
        digits.append(_ALPHABET[i % 26])
        i //= 26
    return "w" + "".join(reversed(digits))


def generate_corpus(spec: SyntheticSpec) -> SyntheticCorpus:
    rng = np.random.default_rng(spec.seed)
    V, k = spec.vocab_size, spec.true_k
    width = 1
    while 26 ** width < V:
        width += 1
    terms = [_term_name(i, width) for i in range(V)]

    excl = spec.exclusive_per_topic
    shared_start = k * excl
    true_phi = np.zeros((k, V))
    for t in range(k):
        if excl > 0:
            block = rng.dirichlet(np.ones(excl))
            true_phi[t, t * excl : (t + 1) * excl] = spec.separation * block
        shared_mass = 1.0 - spec.separation if excl > 0 else 1.0
        if shared_start < V and shared_mass > 0:
            pool = rng.dirichlet(np.ones(V - shared_start))
            true_phi[t, shared_start:] = shared_mass * pool
        true_phi[t] /= true_phi[t].sum()

    true_theta = rng.dirichlet(np.full(k, spec.doc_alpha), size=spec.n_docs)
    config = PreprocessingConfig()
    documents = []
    for d in range(spec.n_docs):
        length = max(1, int(rng.poisson(spec.doc_length)))
        topics = rng.choice(k, size=length, p=true_theta[d])
        words = [
            terms[rng.choice(V, p=true_phi[t])] for t in topics
        ]
        text = " ".join(words)
        doc_id = f"doc{d:04d}"
        documents.append(
            Document(id=doc_id, title=doc_id, raw_text=text,
                     tokens=tokenize(text, config))
        )
    return SyntheticCorpus(spec=spec, documents=documents, true_phi=true_phi,
                           true_theta=true_theta, terms=terms)


@dataclass(frozen=True)
class ClusterCandidate:
    """Trained topics matched to one ground-truth topic across members."""

    true_topic: int
    members: tuple[TopicRef, ...]
    completeness: float
    mean_u_exist: float


def _align_phi(corpus: SyntheticCorpus, ensemble: Ensemble) -> np.ndarray:
    """Ground-truth phi re-indexed to the trained vocabulary order.

    Generated corpora keep every sampled term, but rare terms can miss the
    document frequency cutoff; mass on dropped terms is renormalized away.
    """
    V = len(ensemble.vocabulary)
    aligned = np.zeros((corpus.spec.true_k, V))
    for j, term in enumerate(corpus.terms):
        if term in ensemble.vocabulary:
            aligned[:, ensemble.vocabulary.lookup(term)] = corpus.true_phi[:, j]
    sums = aligned.sum(axis=1, keepdims=True)
    if np.any(sums == 0):
        raise ValueError("a ground-truth topic lost all terms in preprocessing")
    return aligned / sums


def match_ground_truth(
    corpus: SyntheticCorpus,
    ensemble: Ensemble,
    threshold: float = 0.5,
) -> tuple[list[ClusterCandidate], set[TopicRef]]:
    """Greedy best-match of trained topics to ground-truth topics.

    Per member, (true, trained) pairs are accepted in descending cosine
    similarity, each side used at most once, stopping below ``threshold``.
    Returns the per-truth cluster candidates (without uncertainty filled
    in) and the set of trained topics left unmatched.
    """
    aligned = _align_phi(corpus, ensemble)
    k_true = corpus.spec.true_k
    assigned: dict[int, list[TopicRef]] = {g: [] for g in range(k_true)}
    matched: set[TopicRef] = set()
    for m, model in enumerate(ensemble.members):
        sims = np.array(
            [
                [cosine_similarity(aligned[g], model.phi[t]) for t in range(model.k)]
                for g in range(k_true)
            ]
        )
        pairs = sorted(
            ((sims[g, t], g, t) for g in range(k_true) for t in range(model.k)),
            key=lambda x: (-x[0], x[1], x[2]),
        )
        used_true: set[int] = set()
        used_trained: set[int] = set()
        for s, g, t in pairs:
            if s < threshold:
                break
            if g in used_true or t in used_trained:
                continue
            used_true.add(g)
            used_trained.add(t)
            ref = TopicRef(m, t)
            assigned[g].append(ref)
            matched.add(ref)
    candidates = [
        ClusterCandidate(
            true_topic=g,
            members=tuple(sorted(assigned[g])),
            completeness=len({r.model_index for r in assigned[g]}) / len(ensemble.members),
            mean_u_exist=float("nan"),
        )
        for g in range(k_true)
    ]
    isolated = set(ensemble.topic_refs()) - matched
    return candidates, isolated


@dataclass
class ExperimentReport:
    preset: str
    spec: SyntheticSpec
    summary: dict[str, MeasureSummary]
    pearson: float
    spearman: float
    clusters: list[ClusterCandidate]
    isolated: list[TopicRef]
    recovered: int
    recovery_rate: float
    clustered_mean_u_exist: float
    isolated_mean_u_exist: float
    member_mean_similarity: list[float]
    completeness_bar: float = 0.8

    def to_json_dict(self) -> dict:
        return {
            "preset": self.preset,
            "spec": {
                "true_k": self.spec.true_k,
                "vocab_size": self.spec.vocab_size,
                "n_docs": self.spec.n_docs,
                "doc_length": self.spec.doc_length,
                "separation": self.spec.separation,
                "doc_alpha": self.spec.doc_alpha,
                "seed": self.spec.seed,
            },
            "summary": {
                measure: vars(stats) for measure, stats in self.summary.items()
            },
            "correlation": {"pearson": self.pearson, "spearman": self.spearman},
            "clusters": [
                {
                    "true_topic": c.true_topic,
                    "members": [[r.model_index, r.topic_index] for r in c.members],
                    "completeness": c.completeness,
                    "mean_u_exist": c.mean_u_exist,
                }
                for c in self.clusters
            ],
            "isolated": [[r.model_index, r.topic_index] for r in self.isolated],
            "recovered": self.recovered,
            "recovery_rate": self.recovery_rate,
            "clustered_mean_u_exist": self.clustered_mean_u_exist,
            "isolated_mean_u_exist": self.isolated_mean_u_exist,
            "member_mean_similarity": self.member_mean_similarity,
        }


def _member_mean_similarities(ensemble: Ensemble) -> list[float]:
    """Mean within-member pairwise topic similarity, one value per member."""
    out = []
    for model in ensemble.members:
        k = model.k
        if k < 2:
            out.append(1.0)
            continue
        total = 0.0
        count = 0
        for a in range(k):
            for b in range(a + 1, k):
                total += cosine_similarity(model.phi[a], model.phi[b])
                count += 1
        out.append(total / count)
    return out


def run_experiment(
    preset_name: str,
    spec: SyntheticSpec,
    *,
    k: int = 12,
    members: int = 10,
    iterations: int = 300,
    base_seed: int = 1,
    pin_seed: bool = False,
    match_threshold: float = 0.5,
    min_doc_freq: int = 1,
    n_jobs: int = 1,
) -> ExperimentReport:
    """End-to-end pipeline on a synthetic corpus, scored against the truth.

    Trains the chosen ensemble preset, computes similarities and both
    uncertainty measures, matches trained topics to ground truth, and
    aggregates the per-cluster completeness and uncertainty contrast.
    """
    corpus = generate_corpus(spec)
    vocabulary, matrix = build_matrix(corpus.documents, min_doc_freq=min_doc_freq)
    ens_spec = preset(preset_name, k=k, members=members, iterations=iterations,
                      base_seed=base_seed, pin_seed=pin_seed)
    ensemble = generate(matrix, ens_spec, vocabulary, n_jobs=n_jobs)
    sim, records = compute_all(ensemble)
    summary = ensemble_summary(records)
    pearson, spearman = correlation(records)

    candidates, isolated = match_ground_truth(corpus, ensemble, match_threshold)
    u_by_ref = {record.ref: record.u_exist for record in records}
    clusters = []
    clustered_refs: list[TopicRef] = []
    for c in candidates:
        mean_u = (
            float(np.mean([u_by_ref[r] for r in c.members])) if c.members else float("nan")
        )
        clusters.append(
            ClusterCandidate(
                true_topic=c.true_topic,
                members=c.members,
                completeness=c.completeness,
                mean_u_exist=mean_u,
            )
        )
        if c.completeness >= 0.8:
            clustered_refs.extend(c.members)
    recovered = sum(c.completeness >= 0.8 for c in clusters)
    clustered_mean = (
        float(np.mean([u_by_ref[r] for r in clustered_refs]))
        if clustered_refs
        else float("nan")
    )
    isolated_mean = (
        float(np.mean([u_by_ref[r] for r in sorted(isolated)]))
        if isolated
        else float("nan")
    )
    return ExperimentReport(
        preset=preset_name,
        spec=spec,
        summary=summary,
        pearson=pearson,
        spearman=spearman,
        clusters=clusters,
        isolated=sorted(isolated),
        recovered=recovered,
        recovery_rate=recovered / spec.true_k,
        clustered_mean_u_exist=clustered_mean,
        isolated_mean_u_exist=isolated_mean,
        member_mean_similarity=_member_mean_similarities(ensemble),
    )


def format_report(report: ExperimentReport) -> str:
    """Human-readable text summary of an experiment run."""
    lines = [
        f"preset {report.preset} on synthetic corpus "
        f"(true_k={report.spec.true_k}, V={report.spec.vocab_size}, "
        f"D={report.spec.n_docs}, separation={report.spec.separation})",
        f"recovered {report.recovered}/{report.spec.true_k} ground-truth topics "
        f"as >= {report.completeness_bar:.0%}-complete clusters "
        f"({report.recovery_rate:.0%})",
        f"clustered mean U_E = {report.clustered_mean_u_exist:.4f}; "
        f"isolated ({len(report.isolated)} topics) mean U_E = "
        f"{report.isolated_mean_u_exist:.4f}",
        f"correlation U_M vs U_E: pearson {report.pearson:.4f}, "
        f"spearman {report.spearman:.4f}",
    ]
    for measure, stats in report.summary.items():
        lines.append(
            f"{measure}: mean {stats.mean:.4f}, median {stats.median:.4f}, "
            f"stable {stats.stable}, grey {stats.grey}, unstable {stats.unstable}"
        )
    sims = ", ".join(f"{s:.4f}" for s in report.member_mean_similarity)
    lines.append(f"per-member mean pairwise similarity: {sims}")
    return "\n".join(lines)


def write_report_json(report: ExperimentReport, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json_dict(), fh, indent=2)
        fh.write("\n")
