"""Project assembly and persistence.

A project bundles everything one analysis session needs: the corpus
reference and preprocessing settings, the trained or imported ensemble,
the similarity matrix, per-topic uncertainty records, the 2D layout,
analyst groups, and view configuration.

On disk a project is a single JSON document plus a binary sidecar for the
similarity matrix (referenced by relative path and SHA-256).  JSON floats
round-trip losslessly (shortest-repr decimal), so save/open preserves all
numeric payloads exactly.  Raw document text is not copied into the
project; opening re-reads the corpus source when it is still present and
otherwise degrades gracefully with document views disabled.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .analysis import TopicGroup
from .corpus import (
    Document,
    PreprocessingConfig,
    Vocabulary,
    build_matrix,
    load_corpus_dir,
    load_corpus_jsonl,
)
from .embedding import Embedding, EmbeddingConfig, embed_similarity
from .ensemble import Ensemble, EnsembleSpec, TopicRef, generate
from .lda import LdaConfig, TopicModel
from .metrics import (
    SimilarityMatrix,
    UncertaintyRecord,
    compute_all,
    read_similarity_binary,
    write_similarity_binary,
)

__all__ = [
    "FORMAT_VERSION",
    "ViewConfig",
    "CorpusRef",
    "Project",
    "ProjectFormatError",
    "create_project",
    "save_project",
    "open_project",
]

FORMAT_VERSION = 1


class ProjectFormatError(ValueError):
    """The file is not a readable project of a supported version."""


@dataclass(frozen=True)
class ViewConfig:
    top_n_terms: int = 10
    stable_threshold: float = 0.3
    unstable_threshold: float = 0.5
    color_map: str = "categorical"
    highlight_rule: str = "contextual"

    def __post_init__(self):
        if self.top_n_terms < 1:
            raise ValueError("top_n_terms must be >= 1")
        if not 0 <= self.stable_threshold <= self.unstable_threshold <= 1:
            raise ValueError("thresholds must satisfy 0 <= stable <= unstable <= 1")


@dataclass(frozen=True)
class CorpusRef:
    """Where the raw documents came from and how they were preprocessed."""

    kind: str  # "dir" or "jsonl"
    path: str
    preprocessing: PreprocessingConfig = PreprocessingConfig()
    min_doc_freq: int = 1


@dataclass
class Project:
    id: str
    corpus_ref: Optional[CorpusRef]
    vocabulary: Vocabulary
    ensemble: Ensemble
    similarity: SimilarityMatrix
    records: list[UncertaintyRecord]
    embedding: Embedding
    groups: dict[str, TopicGroup] = field(default_factory=dict)
    view_config: ViewConfig = ViewConfig()
    documents: Optional[list[Document]] = None
    revision: int = 0

    def document_by_id(self, doc_id: str) -> Optional[Document]:
        if self.documents is None:
            return None
        for doc in self.documents:
            if doc.id == doc_id:
                return doc
        return None

    def record_of(self, ref: TopicRef) -> UncertaintyRecord:
        for record in self.records:
            if record.ref == ref:
                return record
        raise KeyError(f"no uncertainty record for {ref}")

    def validate(self) -> None:
        """Cross-reference consistency over groups, embedding, and records."""
        refs = set(self.ensemble.topic_refs())
        if self.embedding.refs is None or set(self.embedding.refs) != refs:
            raise ValueError("embedding refs do not cover the ensemble")
        if set(self.similarity.refs) != refs:
            raise ValueError("similarity refs do not cover the ensemble")
        if {r.ref for r in self.records} != refs:
            raise ValueError("uncertainty records do not cover the ensemble")
        for group in self.groups.values():
            for ref in group.members:
                if ref not in refs:
                    raise ValueError(f"group {group.id} references unknown {ref}")


def create_project(
    project_id: str,
    documents: list[Document],
    spec: EnsembleSpec,
    *,
    corpus_ref: Optional[CorpusRef] = None,
    min_doc_freq: int = 1,
    embedding_config: EmbeddingConfig = EmbeddingConfig(),
    n_jobs: int = 1,
) -> Project:
    """Run the full pipeline: train, score, embed, and bundle."""
    vocabulary, matrix = build_matrix(documents, min_doc_freq=min_doc_freq)
    ensemble = generate(matrix, spec, vocabulary, n_jobs=n_jobs)
    return assemble_project(
        project_id,
        ensemble,
        documents=documents,
        corpus_ref=corpus_ref,
        embedding_config=embedding_config,
    )


def assemble_project(
    project_id: str,
    ensemble: Ensemble,
    *,
    documents: Optional[list[Document]] = None,
    corpus_ref: Optional[CorpusRef] = None,
    embedding_config: EmbeddingConfig = EmbeddingConfig(),
) -> Project:
    """Score and embed an existing ensemble (trained or imported)."""
    sim, records = compute_all(ensemble)
    n = len(sim.refs)
    config = embedding_config
    if not config.perplexity < (n - 1) / 3:
        # Small ensembles (tests, toy corpora) cap the perplexity instead
        # of failing; the cap keeps the strict validity precondition.
        config = replace(config, perplexity=max((n - 1) / 3 - 1e-9, 1.0) * 0.999)
    embedding = embed_similarity(sim, config)
    project = Project(
        id=project_id,
        corpus_ref=corpus_ref,
        vocabulary=ensemble.vocabulary,
        ensemble=ensemble,
        similarity=sim,
        records=list(records),
        embedding=embedding,
        documents=documents,
        revision=0,
    )
    project.validate()
    return project


def _preprocessing_to_json(config: PreprocessingConfig) -> dict:
    if config.normalizer is not None:
        raise ValueError(
            "projects with a custom normalizer hook cannot be persisted"
        )
    return {
        "lowercase": config.lowercase,
        "stopwords": sorted(config.stopwords),
        "min_token_len": config.min_token_len,
    }


def _preprocessing_from_json(obj: dict) -> PreprocessingConfig:
    return PreprocessingConfig(
        lowercase=obj["lowercase"],
        stopwords=frozenset(obj["stopwords"]),
        min_token_len=obj["min_token_len"],
    )


def _spec_to_json(spec: Optional[EnsembleSpec]) -> Optional[dict]:
    if spec is None:
        return None
    base = spec.base_config
    return {
        "mode": spec.mode,
        "base_config": {
            "k": base.k,
            "alpha": base.alpha,
            "beta": base.beta,
            "iterations": base.iterations,
            "seed": base.seed,
        },
        "members": spec.members,
        "parameter_values": None
        if spec.parameter_values is None
        else list(spec.parameter_values),
        "base_seed": spec.base_seed,
        "pin_seed": spec.pin_seed,
    }


def _spec_from_json(obj: Optional[dict]) -> Optional[EnsembleSpec]:
    if obj is None:
        return None
    c = obj["base_config"]
    values = obj["parameter_values"]
    return EnsembleSpec(
        mode=obj["mode"],
        base_config=LdaConfig(
            k=c["k"], alpha=c["alpha"], beta=c["beta"],
            iterations=c["iterations"], seed=c["seed"],
        ),
        members=obj["members"],
        parameter_values=None if values is None else tuple(values),
        base_seed=obj["base_seed"],
        pin_seed=obj["pin_seed"],
    )


def save_project(project: Project, path) -> None:
    """Write the project JSON and its similarity sidecar next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sidecar_name = path.stem + ".sim"
    sidecar = path.parent / sidecar_name
    write_similarity_binary(project.similarity, sidecar)
    digest = hashlib.sha256(sidecar.read_bytes()).hexdigest()

    vocab_hash = project.vocabulary.content_hash()
    doc = {
        "format_version": FORMAT_VERSION,
        "id": project.id,
        "revision": project.revision,
        "corpus": None
        if project.corpus_ref is None
        else {
            "kind": project.corpus_ref.kind,
            "path": project.corpus_ref.path,
            "preprocessing": _preprocessing_to_json(project.corpus_ref.preprocessing),
            "min_doc_freq": project.corpus_ref.min_doc_freq,
        },
        "vocabulary": {"terms": project.vocabulary.terms, "sha256": vocab_hash},
        "doc_ids": project.ensemble.doc_ids,
        "ensemble": {
            "spec": _spec_to_json(project.ensemble.spec),
            "import_info": project.ensemble.import_info,
            "members": [
                m.to_json_dict(vocab_hash) for m in project.ensemble.members
            ],
        },
        "similarity": {"path": sidecar_name, "sha256": digest},
        "records": [
            [r.ref.model_index, r.ref.topic_index, r.u_match, r.u_exist]
            for r in project.records
        ],
        "embedding": {
            "refs": [[r.model_index, r.topic_index] for r in project.embedding.refs],
            "coords": [[float(x), float(y)] for x, y in project.embedding.coords],
            "final_kl": project.embedding.final_kl,
        },
        "groups": [
            {
                "id": g.id,
                "label": g.label,
                "members": [[r.model_index, r.topic_index] for r in sorted(g.members)],
                "completeness": g.completeness,
                "hull": [[x, y] for x, y in g.hull],
            }
            for g in project.groups.values()
        ],
        "view_config": {
            "top_n_terms": project.view_config.top_n_terms,
            "stable_threshold": project.view_config.stable_threshold,
            "unstable_threshold": project.view_config.unstable_threshold,
            "color_map": project.view_config.color_map,
            "highlight_rule": project.view_config.highlight_rule,
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def _load_documents(ref: CorpusRef) -> Optional[list[Document]]:
    source = Path(ref.path)
    if not source.exists():
        return None
    if ref.kind == "dir":
        return load_corpus_dir(source, ref.preprocessing)
    if ref.kind == "jsonl":
        return load_corpus_jsonl(source, ref.preprocessing)
    raise ProjectFormatError(f"unknown corpus kind {ref.kind!r}")


def open_project(path) -> Project:
    """Load a project, verify content hashes, and re-attach the corpus.

    A missing corpus source is not an error: the project opens with
    ``documents=None`` and document-level views report a capability error.
    """
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ProjectFormatError(f"{path}: not valid JSON: {exc}")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ProjectFormatError(
            f"{path}: format version {version!r} is not supported "
            f"(expected {FORMAT_VERSION})"
        )

    vocabulary = Vocabulary(doc["vocabulary"]["terms"])
    if vocabulary.content_hash() != doc["vocabulary"]["sha256"]:
        raise ProjectFormatError(f"{path}: vocabulary content hash mismatch")

    sidecar = path.parent / doc["similarity"]["path"]
    if not sidecar.exists():
        raise ProjectFormatError(f"{path}: missing similarity sidecar {sidecar}")
    digest = hashlib.sha256(sidecar.read_bytes()).hexdigest()
    if digest != doc["similarity"]["sha256"]:
        raise ProjectFormatError(f"{path}: similarity sidecar hash mismatch")

    members = [TopicModel.from_json_dict(m) for m in doc["ensemble"]["members"]]
    ensemble = Ensemble(
        members=members,
        spec=_spec_from_json(doc["ensemble"]["spec"]),
        vocabulary=vocabulary,
        doc_ids=doc["doc_ids"],
        import_info=doc["ensemble"]["import_info"],
    )

    refs = [TopicRef(m, t) for m, t in doc["embedding"]["refs"]]
    sizes = ensemble.model_sizes()
    offsets = [0]
    for size in sizes[:-1]:
        offsets.append(offsets[-1] + size)
    values = read_similarity_binary(sidecar)
    if values.shape[0] != len(refs):
        raise ProjectFormatError(
            f"{path}: similarity sidecar is {values.shape[0]}x{values.shape[0]} "
            f"but the ensemble has {len(refs)} topics"
        )
    similarity = SimilarityMatrix(
        refs=tuple(refs),
        values=values,
        model_offsets=tuple(offsets),
        model_sizes=tuple(sizes),
    )
    records = [
        UncertaintyRecord(ref=TopicRef(m, t), u_match=um, u_exist=ue)
        for m, t, um, ue in doc["records"]
    ]
    embedding = Embedding(
        refs=tuple(refs),
        coords=np.asarray(doc["embedding"]["coords"], dtype=np.float64),
        final_kl=doc["embedding"]["final_kl"],
    )

    corpus_ref = None
    documents = None
    if doc["corpus"] is not None:
        corpus_ref = CorpusRef(
            kind=doc["corpus"]["kind"],
            path=doc["corpus"]["path"],
            preprocessing=_preprocessing_from_json(doc["corpus"]["preprocessing"]),
            min_doc_freq=doc["corpus"]["min_doc_freq"],
        )
        documents = _load_documents(corpus_ref)

    vc = doc["view_config"]
    project = Project(
        id=doc["id"],
        corpus_ref=corpus_ref,
        vocabulary=vocabulary,
        ensemble=ensemble,
        similarity=similarity,
        records=records,
        embedding=embedding,
        view_config=ViewConfig(
            top_n_terms=vc["top_n_terms"],
            stable_threshold=vc["stable_threshold"],
            unstable_threshold=vc["unstable_threshold"],
            color_map=vc["color_map"],
            highlight_rule=vc["highlight_rule"],
        ),
        documents=documents,
        revision=doc["revision"],
    )
    for g in doc["groups"]:
        group = TopicGroup(
            id=g["id"],
            label=g["label"],
            members=frozenset(TopicRef(m, t) for m, t in g["members"]),
            completeness=g["completeness"],
            hull=tuple((x, y) for x, y in g["hull"]),
        )
        project.groups[group.id] = group
    project.validate()
    return project
