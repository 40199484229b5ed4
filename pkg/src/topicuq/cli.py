"""Command-line pipeline.

Stages write their artifacts into a workspace directory so each command
has a concrete input and output:

    corpus.json     ingest          corpus reference + preprocessing
    ensemble.json   run / import-mallet
    similarity.sim  metrics         binary similarity matrix
    records.json    metrics         per-topic uncertainty
    embedding.json  embed           2D layout

``serve`` assembles the staged artifacts (or opens a saved project file)
and exposes the HTTP API; ``export`` converts artifacts to CSV/JSON.
"""

from __future__ import annotations

import json
import os
import time
from pathlib import Path

import click
import numpy as np

from . import __version__
from .corpus import (
    PreprocessingConfig,
    Vocabulary,
    build_matrix,
    load_corpus_dir,
    load_corpus_jsonl,
    load_stopwords,
)
from .embedding import Embedding, EmbeddingConfig, embed_similarity, write_embedding_csv
from .ensemble import Ensemble, EnsembleSpec, MODES, PRESET_NAMES, TopicRef, generate, preset
from .lda import DEFAULT_BETA, DEFAULT_ITERATIONS, LdaConfig, TopicModel
from .metrics import (
    SimilarityMatrix,
    UncertaintyRecord,
    compute_all,
    read_similarity_binary,
    write_similarity_binary,
    write_similarity_csv,
    write_uncertainty_csv,
)
from .project import (
    CorpusRef,
    Project,
    _spec_from_json,
    _spec_to_json,
    open_project,
    save_project,
)
from .server import DEFAULT_PORT_ENV, create_app
from .synthbench import SyntheticSpec, format_report, run_experiment, write_report_json

CORPUS_STAGE = "corpus.json"
ENSEMBLE_STAGE = "ensemble.json"
SIMILARITY_STAGE = "similarity.sim"
RECORDS_STAGE = "records.json"
EMBEDDING_STAGE = "embedding.json"


def _fail(message: str) -> "click.exceptions.ClickException":
    return click.ClickException(message)


def _workdir(ctx_workdir: str) -> Path:
    path = Path(ctx_workdir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _read_stage(workdir: Path, name: str) -> dict:
    path = workdir / name
    if not path.exists():
        raise _fail(
            f"{path} is missing; run the earlier pipeline stage first"
        )
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_documents_stage(stage: dict):
    config = PreprocessingConfig(
        lowercase=stage["lowercase"],
        stopwords=frozenset(stage["stopwords"]),
        min_token_len=stage["min_token_len"],
    )
    source = Path(stage["path"])
    if not source.exists():
        raise _fail(f"corpus source {source} no longer exists")
    if stage["kind"] == "jsonl":
        return load_corpus_jsonl(source, config), config
    return load_corpus_dir(source, config), config


def _load_ensemble_stage(workdir: Path) -> Ensemble:
    stage = _read_stage(workdir, ENSEMBLE_STAGE)
    vocabulary = Vocabulary(stage["vocabulary"])
    members = [TopicModel.from_json_dict(m) for m in stage["members"]]
    return Ensemble(
        members=members,
        spec=_spec_from_json(stage["spec"]),
        vocabulary=vocabulary,
        doc_ids=stage["doc_ids"],
        import_info=stage["import_info"],
    )


def _write_ensemble_stage(workdir: Path, ensemble: Ensemble) -> None:
    vocab_hash = ensemble.vocabulary.content_hash()
    stage = {
        "spec": _spec_to_json(ensemble.spec),
        "import_info": ensemble.import_info,
        "vocabulary": ensemble.vocabulary.terms,
        "doc_ids": ensemble.doc_ids,
        "members": [m.to_json_dict(vocab_hash) for m in ensemble.members],
    }
    with open(workdir / ENSEMBLE_STAGE, "w", encoding="utf-8") as fh:
        json.dump(stage, fh)


def _load_metrics_stage(workdir: Path, ensemble: Ensemble):
    records_doc = _read_stage(workdir, RECORDS_STAGE)
    records = [
        UncertaintyRecord(ref=TopicRef(m, t), u_match=um, u_exist=ue)
        for m, t, um, ue in records_doc["records"]
    ]
    values = read_similarity_binary(workdir / SIMILARITY_STAGE)
    refs = list(ensemble.topic_refs())
    if values.shape[0] != len(refs):
        raise _fail(
            f"{SIMILARITY_STAGE} has {values.shape[0]} rows but the ensemble "
            f"has {len(refs)} topics; rerun `metrics`"
        )
    sizes = ensemble.model_sizes()
    offsets = [0]
    for size in sizes[:-1]:
        offsets.append(offsets[-1] + size)
    sim = SimilarityMatrix(
        refs=tuple(refs),
        values=values,
        model_offsets=tuple(offsets),
        model_sizes=tuple(sizes),
    )
    return sim, records


@click.group()
@click.version_option(version=__version__, prog_name="topicuq")
def main():
    """Uncertainty-aware topic-model ensemble workbench."""


@main.command()
@click.argument("corpus_path", type=click.Path(exists=True))
@click.option("--stopwords", type=click.Path(exists=True), default=None,
              help="Stopword list, one term per line, # comments allowed.")
@click.option("--min-doc-freq", type=int, default=1, show_default=True,
              help="Drop terms appearing in fewer documents.")
@click.option("--min-token-len", type=int, default=1, show_default=True)
@click.option("--keep-case", is_flag=True, help="Disable lowercasing.")
@click.option("--jsonl", "as_jsonl", is_flag=True,
              help="Treat the corpus path as a JSONL file, not a directory.")
@click.option("--workdir", default="topicuq-work", show_default=True)
def ingest(corpus_path, stopwords, min_doc_freq, min_token_len, keep_case,
           as_jsonl, workdir):
    """Tokenize a corpus and record the preprocessing choices."""
    work = _workdir(workdir)
    stop = load_stopwords(stopwords) if stopwords else frozenset()
    config = PreprocessingConfig(
        lowercase=not keep_case, stopwords=stop, min_token_len=min_token_len
    )
    source = Path(corpus_path).resolve()
    documents = (
        load_corpus_jsonl(source, config) if as_jsonl else load_corpus_dir(source, config)
    )
    vocabulary, matrix = build_matrix(documents, min_doc_freq=min_doc_freq)
    stage = {
        "kind": "jsonl" if as_jsonl else "dir",
        "path": str(source),
        "lowercase": not keep_case,
        "stopwords": sorted(stop),
        "min_token_len": min_token_len,
        "min_doc_freq": min_doc_freq,
        "n_docs": matrix.n_docs,
        "n_terms": matrix.n_terms,
        "total_tokens": matrix.total_tokens(),
    }
    with open(work / CORPUS_STAGE, "w", encoding="utf-8") as fh:
        json.dump(stage, fh, indent=2)
    click.echo(
        f"ingested {matrix.n_docs} documents, {matrix.n_terms} vocabulary terms, "
        f"{matrix.total_tokens()} retained tokens -> {work / CORPUS_STAGE}"
    )


@main.command()
@click.option("--preset", "preset_name", type=click.Choice(PRESET_NAMES), default=None,
              help="Named ensemble preset; otherwise give --mode.")
@click.option("--mode", type=click.Choice(MODES), default=None)
@click.option("--members", type=int, default=10, show_default=True)
@click.option("--k", type=int, default=20, show_default=True)
@click.option("--alpha", type=float, default=None, help="Default: 5/k.")
@click.option("--beta", type=float, default=DEFAULT_BETA, show_default=True)
@click.option("--iterations", type=int, default=DEFAULT_ITERATIONS, show_default=True)
@click.option("--values", default=None,
              help="Comma-separated parameter values for vary_* modes.")
@click.option("--base-seed", type=int, default=0, show_default=True)
@click.option("--pin-seed", is_flag=True,
              help="Use the same seed for every member of a vary_* ensemble.")
@click.option("--k-min", type=int, default=20, show_default=True,
              help="E5 preset: smallest topic count.")
@click.option("--k-max", type=int, default=50, show_default=True,
              help="E5 preset: largest topic count.")
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--workdir", default="topicuq-work", show_default=True)
def run(preset_name, mode, members, k, alpha, beta, iterations, values,
        base_seed, pin_seed, k_min, k_max, jobs, workdir):
    """Train an LDA ensemble over the ingested corpus."""
    work = _workdir(workdir)
    corpus_stage = _read_stage(work, CORPUS_STAGE)
    documents, _ = _load_documents_stage(corpus_stage)
    vocabulary, matrix = build_matrix(
        documents, min_doc_freq=corpus_stage["min_doc_freq"]
    )

    if (preset_name is None) == (mode is None):
        raise _fail("give exactly one of --preset or --mode")
    if preset_name is not None:
        spec = preset(
            preset_name,
            k=k,
            members=members,
            iterations=iterations,
            base_seed=base_seed,
            k_range=(k_min, k_max),
            pin_seed=pin_seed,
        )
    else:
        parameter_values = None
        if values is not None:
            parsed = [float(v) for v in values.split(",") if v]
            if mode == "vary_k":
                parsed = [int(v) for v in parsed]
            parameter_values = tuple(parsed)
        base = LdaConfig(k=k, alpha=alpha, beta=beta, iterations=iterations,
                         seed=base_seed)
        spec = EnsembleSpec(
            mode=mode,
            base_config=base,
            members=members,
            parameter_values=parameter_values,
            base_seed=base_seed,
            pin_seed=pin_seed,
        )

    started = time.perf_counter()
    ensemble = generate(matrix, spec, vocabulary, n_jobs=jobs)
    elapsed = time.perf_counter() - started
    _write_ensemble_stage(work, ensemble)
    click.echo(
        f"trained {len(ensemble.members)} models ({ensemble.total_topics} topics) "
        f"in {elapsed:.1f}s -> {work / ENSEMBLE_STAGE}"
    )


@main.command("import-mallet")
@click.option("--doc-topics", "doc_topics", multiple=True, required=True,
              type=click.Path(exists=True),
              help="One doc-topics file per member, in member order.")
@click.option("--topic-word-weights", "topic_word_weights", multiple=True,
              required=True, type=click.Path(exists=True),
              help="One topic-word-weights file per member, matching order.")
@click.option("--workdir", default="topicuq-work", show_default=True)
def import_mallet_command(doc_topics, topic_word_weights, workdir):
    """Build an ensemble from external MALLET output files."""
    from .mallet import import_mallet

    work = _workdir(workdir)
    ensemble = import_mallet(list(doc_topics), list(topic_word_weights))
    _write_ensemble_stage(work, ensemble)
    click.echo(
        f"imported {len(ensemble.members)} models ({ensemble.total_topics} topics, "
        f"{len(ensemble.vocabulary)} union terms) -> {work / ENSEMBLE_STAGE}"
    )


@main.command()
@click.option("--workdir", default="topicuq-work", show_default=True)
def metrics(workdir):
    """Compute the similarity matrix and both uncertainty measures."""
    work = _workdir(workdir)
    ensemble = _load_ensemble_stage(work)
    sim, records = compute_all(ensemble)
    write_similarity_binary(sim, work / SIMILARITY_STAGE)
    with open(work / RECORDS_STAGE, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "records": [
                    [r.ref.model_index, r.ref.topic_index, r.u_match, r.u_exist]
                    for r in records
                ]
            },
            fh,
        )
    u_match = np.array([r.u_match for r in records])
    u_exist = np.array([r.u_exist for r in records])
    click.echo(
        f"scored {len(records)} topics: mean U_M {u_match.mean():.4f}, "
        f"mean U_E {u_exist.mean():.4f} -> {work / SIMILARITY_STAGE}, "
        f"{work / RECORDS_STAGE}"
    )


@main.command()
@click.option("--perplexity", type=float, default=30.0, show_default=True)
@click.option("--iterations", type=int, default=1000, show_default=True)
@click.option("--learning-rate", type=float, default=200.0, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workdir", default="topicuq-work", show_default=True)
def embed(perplexity, iterations, learning_rate, seed, workdir):
    """Lay out all topics in 2D from the similarity matrix."""
    work = _workdir(workdir)
    ensemble = _load_ensemble_stage(work)
    sim, _records = _load_metrics_stage(work, ensemble)
    n = len(sim.refs)
    if not perplexity < (n - 1) / 3:
        raise _fail(
            f"perplexity {perplexity} too large for {n} topics; "
            f"needs perplexity < {(n - 1) / 3:.2f}"
        )
    config = EmbeddingConfig(
        perplexity=perplexity,
        iterations=iterations,
        learning_rate=learning_rate,
        seed=seed,
    )
    embedding = embed_similarity(sim, config)
    stage = {
        "refs": [[r.model_index, r.topic_index] for r in embedding.refs],
        "coords": [[float(x), float(y)] for x, y in embedding.coords],
        "final_kl": embedding.final_kl,
        "perplexity": perplexity,
        "seed": seed,
    }
    with open(work / EMBEDDING_STAGE, "w", encoding="utf-8") as fh:
        json.dump(stage, fh)
    click.echo(
        f"embedded {n} topics (final KL {embedding.final_kl:.4f}) "
        f"-> {work / EMBEDDING_STAGE}"
    )


def _assemble_from_workdir(workdir: Path) -> Project:
    corpus_stage = _read_stage(workdir, CORPUS_STAGE)
    ensemble = _load_ensemble_stage(workdir)
    sim, records = _load_metrics_stage(workdir, ensemble)
    embedding_stage = _read_stage(workdir, EMBEDDING_STAGE)
    embedding = Embedding(
        refs=tuple(TopicRef(m, t) for m, t in embedding_stage["refs"]),
        coords=np.asarray(embedding_stage["coords"], dtype=np.float64),
        final_kl=embedding_stage["final_kl"],
    )
    documents = None
    corpus_ref = None
    try:
        documents, preprocessing = _load_documents_stage(corpus_stage)
        corpus_ref = CorpusRef(
            kind=corpus_stage["kind"],
            path=corpus_stage["path"],
            preprocessing=preprocessing,
            min_doc_freq=corpus_stage["min_doc_freq"],
        )
    except click.ClickException:
        pass  # corpus moved: serve without document views
    project = Project(
        id=workdir.name,
        corpus_ref=corpus_ref,
        vocabulary=ensemble.vocabulary,
        ensemble=ensemble,
        similarity=sim,
        records=records,
        embedding=embedding,
        documents=documents,
    )
    project.validate()
    return project


@main.command()
@click.option("--port", type=int, default=None,
              help=f"Default: ${DEFAULT_PORT_ENV} or 8765.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--project", "project_path", type=click.Path(exists=True), default=None,
              help="Serve a saved project file instead of the workdir stages.")
@click.option("--workdir", default="topicuq-work", show_default=True)
@click.option("--save", "save_path", type=click.Path(), default=None,
              help="Also write the assembled project to this file.")
def serve(port, host, project_path, workdir, save_path):
    """Serve the HTTP API over the assembled project."""
    import uvicorn

    if project_path is not None:
        project = open_project(project_path)
    else:
        project = _assemble_from_workdir(Path(workdir))
    if save_path is not None:
        save_project(project, save_path)
        click.echo(f"saved project -> {save_path}")
    if port is None:
        port = int(os.environ.get(DEFAULT_PORT_ENV, "8765"))
    app = create_app(project)
    click.echo(f"serving project {project.id!r} on http://{host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), required=True)
@click.option("--out", "out_dir", default=None,
              help="Output directory; defaults to the workdir.")
@click.option("--workdir", default="topicuq-work", show_default=True)
def export(fmt, out_dir, workdir):
    """Export similarity, uncertainty, and layout artifacts."""
    work = _workdir(workdir)
    ensemble = _load_ensemble_stage(work)
    sim, records = _load_metrics_stage(work, ensemble)
    out = Path(out_dir) if out_dir else work
    out.mkdir(parents=True, exist_ok=True)
    written = []
    embedding = None
    if (work / EMBEDDING_STAGE).exists():
        stage = _read_stage(work, EMBEDDING_STAGE)
        embedding = Embedding(
            refs=tuple(TopicRef(m, t) for m, t in stage["refs"]),
            coords=np.asarray(stage["coords"], dtype=np.float64),
            final_kl=stage["final_kl"],
        )
    if fmt == "csv":
        write_similarity_csv(sim, out / "similarity.csv")
        written.append(out / "similarity.csv")
        write_uncertainty_csv(records, out / "uncertainty.csv")
        written.append(out / "uncertainty.csv")
        if embedding is not None:
            write_embedding_csv(embedding, out / "embedding.csv")
            written.append(out / "embedding.csv")
    else:
        payload = {
            "records": [
                {
                    "model_index": r.ref.model_index,
                    "topic_index": r.ref.topic_index,
                    "u_match": r.u_match,
                    "u_exist": r.u_exist,
                }
                for r in records
            ],
            "similarity": [[float(v) for v in row] for row in sim.values],
            "refs": [[r.model_index, r.topic_index] for r in sim.refs],
        }
        if embedding is not None:
            payload["embedding"] = {
                "coords": [[float(x), float(y)] for x, y in embedding.coords],
                "final_kl": embedding.final_kl,
            }
        with open(out / "export.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
        written.append(out / "export.json")
    click.echo("wrote " + ", ".join(str(p) for p in written))


@main.command()
@click.option("--preset", "preset_name", type=click.Choice(PRESET_NAMES),
              default="E1", show_default=True)
@click.option("--true-k", type=int, default=10, show_default=True)
@click.option("--vocab-size", type=int, default=200, show_default=True)
@click.option("--docs", type=int, default=60, show_default=True)
@click.option("--doc-length", type=int, default=150, show_default=True)
@click.option("--separation", type=float, default=0.8, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--k", type=int, default=12, show_default=True,
              help="Trained topic count per member.")
@click.option("--members", type=int, default=10, show_default=True)
@click.option("--iterations", type=int, default=300, show_default=True)
@click.option("--pin-seed", is_flag=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--json-out", type=click.Path(), default=None)
def bench(preset_name, true_k, vocab_size, docs, doc_length, separation, seed,
          k, members, iterations, pin_seed, jobs, json_out):
    """Run a synthetic ground-truth experiment and print the report."""
    spec = SyntheticSpec(
        true_k=true_k,
        vocab_size=vocab_size,
        n_docs=docs,
        doc_length=doc_length,
        separation=separation,
        seed=seed,
    )
    report = run_experiment(
        preset_name,
        spec,
        k=k,
        members=members,
        iterations=iterations,
        pin_seed=pin_seed,
        n_jobs=jobs,
    )
    click.echo(format_report(report))
    if json_out is not None:
        write_report_json(report, json_out)
        click.echo(f"wrote {json_out}")


if __name__ == "__main__":
    main()
