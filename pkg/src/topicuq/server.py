"""HTTP JSON API over a single loaded project.

Read endpoints are pure views over the project; the only mutating family
is group CRUD, serialized under a lock and guarded by optimistic
concurrency: every mutation must carry the current project revision and
conflicts are rejected with 409 so the client refreshes.  Error mapping:
404 for unknown refs/ids and for views whose backing data the project
lacks (typed ``capability`` detail), 400 for malformed filters or bodies.

Full-precision payloads (phi rows) are serialized as decimal strings;
everything else uses plain JSON floats.
"""

from __future__ import annotations

import threading
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import HTTPException
from fastapi.responses import JSONResponse

from .analysis import FilterSpec, apply_filter, ensemble_summary, make_group
from .docviews import CapabilityError, highlight, rank_documents
from .ensemble import TopicRef
from .project import Project

__all__ = ["DEFAULT_PORT_ENV", "create_app"]

DEFAULT_PORT_ENV = "TOPICUQ_PORT"


def _bad_request(message: str):
    return HTTPException(status_code=400, detail={"type": "bad_request", "message": message})


def _not_found(message: str):
    return HTTPException(status_code=404, detail={"type": "not_found", "message": message})


def _capability(message: str):
    return HTTPException(status_code=404, detail={"type": "capability", "message": message})


def _conflict(message: str, revision: int):
    return HTTPException(
        status_code=409,
        detail={"type": "conflict", "message": message, "revision": revision},
    )


def _parse_ref(text: str) -> TopicRef:
    parts = text.split(",")
    if len(parts) != 2:
        raise _bad_request(f"topic ref must be 'model,topic', got {text!r}")
    try:
        return TopicRef(int(parts[0]), int(parts[1]))
    except ValueError:
        raise _bad_request(f"topic ref must be two integers, got {text!r}")


def _parse_float(text: str, name: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise _bad_request(f"{name} must be a number, got {text!r}")


def _parse_int(text: str, name: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise _bad_request(f"{name} must be an integer, got {text!r}")


def _parse_bool(text: str, name: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise _bad_request(f"{name} must be a boolean, got {text!r}")


def create_app(project: Project) -> FastAPI:
    app = FastAPI(title="topic ensemble workbench")
    lock = threading.Lock()
    group_counter = {"next": len(project.groups) + 1}

    coords_by_ref = {
        ref: project.embedding.coords[i] for i, ref in enumerate(project.embedding.refs)
    }
    records_by_ref = {record.ref: record for record in project.records}
    doc_index_by_id = {}
    if project.ensemble.doc_ids is not None:
        doc_index_by_id = {d: i for i, d in enumerate(project.ensemble.doc_ids)}

    def require_ref(ref: TopicRef) -> None:
        if not project.ensemble.contains(ref):
            raise _not_found(f"no topic {ref.model_index},{ref.topic_index}")

    def top_terms(ref: TopicRef, n: int) -> list[str]:
        model = project.ensemble.members[ref.model_index]
        ids = model.top_term_ids(ref.topic_index, n)
        return [project.vocabulary.term_of(int(i)) for i in ids]

    def topic_record_json(ref: TopicRef, n: int) -> dict:
        record = records_by_ref[ref]
        x, y = coords_by_ref[ref]
        return {
            "model_index": ref.model_index,
            "topic_index": ref.topic_index,
            "x": float(x),
            "y": float(y),
            "u_match": record.u_match,
            "u_exist": record.u_exist,
            "top_terms": top_terms(ref, n),
        }

    def group_json(group) -> dict:
        return {
            "id": group.id,
            "label": group.label,
            "members": [
                {"model_index": r.model_index, "topic_index": r.topic_index}
                for r in sorted(group.members)
            ],
            "completeness": group.completeness,
            "hull": [[x, y] for x, y in group.hull],
            "revision": project.revision,
        }

    @app.exception_handler(HTTPException)
    async def on_http_exception(request: Request, exc: HTTPException):
        detail = exc.detail if isinstance(exc.detail, dict) else {"message": str(exc.detail)}
        return JSONResponse(status_code=exc.status_code, content={"detail": detail})

    @app.get("/api/project")
    def get_project():
        ensemble = project.ensemble
        spec = ensemble.spec
        spec_json = None
        if spec is not None:
            spec_json = {
                "mode": spec.mode,
                "members": spec.members,
                "base_k": spec.base_config.k,
                "base_alpha": spec.base_config.alpha,
                "base_beta": spec.base_config.beta,
                "iterations": spec.base_config.iterations,
                "parameter_values": None
                if spec.parameter_values is None
                else list(spec.parameter_values),
            }
        summary = ensemble_summary(
            project.records,
            (project.view_config.stable_threshold, project.view_config.unstable_threshold),
        )
        return {
            "id": project.id,
            "revision": project.revision,
            "members": len(ensemble.members),
            "model_sizes": ensemble.model_sizes(),
            "total_topics": ensemble.total_topics,
            "n_terms": len(project.vocabulary),
            "n_documents": None
            if ensemble.doc_ids is None
            else len(ensemble.doc_ids),
            "spec": spec_json,
            "import_info": ensemble.import_info,
            "summary": {
                measure: {
                    "mean": stats.mean,
                    "median": stats.median,
                    "stable": stats.stable,
                    "grey": stats.grey,
                    "unstable": stats.unstable,
                }
                for measure, stats in summary.items()
            },
            "view_config": {
                "top_n_terms": project.view_config.top_n_terms,
                "stable_threshold": project.view_config.stable_threshold,
                "unstable_threshold": project.view_config.unstable_threshold,
                "color_map": project.view_config.color_map,
                "highlight_rule": project.view_config.highlight_rule,
            },
            "capabilities": {
                "documents": project.documents is not None,
                "theta": project.ensemble.has_theta,
            },
            "embedding_kl": project.embedding.final_kl,
        }

    @app.get("/api/topics")
    def get_topics(
        refs: Optional[str] = None,
        terms: Optional[str] = None,
        top_n: Optional[str] = None,
        u_match_max: Optional[str] = None,
        u_match_min: Optional[str] = None,
        u_exist_max: Optional[str] = None,
        u_exist_min: Optional[str] = None,
    ):
        n = project.view_config.top_n_terms
        if top_n is not None:
            n = _parse_int(top_n, "top_n")
            if n < 1:
                raise _bad_request("top_n must be >= 1")
        result = set(project.ensemble.topic_refs())

        def narrow(spec: FilterSpec):
            nonlocal result
            try:
                result &= apply_filter(
                    spec, project.ensemble, project.records, project.similarity
                )
            except ValueError as exc:
                raise _bad_request(str(exc))

        if refs is not None:
            selected = frozenset(_parse_ref(r) for r in refs.split(";") if r)
            for ref in selected:
                require_ref(ref)
            narrow(FilterSpec(selected_refs=selected))
        if terms is not None:
            term_list = tuple(t for t in terms.split(",") if t)
            if not term_list:
                raise _bad_request("terms parameter is empty")
            narrow(FilterSpec(terms=term_list, top_n=n))
        for param, text, measure, bound in (
            ("u_match_max", u_match_max, "u_match", "u_max"),
            ("u_match_min", u_match_min, "u_match", "u_min"),
            ("u_exist_max", u_exist_max, "u_exist", "u_max"),
            ("u_exist_min", u_exist_min, "u_exist", "u_min"),
        ):
            if text is None:
                continue
            value = _parse_float(text, param)
            if not 0.0 <= value <= 1.0:
                raise _bad_request(f"{param} must lie in [0, 1]")
            narrow(FilterSpec(u_measure=measure, **{bound: value}))
        ordered = [ref for ref in project.ensemble.topic_refs() if ref in result]
        return {"topics": [topic_record_json(ref, n) for ref in ordered]}

    @app.get("/api/topics/{m}/{t}")
    def get_topic(m: int, t: int):
        ref = TopicRef(m, t)
        require_ref(ref)
        record = records_by_ref[ref]
        phi_row = project.ensemble.phi_of(ref)
        x, y = coords_by_ref[ref]
        n = project.view_config.top_n_terms
        return {
            "model_index": ref.model_index,
            "topic_index": ref.topic_index,
            "u_match": record.u_match,
            "u_exist": record.u_exist,
            "x": float(x),
            "y": float(y),
            "top_terms": top_terms(ref, n),
            "phi": [repr(float(v)) for v in phi_row],
        }

    @app.get("/api/similarity")
    def get_similarity(
        anchor: Optional[str] = None,
        best_per_model: Optional[str] = None,
        min: Optional[str] = None,  # noqa: A002 - endpoint contract name
    ):
        if anchor is None:
            raise _bad_request("anchor=m,t is required")
        ref = _parse_ref(anchor)
        require_ref(ref)
        per_model = _parse_bool(best_per_model, "best_per_model") if best_per_model else False
        threshold = _parse_float(min, "min") if min is not None else None
        if not per_model and threshold is None:
            raise _bad_request("need best_per_model=true or min=<similarity>")
        if threshold is not None and not 0.0 <= threshold <= 1.0:
            raise _bad_request("min must lie in [0, 1]")
        spec = FilterSpec(
            similar_to=ref,
            similarity_threshold=threshold,
            per_model_best=per_model,
        )
        try:
            matches = apply_filter(
                spec, project.ensemble, project.records, project.similarity
            )
        except ValueError as exc:
            raise _bad_request(str(exc))
        row = project.similarity.values[project.similarity.index_of(ref)]
        scored = sorted(
            (
                (float(row[project.similarity.index_of(other)]), other)
                for other in matches
            ),
            key=lambda pair: (-pair[0], pair[1]),
        )
        return {
            "anchor": {"model_index": ref.model_index, "topic_index": ref.topic_index},
            "matches": [
                {
                    "model_index": other.model_index,
                    "topic_index": other.topic_index,
                    "similarity": s,
                }
                for s, other in scored
            ],
        }

    @app.get("/api/heatmap")
    def get_heatmap(refs: Optional[str] = None, top_n: Optional[str] = None):
        if refs is None:
            raise _bad_request("refs=m,t;m,t;... is required")
        selected = [_parse_ref(r) for r in refs.split(";") if r]
        if not selected:
            raise _bad_request("refs parameter is empty")
        for ref in selected:
            require_ref(ref)
        n = project.view_config.top_n_terms
        if top_n is not None:
            n = _parse_int(top_n, "top_n")
            if n < 1:
                raise _bad_request("top_n must be >= 1")
        term_ids: set[int] = set()
        for ref in selected:
            model = project.ensemble.members[ref.model_index]
            term_ids.update(int(i) for i in model.top_term_ids(ref.topic_index, n))
        rows = np.vstack([project.ensemble.phi_of(ref) for ref in selected])
        ids = sorted(term_ids)
        relevance = rows[:, ids].mean(axis=0)
        # Columns sorted by mean probability over the selected topics,
        # descending; alphabetical tie-break keeps the order deterministic.
        order = sorted(
            range(len(ids)),
            key=lambda j: (-relevance[j], project.vocabulary.term_of(ids[j])),
        )
        ordered_ids = [ids[j] for j in order]
        return {
            "terms": [project.vocabulary.term_of(i) for i in ordered_ids],
            "average_relevance": [float(relevance[j]) for j in order],
            "rows": [
                {
                    "model_index": ref.model_index,
                    "topic_index": ref.topic_index,
                    "values": [float(v) for v in rows[i, ordered_ids]],
                }
                for i, ref in enumerate(selected)
            ],
        }

    @app.get("/api/topics/{m}/{t}/documents")
    def get_topic_documents(m: int, t: int, limit: Optional[str] = None):
        ref = TopicRef(m, t)
        require_ref(ref)
        max_rows = 20
        if limit is not None:
            max_rows = _parse_int(limit, "limit")
            if max_rows < 1:
                raise _bad_request("limit must be >= 1")
        try:
            ranking = rank_documents(ref, project.ensemble, limit=max_rows)
        except CapabilityError as exc:
            raise _capability(str(exc))
        return {
            "topic": {"model_index": m, "topic_index": t},
            "rows": [
                {
                    "doc_id": doc_id,
                    "anchor_value": float(theta_row[t]),
                    "theta": [float(v) for v in theta_row],
                }
                for doc_id, theta_row in ranking.rows
            ],
        }

    @app.get("/api/documents/{doc_id}")
    def get_document(doc_id: str, model: Optional[str] = None, rule: Optional[str] = None):
        if model is None:
            raise _bad_request("model=<index> is required")
        m = _parse_int(model, "model")
        if not 0 <= m < len(project.ensemble.members):
            raise _not_found(f"no model {m}")
        if project.documents is None:
            raise _capability(
                "document text is unavailable: the corpus source was not found "
                "when this project was opened"
            )
        document = project.document_by_id(doc_id)
        if document is None:
            raise _not_found(f"no document {doc_id!r}")
        chosen_rule = rule if rule is not None else project.view_config.highlight_rule
        if chosen_rule not in ("contextual", "global"):
            raise _bad_request(f"unknown highlight rule {chosen_rule!r}")
        topic_model = project.ensemble.members[m]
        theta_row = None
        if chosen_rule == "contextual":
            if topic_model.theta is None or doc_id not in doc_index_by_id:
                raise _capability(
                    "contextual highlighting needs document-topic distributions; "
                    "retry with rule=global"
                )
            theta_row = topic_model.theta[doc_index_by_id[doc_id]]
        try:
            result = highlight(
                document,
                topic_model,
                project.vocabulary,
                theta_row=theta_row,
                rule=chosen_rule,
            )
        except CapabilityError as exc:
            raise _capability(str(exc))
        return {
            "doc_id": result.doc_id,
            "model_index": m,
            "rule": chosen_rule,
            "text": result.raw_text,
            "spans": [
                {"start": s.start, "end": s.end, "topic": s.topic, "color": s.color}
                for s in result.spans
            ],
        }

    def parse_members(raw) -> frozenset[TopicRef]:
        if not isinstance(raw, list) or not raw:
            raise _bad_request("members must be a non-empty list of [model, topic]")
        members = set()
        for item in raw:
            if not isinstance(item, list) or len(item) != 2:
                raise _bad_request(f"member {item!r} is not a [model, topic] pair")
            try:
                ref = TopicRef(int(item[0]), int(item[1]))
            except (TypeError, ValueError):
                raise _bad_request(f"member {item!r} is not a pair of integers")
            if not project.ensemble.contains(ref):
                raise _not_found(f"no topic {ref.model_index},{ref.topic_index}")
            members.add(ref)
        return frozenset(members)

    def check_revision(body: dict) -> None:
        if "revision" not in body:
            raise _bad_request("mutations must carry the current revision")
        if body["revision"] != project.revision:
            raise _conflict(
                f"revision {body['revision']} is stale (current {project.revision}); refresh",
                project.revision,
            )

    @app.post("/api/groups", status_code=201)
    async def create_group(request: Request):
        body = await _json_body(request)
        with lock:
            check_revision(body)
            label = body.get("label")
            if not isinstance(label, str) or not label:
                raise _bad_request("label must be a non-empty string")
            members = parse_members(body.get("members"))
            group_id = f"g{group_counter['next']}"
            group = make_group(
                group_id, label, members, project.ensemble, project.embedding
            )
            group_counter["next"] += 1
            project.groups[group_id] = group
            project.revision += 1
            return group_json(group)

    @app.get("/api/groups")
    def list_groups():
        return {
            "revision": project.revision,
            "groups": [group_json(g) for g in project.groups.values()],
        }

    @app.put("/api/groups/{group_id}")
    async def update_group(group_id: str, request: Request):
        body = await _json_body(request)
        with lock:
            if group_id not in project.groups:
                raise _not_found(f"no group {group_id!r}")
            check_revision(body)
            current = project.groups[group_id]
            label = body.get("label", current.label)
            if not isinstance(label, str) or not label:
                raise _bad_request("label must be a non-empty string")
            members = (
                parse_members(body["members"])
                if "members" in body
                else current.members
            )
            group = make_group(
                group_id, label, members, project.ensemble, project.embedding
            )
            project.groups[group_id] = group
            project.revision += 1
            return group_json(group)

    @app.delete("/api/groups/{group_id}")
    def delete_group(group_id: str, revision: Optional[str] = None):
        with lock:
            if group_id not in project.groups:
                raise _not_found(f"no group {group_id!r}")
            if revision is None:
                raise _bad_request("mutations must carry the current revision")
            rev = _parse_int(revision, "revision")
            if rev != project.revision:
                raise _conflict(
                    f"revision {rev} is stale (current {project.revision}); refresh",
                    project.revision,
                )
            del project.groups[group_id]
            project.revision += 1
            return {"deleted": group_id, "revision": project.revision}

    @app.get("/api/embedding")
    def get_embedding():
        return {
            "final_kl": project.embedding.final_kl,
            "points": [
                {
                    "model_index": ref.model_index,
                    "topic_index": ref.topic_index,
                    "x": float(x),
                    "y": float(y),
                }
                for ref, (x, y) in zip(project.embedding.refs, project.embedding.coords)
            ],
        }

    return app


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise _bad_request("request body must be JSON")
    if not isinstance(body, dict):
        raise _bad_request("request body must be a JSON object")
    return body
