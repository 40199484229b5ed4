// Typed client for the ensemble server. All data the UI shows comes through
// this module; the client never reads files or computes metric values itself.

import {
  ApiErrorDetail,
  DocumentResponse,
  EmbeddingResponse,
  GroupInfo,
  GroupsResponse,
  HeatmapResponse,
  ProjectInfo,
  SimilarityResponse,
  TopicDetail,
  TopicDocumentsResponse,
  TopicRef,
  TopicsResponse,
} from "./types.js";

/** Performs one HTTP exchange and returns the decoded JSON body. */
export type Transport = (
  method: string,
  path: string,
  body?: unknown,
) => Promise<unknown>;

export class HttpError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: ApiErrorDetail,
  ) {
    super(detail.message ?? `HTTP ${status}`);
    this.name = "HttpError";
  }
}

/** Default transport backed by fetch; throws HttpError on non-2xx. */
export function fetchTransport(baseUrl: string): Transport {
  const root = baseUrl.replace(/\/$/, "");
  return async (method, path, body) => {
    const response = await fetch(root + path, {
      method,
      headers: body === undefined ? {} : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload: unknown = await response.json();
    if (!response.ok) {
      const detail = (payload as { detail?: ApiErrorDetail }).detail ?? {};
      throw new HttpError(response.status, detail);
    }
    return payload;
  };
}

export interface TopicFilterQuery {
  refs?: TopicRef[];
  terms?: string[];
  topN?: number;
  uMatchMax?: number;
  uMatchMin?: number;
  uExistMax?: number;
  uExistMin?: number;
}

function refParam(refs: TopicRef[]): string {
  return refs.map((r) => `${r.model},${r.topic}`).join(";");
}

function query(params: Record<string, string | undefined>): string {
  const parts: string[] = [];
  for (const [key, value] of Object.entries(params)) {
    if (value !== undefined) {
      parts.push(`${key}=${encodeURIComponent(value)}`);
    }
  }
  return parts.length === 0 ? "" : `?${parts.join("&")}`;
}

export class ApiClient {
  constructor(private readonly transport: Transport) {}

  project(): Promise<ProjectInfo> {
    return this.transport("GET", "/api/project") as Promise<ProjectInfo>;
  }

  topics(filter: TopicFilterQuery = {}): Promise<TopicsResponse> {
    const path =
      "/api/topics" +
      query({
        refs: filter.refs === undefined ? undefined : refParam(filter.refs),
        terms: filter.terms?.join(","),
        top_n: filter.topN?.toString(),
        u_match_max: filter.uMatchMax?.toString(),
        u_match_min: filter.uMatchMin?.toString(),
        u_exist_max: filter.uExistMax?.toString(),
        u_exist_min: filter.uExistMin?.toString(),
      });
    return this.transport("GET", path) as Promise<TopicsResponse>;
  }

  topic(ref: TopicRef): Promise<TopicDetail> {
    const path = `/api/topics/${ref.model}/${ref.topic}`;
    return this.transport("GET", path) as Promise<TopicDetail>;
  }

  similarity(
    anchor: TopicRef,
    options: { bestPerModel?: boolean; min?: number } = {},
  ): Promise<SimilarityResponse> {
    const path =
      "/api/similarity" +
      query({
        anchor: `${anchor.model},${anchor.topic}`,
        best_per_model: options.bestPerModel ? "true" : undefined,
        min: options.min?.toString(),
      });
    return this.transport("GET", path) as Promise<SimilarityResponse>;
  }

  heatmap(refs: TopicRef[], topN?: number): Promise<HeatmapResponse> {
    const path =
      "/api/heatmap" + query({ refs: refParam(refs), top_n: topN?.toString() });
    return this.transport("GET", path) as Promise<HeatmapResponse>;
  }

  topicDocuments(
    ref: TopicRef,
    limit?: number,
  ): Promise<TopicDocumentsResponse> {
    const path =
      `/api/topics/${ref.model}/${ref.topic}/documents` +
      query({ limit: limit?.toString() });
    return this.transport("GET", path) as Promise<TopicDocumentsResponse>;
  }

  document(
    docId: string,
    model: number,
    rule?: string,
  ): Promise<DocumentResponse> {
    const path =
      `/api/documents/${encodeURIComponent(docId)}` +
      query({ model: model.toString(), rule });
    return this.transport("GET", path) as Promise<DocumentResponse>;
  }

  groups(): Promise<GroupsResponse> {
    return this.transport("GET", "/api/groups") as Promise<GroupsResponse>;
  }

  createGroup(
    revision: number,
    label: string,
    members: TopicRef[],
  ): Promise<GroupInfo> {
    const body = {
      revision,
      label,
      members: members.map((r) => [r.model, r.topic]),
    };
    return this.transport("POST", "/api/groups", body) as Promise<GroupInfo>;
  }

  updateGroup(
    groupId: string,
    revision: number,
    changes: { label?: string; members?: TopicRef[] },
  ): Promise<GroupInfo> {
    const body: Record<string, unknown> = { revision };
    if (changes.label !== undefined) {
      body.label = changes.label;
    }
    if (changes.members !== undefined) {
      body.members = changes.members.map((r) => [r.model, r.topic]);
    }
    const path = `/api/groups/${encodeURIComponent(groupId)}`;
    return this.transport("PUT", path, body) as Promise<GroupInfo>;
  }

  deleteGroup(
    groupId: string,
    revision: number,
  ): Promise<{ deleted: string; revision: number }> {
    const path =
      `/api/groups/${encodeURIComponent(groupId)}` +
      query({ revision: revision.toString() });
    return this.transport("DELETE", path) as Promise<{
      deleted: string;
      revision: number;
    }>;
  }

  embedding(): Promise<EmbeddingResponse> {
    return this.transport("GET", "/api/embedding") as Promise<EmbeddingResponse>;
  }
}

/**
 * Serializes overlapping async queries: each call gets a sequence number and
 * only the response matching the most recent call is delivered. Responses of
 * superseded calls resolve to null so slow answers never overwrite new state.
 */
export class LatestGate {
  private sequence = 0;

  async run<T>(work: () => Promise<T>): Promise<T | null> {
    const ticket = ++this.sequence;
    const result = await work();
    return ticket === this.sequence ? result : null;
  }
}
