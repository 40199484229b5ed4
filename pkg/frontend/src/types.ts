// Payload shapes of the ensemble server's JSON API. Field names mirror the
// wire format exactly so responses can be used without translation.

export interface TopicRef {
  model: number;
  topic: number;
}

/** Canonical string key for a topic, used in sets and maps. */
export function topicKey(ref: TopicRef): string {
  return `${ref.model}:${ref.topic}`;
}

export interface WireRef {
  model_index: number;
  topic_index: number;
}

export function refOf(wire: WireRef): TopicRef {
  return { model: wire.model_index, topic: wire.topic_index };
}

export interface EnsembleSpecInfo {
  mode: string;
  members: number;
  base_k: number;
  base_alpha: number;
  base_beta: number;
  iterations: number;
  parameter_values: number[] | null;
}

export interface MeasureSummary {
  mean: number;
  median: number;
  stable: number;
  grey: number;
  unstable: number;
}

export interface ViewConfigInfo {
  top_n_terms: number;
  stable_threshold: number;
  unstable_threshold: number;
  color_map: string;
  highlight_rule: string;
}

export interface ProjectInfo {
  id: string;
  revision: number;
  members: number;
  model_sizes: number[];
  total_topics: number;
  n_terms: number;
  n_documents: number | null;
  spec: EnsembleSpecInfo | null;
  import_info: { tool: string; files: number } | null;
  summary: { u_match: MeasureSummary; u_exist: MeasureSummary };
  view_config: ViewConfigInfo;
}

export interface TopicSummary extends WireRef {
  x: number;
  y: number;
  u_match: number;
  u_exist: number;
  top_terms: string[];
}

export interface TopicsResponse {
  topics: TopicSummary[];
}

export interface TopicDetail extends TopicSummary {
  /** Full term distribution as decimal strings, preserving precision. */
  phi: string[];
}

export interface SimilarityMatch extends WireRef {
  similarity: number;
}

export interface SimilarityResponse {
  anchor: WireRef;
  matches: SimilarityMatch[];
}

export interface HeatmapRow extends WireRef {
  values: number[];
}

export interface HeatmapResponse {
  terms: string[];
  average_relevance: number[];
  rows: HeatmapRow[];
}

export interface TopicDocumentRow {
  doc_id: string;
  anchor_value: number;
  theta: number[];
}

export interface TopicDocumentsResponse {
  topic: WireRef;
  rows: TopicDocumentRow[];
}

export interface HighlightSpan {
  start: number;
  end: number;
  topic: number;
  color: number;
}

export interface DocumentResponse {
  doc_id: string;
  model_index: number;
  rule: string;
  text: string;
  spans: HighlightSpan[];
}

export interface GroupInfo {
  id: string;
  label: string;
  members: WireRef[];
  completeness: number;
  hull: number[][];
  revision: number;
}

export interface GroupsResponse {
  revision: number;
  groups: GroupInfo[];
}

export interface EmbeddingPoint extends WireRef {
  x: number;
  y: number;
}

export interface EmbeddingResponse {
  final_kl: number;
  points: EmbeddingPoint[];
}

export interface ApiErrorDetail {
  type?: string;
  message?: string;
  /** Present on conflict errors: the server's current revision. */
  revision?: number;
}
