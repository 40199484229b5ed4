// Close-reading view: the raw document text with topic-colored highlight
// spans. Span offsets and color slots come from the server untouched;
// text between spans (filtered tokens, punctuation) stays plain.

import { slotColor } from "../encoding.js";
import { DocumentResponse, HighlightSpan } from "../types.js";

export interface TextSegment {
  text: string;
  start: number;
  end: number;
  highlighted: boolean;
  topic: number | null;
  color: string | null;
}

export interface DocumentModel {
  docId: string;
  model: number;
  rule: string;
  segments: TextSegment[];
  /** The server's spans, echoed verbatim for downstream use. */
  spans: readonly HighlightSpan[];
}

export function buildDocumentView(payload: DocumentResponse): DocumentModel {
  const text = payload.text;
  const segments: TextSegment[] = [];
  let cursor = 0;
  const plain = (start: number, end: number) => {
    if (end > start) {
      segments.push({
        text: text.slice(start, end),
        start,
        end,
        highlighted: false,
        topic: null,
        color: null,
      });
    }
  };
  for (const span of payload.spans) {
    if (span.start < cursor || span.end > text.length || span.end < span.start) {
      throw new Error(`malformed highlight span ${span.start}..${span.end}`);
    }
    plain(cursor, span.start);
    segments.push({
      text: text.slice(span.start, span.end),
      start: span.start,
      end: span.end,
      highlighted: true,
      topic: span.topic,
      color: slotColor(span.color),
    });
    cursor = span.end;
  }
  plain(cursor, text.length);
  return {
    docId: payload.doc_id,
    model: payload.model_index,
    rule: payload.rule,
    segments,
    spans: payload.spans,
  };
}
