// Topic-document view: one stacked horizontal bar per document, widths
// taken from the document's topic mixture. The anchor topic's segment
// always comes first and is emphasized.

import { slotColor, topicColorSlot } from "../encoding.js";
import { TopicDocumentsResponse } from "../types.js";

export interface BarSegment {
  topic: number;
  color: string;
  /** Mixture weight from the server, used directly as segment width. */
  value: number;
  anchor: boolean;
}

export interface DocumentBar {
  docId: string;
  segments: BarSegment[];
  /** Clicking the bar opens this document in the close-reading view. */
  open: { docId: string; model: number };
}

export interface LegendEntry {
  topic: number;
  color: string;
}

export interface BarsModel {
  anchorTopic: number;
  model: number;
  rows: DocumentBar[];
  legend: LegendEntry[];
}

export const MAX_BAR_DOCUMENTS = 20;

export function buildDocumentBars(payload: TopicDocumentsResponse): BarsModel {
  const anchor = payload.topic.topic_index;
  const model = payload.topic.model_index;
  const rows = payload.rows.slice(0, MAX_BAR_DOCUMENTS).map((row): DocumentBar => {
    const segments: BarSegment[] = [];
    const push = (topic: number, anchorSegment: boolean) => {
      const value = row.theta[topic];
      if (value !== undefined) {
        segments.push({
          topic,
          color: slotColor(topicColorSlot(topic)),
          value,
          anchor: anchorSegment,
        });
      }
    };
    push(anchor, true);
    for (let topic = 0; topic < row.theta.length; topic++) {
      if (topic !== anchor) {
        push(topic, false);
      }
    }
    return { docId: row.doc_id, segments, open: { docId: row.doc_id, model } };
  });
  const topicCount = payload.rows[0]?.theta.length ?? 0;
  const legend = Array.from({ length: topicCount }, (_, topic): LegendEntry => {
    return { topic, color: slotColor(topicColorSlot(topic)) };
  });
  return { anchorTopic: anchor, model, rows, legend };
}
