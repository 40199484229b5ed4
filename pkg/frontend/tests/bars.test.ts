import { describe, expect, it } from "vitest";

import { slotColor, topicColorSlot } from "../src/encoding.js";
import { TopicDocumentsResponse } from "../src/types.js";
import { MAX_BAR_DOCUMENTS, buildDocumentBars } from "../src/views/bars.js";
import { fixture } from "./helpers.js";

const PAYLOAD = fixture<TopicDocumentsResponse>("topic_documents");

describe("topic-document bars", () => {
  it("shows at most 20 documents in the server's descending order", () => {
    const model = buildDocumentBars(PAYLOAD);
    expect(model.rows.length).toBeLessThanOrEqual(MAX_BAR_DOCUMENTS);
    expect(model.rows.map((r) => r.docId)).toEqual(
      PAYLOAD.rows.slice(0, MAX_BAR_DOCUMENTS).map((r) => r.doc_id),
    );
    for (let i = 1; i < PAYLOAD.rows.length; i++) {
      expect(PAYLOAD.rows[i]!.anchor_value).toBeLessThanOrEqual(
        PAYLOAD.rows[i - 1]!.anchor_value,
      );
    }
  });

  it("puts the anchor topic's segment first and emphasized", () => {
    const model = buildDocumentBars(PAYLOAD);
    const anchor = PAYLOAD.topic.topic_index;
    for (const row of model.rows) {
      expect(row.segments[0]!.topic).toBe(anchor);
      expect(row.segments[0]!.anchor).toBe(true);
      expect(row.segments.slice(1).every((s) => !s.anchor)).toBe(true);
      const rest = row.segments.slice(1).map((s) => s.topic);
      const expected = PAYLOAD.rows[0]!.theta
        .map((_, t) => t)
        .filter((t) => t !== anchor);
      expect(rest).toEqual(expected);
    }
  });

  it("uses the mixture weights as segment widths verbatim", () => {
    const model = buildDocumentBars(PAYLOAD);
    model.rows.forEach((row, i) => {
      const theta = PAYLOAD.rows[i]!.theta;
      for (const segment of row.segments) {
        expect(segment.value).toBe(theta[segment.topic]);
      }
      expect(row.segments.length).toBe(theta.length);
    });
  });

  it("colors segments and legend from the shared topic slots", () => {
    const model = buildDocumentBars(PAYLOAD);
    const k = PAYLOAD.rows[0]!.theta.length;
    expect(model.legend.map((e) => e.topic)).toEqual(
      Array.from({ length: k }, (_, t) => t),
    );
    for (const entry of model.legend) {
      expect(entry.color).toBe(slotColor(topicColorSlot(entry.topic)));
    }
    for (const segment of model.rows[0]!.segments) {
      expect(segment.color).toBe(slotColor(topicColorSlot(segment.topic)));
    }
  });

  it("wires each bar to open its document in the anchor's model", () => {
    const model = buildDocumentBars(PAYLOAD);
    for (const row of model.rows) {
      expect(row.open).toEqual({
        docId: row.docId,
        model: PAYLOAD.topic.model_index,
      });
    }
  });
});
