// Ensemble scatter: one point per filtered topic at its server-computed
// embedding position, sized by uncertainty, colored by member; group hulls
// are drawn from server-provided vertices.

import {
  DEFAULT_RADIUS,
  RadiusScale,
  memberColors,
  radiusFor,
} from "../encoding.js";
import { ViewState } from "../state.js";
import { TopicRef, topicKey } from "../types.js";

export interface ScatterPoint {
  ref: TopicRef;
  key: string;
  x: number;
  y: number;
  radius: number;
  color: string;
  selected: boolean;
  /** Shown on hover. */
  topTerms: readonly string[];
}

export interface HullPolygon {
  id: string;
  label: string;
  /** Server-computed member coverage in [0, 1], echoed verbatim. */
  completeness: number;
  completenessLabel: string;
  /** Server-provided convex hull vertices, in draw order. */
  vertices: readonly number[][];
}

export interface ScatterModel {
  points: ScatterPoint[];
  hulls: HullPolygon[];
  /** Set when the filter matched nothing; views show this instead. */
  emptyMessage: string | null;
}

export function buildScatter(
  state: ViewState,
  scale: RadiusScale = DEFAULT_RADIUS,
): ScatterModel {
  const colors = memberColors(
    state.memberCount,
    state.colorMode,
    state.parameterValues,
  );
  const points = state.filteredTopics().map((topic): ScatterPoint => {
    const ref: TopicRef = { model: topic.model_index, topic: topic.topic_index };
    return {
      ref,
      key: topicKey(ref),
      x: topic.x,
      y: topic.y,
      radius: radiusFor(topic[state.sizeMeasure], scale),
      color: colors[topic.model_index] ?? "#888888",
      selected: state.isSelected(ref),
      topTerms: topic.top_terms,
    };
  });
  const hulls = state.groups.map((group): HullPolygon => {
    return {
      id: group.id,
      label: group.label,
      completeness: group.completeness,
      completenessLabel: `${Math.round(group.completeness * 100)}%`,
      vertices: group.hull,
    };
  });
  return {
    points,
    hulls,
    emptyMessage:
      points.length === 0 ? "no topics match the current filter" : null,
  };
}
