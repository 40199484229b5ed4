// Visual encodings shared by every view: the categorical palette, the
// uncertainty-to-radius map, and the sequential ramp for parameter sweeps.

import { EnsembleSpecInfo } from "./types.js";

/**
 * Categorical palette assembled from colorblind-aware base schemes
 * (Okabe-Ito, Tol muted, Tol light), interleaved so neighboring entries
 * differ in both hue and lightness. 24 entries.
 */
export const PALETTE: readonly string[] = [
  "#0072B2",
  "#E69F00",
  "#009E73",
  "#CC79A7",
  "#56B4E9",
  "#D55E00",
  "#F0E442",
  "#332288",
  "#EE8866",
  "#117733",
  "#FFAABB",
  "#88CCEE",
  "#999933",
  "#882255",
  "#44BB99",
  "#DDCC77",
  "#AA4499",
  "#BBCC33",
  "#CC6677",
  "#77AADD",
  "#AAAA00",
  "#44AA99",
  "#EEDD88",
  "#99DDFF",
];

/**
 * Topic color slots cycle over a palette prefix of this size; the server's
 * document highlight spans carry slot indices with the same period, so bar
 * segments and highlighted terms of one topic share a color.
 */
export const TOPIC_SLOT_COUNT = 10;

/** Color of a palette slot; slots beyond the palette wrap around. */
export function slotColor(slot: number): string {
  const color = PALETTE[((slot % PALETTE.length) + PALETTE.length) % PALETTE.length];
  if (color === undefined) {
    throw new Error("palette lookup failed");
  }
  return color;
}

/** Color slot of a topic index, matching the server's span coloring. */
export function topicColorSlot(topic: number): number {
  return topic % TOPIC_SLOT_COUNT;
}

/** Categorical color of an ensemble member. Fixed for the whole session. */
export function memberColor(model: number): string {
  return slotColor(model);
}

export interface RadiusScale {
  rMin: number;
  rMax: number;
}

export const DEFAULT_RADIUS: RadiusScale = { rMin: 2.5, rMax: 14 };

/**
 * Map an uncertainty value in [0, 1] to a point radius. Radius falls
 * linearly with uncertainty; rMin stays positive so even a maximally
 * uncertain topic remains visible and clickable.
 */
export function radiusFor(u: number, scale: RadiusScale = DEFAULT_RADIUS): number {
  if (!(scale.rMin > 0) || !(scale.rMax > scale.rMin)) {
    throw new Error("radius scale needs 0 < rMin < rMax");
  }
  const clamped = Math.min(1, Math.max(0, u));
  return scale.rMax - clamped * (scale.rMax - scale.rMin);
}

// Sequential ramp stops, dark-to-bright, perceptually ordered.
const RAMP: readonly [number, number, number][] = [
  [68, 1, 84],
  [71, 45, 123],
  [59, 82, 139],
  [44, 114, 142],
  [33, 145, 140],
  [40, 174, 128],
  [94, 201, 98],
  [173, 220, 48],
  [253, 231, 37],
];

function hex2(value: number): string {
  return Math.round(value).toString(16).padStart(2, "0");
}

/** Interpolated sequential color for t in [0, 1]. */
export function sequentialColor(t: number): string {
  const clamped = Math.min(1, Math.max(0, t));
  const pos = clamped * (RAMP.length - 1);
  const low = Math.floor(pos);
  const high = Math.min(low + 1, RAMP.length - 1);
  const frac = pos - low;
  const a = RAMP[low];
  const b = RAMP[high];
  if (a === undefined || b === undefined) {
    throw new Error("ramp lookup failed");
  }
  const mix = (i: 0 | 1 | 2) => a[i] + (b[i] - a[i]) * frac;
  return `#${hex2(mix(0))}${hex2(mix(1))}${hex2(mix(2))}`;
}

export type ColorMode = "categorical" | "sequential";

/**
 * Sampling ensembles get one categorical color per member; parameter-sweep
 * ensembles get a sequential ramp keyed to the varied parameter's rank.
 * Imported ensembles without a spec fall back to categorical.
 */
export function colorModeFor(spec: EnsembleSpecInfo | null): ColorMode {
  if (spec === null || spec.mode === "sampling") {
    return "categorical";
  }
  return spec.parameter_values === null ? "categorical" : "sequential";
}

/** Rank of each member's parameter value, ascending; ties keep member order. */
export function parameterRanks(values: readonly number[]): number[] {
  const order = values
    .map((value, index) => ({ value, index }))
    .sort((a, b) => a.value - b.value || a.index - b.index);
  const ranks = new Array<number>(values.length);
  order.forEach((entry, rank) => {
    ranks[entry.index] = rank;
  });
  return ranks;
}

/** Per-member color under the given mode and (for sweeps) parameter values. */
export function memberColors(
  memberCount: number,
  mode: ColorMode,
  parameterValues: readonly number[] | null,
): string[] {
  if (mode === "categorical" || parameterValues === null) {
    return Array.from({ length: memberCount }, (_, m) => memberColor(m));
  }
  const ranks = parameterRanks(parameterValues);
  const span = Math.max(1, memberCount - 1);
  return Array.from({ length: memberCount }, (_, m) =>
    sequentialColor((ranks[m] ?? 0) / span),
  );
}
