// Shared view state. Every view renders from this one object and every
// control mutates it through these methods, so views stay coordinated.

import { ColorMode } from "./encoding.js";
import { GroupInfo, TopicRef, TopicSummary, topicKey } from "./types.js";

export type SizeMeasure = "u_match" | "u_exist";

/** Filter settings the panel edits; mirrors the topics endpoint's query. */
export interface FilterSettings {
  uMatchMax?: number;
  uMatchMin?: number;
  uExistMax?: number;
  uExistMin?: number;
  terms?: string[];
}

export type StateListener = (state: ViewState) => void;

export class ViewState {
  filter: FilterSettings = {};
  /** Exactly one measure drives the size encoding at any time. */
  sizeMeasure: SizeMeasure = "u_match";
  colorMode: ColorMode = "categorical";
  parameterValues: number[] | null = null;
  memberCount = 0;
  revision = 0;
  groups: GroupInfo[] = [];

  private filtered: TopicSummary[] = [];
  private filteredKeys = new Set<string>();
  private selected = new Set<string>();
  private listeners: StateListener[] = [];

  subscribe(listener: StateListener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of [...this.listeners]) {
      listener(this);
    }
  }

  /** Topics of the last filter query, in server order. */
  filteredTopics(): readonly TopicSummary[] {
    return this.filtered;
  }

  /** Selected topic keys; always a subset of the filtered set. */
  selectedKeys(): ReadonlySet<string> {
    return this.selected;
  }

  isSelected(ref: TopicRef): boolean {
    return this.selected.has(topicKey(ref));
  }

  /**
   * Install a fresh filter answer. Selection entries that fell out of the
   * filtered set are dropped, keeping selection within the visible topics.
   */
  setFilteredTopics(topics: TopicSummary[]): void {
    this.filtered = topics;
    this.filteredKeys = new Set(
      topics.map((t) => topicKey({ model: t.model_index, topic: t.topic_index })),
    );
    this.selected = new Set(
      [...this.selected].filter((key) => this.filteredKeys.has(key)),
    );
    this.notify();
  }

  /** Replace the selection; refs outside the filtered set are ignored. */
  setSelection(refs: TopicRef[]): void {
    this.selected = new Set(
      refs.map(topicKey).filter((key) => this.filteredKeys.has(key)),
    );
    this.notify();
  }

  toggleSelection(ref: TopicRef): void {
    const key = topicKey(ref);
    if (this.selected.has(key)) {
      this.selected.delete(key);
    } else if (this.filteredKeys.has(key)) {
      this.selected.add(key);
    }
    this.notify();
  }

  clearSelection(): void {
    this.selected.clear();
    this.notify();
  }

  /** Switch the size encoding to the given measure, replacing the old one. */
  setSizeMeasure(measure: SizeMeasure): void {
    this.sizeMeasure = measure;
    this.notify();
  }

  setFilter(filter: FilterSettings): void {
    this.filter = filter;
    this.notify();
  }

  setGroups(revision: number, groups: GroupInfo[]): void {
    this.revision = revision;
    this.groups = groups;
    this.notify();
  }

  setEnsembleInfo(
    memberCount: number,
    colorMode: ColorMode,
    parameterValues: number[] | null,
  ): void {
    this.memberCount = memberCount;
    this.colorMode = colorMode;
    this.parameterValues = parameterValues;
    this.notify();
  }
}
