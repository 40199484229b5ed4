// Wires the API client to the shared view state. Every control change
// re-queries the server and installs the answer, so all views update in
// the same cycle; overlapping queries are resolved latest-wins.

import { ApiClient, HttpError, LatestGate } from "./api.js";
import { colorModeFor } from "./encoding.js";
import { FilterSettings, SizeMeasure, ViewState } from "./state.js";
import {
  DocumentResponse,
  GroupInfo,
  HeatmapResponse,
  TopicDocumentsResponse,
  TopicRef,
  refOf,
} from "./types.js";

export class Workbench {
  readonly state = new ViewState();
  private readonly topicsGate = new LatestGate();

  constructor(private readonly api: ApiClient) {}

  /** Load project metadata, the unfiltered topic set, and existing groups. */
  async initialize(): Promise<void> {
    const project = await this.api.project();
    this.state.setEnsembleInfo(
      project.members,
      colorModeFor(project.spec),
      project.spec?.parameter_values ?? null,
    );
    await this.applyFilter({});
    await this.refreshGroups();
  }

  /**
   * Install new filter settings and re-query the topic set. Out-of-order
   * responses are discarded: only the latest query updates the state.
   */
  async applyFilter(filter: FilterSettings): Promise<void> {
    this.state.setFilter(filter);
    const answer = await this.topicsGate.run(() =>
      this.api.topics({
        uMatchMax: filter.uMatchMax,
        uMatchMin: filter.uMatchMin,
        uExistMax: filter.uExistMax,
        uExistMin: filter.uExistMin,
        terms: filter.terms,
      }),
    );
    if (answer !== null) {
      this.state.setFilteredTopics(answer.topics);
    }
  }

  /** Slider handler: keep only topics the server rates below the cutoff. */
  async setExistenceThreshold(value: number): Promise<void> {
    await this.applyFilter({ ...this.state.filter, uExistMax: value });
  }

  /** Size-encoding toggle; a pure re-encode, no query needed. */
  setSizeMeasure(measure: SizeMeasure): void {
    this.state.setSizeMeasure(measure);
  }

  select(refs: TopicRef[]): void {
    this.state.setSelection(refs);
  }

  async refreshGroups(): Promise<void> {
    const answer = await this.api.groups();
    this.state.setGroups(answer.revision, answer.groups);
  }

  /**
   * Group mutations carry the last seen revision. On a conflict the server's
   * current state is re-fetched before the error propagates, so the caller
   * can simply retry against fresh data.
   */
  private async mutateGroups<T>(work: () => Promise<T>): Promise<T> {
    try {
      const result = await work();
      await this.refreshGroups();
      return result;
    } catch (error) {
      if (error instanceof HttpError && error.status === 409) {
        await this.refreshGroups();
      }
      throw error;
    }
  }

  /** Create a group from the current selection. */
  createGroup(label: string): Promise<GroupInfo> {
    const members = this.state
      .filteredTopics()
      .map(refOf)
      .filter((ref) => this.state.isSelected(ref));
    return this.mutateGroups(() =>
      this.api.createGroup(this.state.revision, label, members),
    );
  }

  renameGroup(groupId: string, label: string): Promise<GroupInfo> {
    return this.mutateGroups(() =>
      this.api.updateGroup(groupId, this.state.revision, { label }),
    );
  }

  async deleteGroup(groupId: string): Promise<void> {
    await this.mutateGroups(() =>
      this.api.deleteGroup(groupId, this.state.revision),
    );
  }

  /** Data for the heatmap of the currently selected topics. */
  selectedHeatmap(topN?: number): Promise<HeatmapResponse> {
    const refs = this.state
      .filteredTopics()
      .map(refOf)
      .filter((ref) => this.state.isSelected(ref));
    return this.api.heatmap(refs, topN);
  }

  topicDocuments(ref: TopicRef): Promise<TopicDocumentsResponse> {
    return this.api.topicDocuments(ref);
  }

  openDocument(docId: string, model: number): Promise<DocumentResponse> {
    return this.api.document(docId, model);
  }
}
