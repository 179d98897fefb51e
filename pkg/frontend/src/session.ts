// Review session state: tri-state toggles per (case, model), draft
// persistence, and the completeness gate that blocks submission until all
// ten metrics are set. Pure logic, no DOM.

import type { BinaryScore, MetricInfo, ScoreSubmission } from "./api.js";

export type ToggleState = BinaryScore | null; // null = unset

export interface DraftStore {
  load(key: string): Record<string, ToggleState> | null;
  save(key: string, toggles: Record<string, ToggleState>): void;
  clear(key: string): void;
}

/** In-memory fallback used when localStorage is unavailable (tests, older
 * browsers in private mode). */
export class MemoryDraftStore implements DraftStore {
  private drafts = new Map<string, Record<string, ToggleState>>();

  load(key: string): Record<string, ToggleState> | null {
    const found = this.drafts.get(key);
    return found ? { ...found } : null;
  }

  save(key: string, toggles: Record<string, ToggleState>): void {
    this.drafts.set(key, { ...toggles });
  }

  clear(key: string): void {
    this.drafts.delete(key);
  }
}

export class ReviewSession {
  readonly metricIds: string[];
  private toggles = new Map<string, ToggleState>();
  private notes = new Map<string, string>();
  private caseId: string | null = null;
  private modelId: string | null = null;

  constructor(
    public raterId: string,
    metrics: MetricInfo[],
    public pending: string[] = [],
    private readonly drafts: DraftStore = new MemoryDraftStore(),
  ) {
    if (metrics.length !== 10) {
      throw new Error(`rubric must carry exactly ten metrics, got ${metrics.length}`);
    }
    this.metricIds = metrics.map((m) => m.id);
  }

  get currentCase(): string | null {
    return this.caseId;
  }

  get currentModel(): string | null {
    return this.modelId;
  }

  private draftKey(): string {
    return `crashviz-draft:${this.raterId}:${this.caseId}:${this.modelId}`;
  }

  open(caseId: string, modelId: string): void {
    this.caseId = caseId;
    this.modelId = modelId;
    this.toggles = new Map(this.metricIds.map((id) => [id, null]));
    this.notes = new Map();
    const draft = this.drafts.load(this.draftKey());
    if (draft) {
      for (const id of this.metricIds) {
        if (draft[id] === 0 || draft[id] === 1) {
          this.toggles.set(id, draft[id]);
        }
      }
    }
  }

  state(metricId: string): ToggleState {
    const value = this.toggles.get(metricId);
    return value === undefined ? null : value;
  }

  set(metricId: string, value: ToggleState): void {
    if (!this.toggles.has(metricId)) {
      throw new Error(`unknown metric: ${metricId}`);
    }
    this.toggles.set(metricId, value);
    this.saveDraft();
  }

  /** Digit-key toggle: unset -> 1 -> 0 -> unset. */
  cycle(metricId: string): ToggleState {
    const current = this.state(metricId);
    const next: ToggleState = current === null ? 1 : current === 1 ? 0 : null;
    this.set(metricId, next);
    return next;
  }

  setNote(metricId: string, text: string): void {
    if (text) {
      this.notes.set(metricId, text);
    } else {
      this.notes.delete(metricId);
    }
  }

  get unsetMetrics(): string[] {
    return this.metricIds.filter((id) => this.state(id) === null);
  }

  get complete(): boolean {
    return this.unsetMetrics.length === 0;
  }

  private saveDraft(): void {
    if (this.caseId && this.modelId) {
      this.drafts.save(this.draftKey(), Object.fromEntries(this.toggles));
    }
  }

  /** Exactly the toggles the rater set — the UI never invents scores. */
  buildSubmission(): ScoreSubmission {
    if (!this.caseId || !this.modelId) {
      throw new Error("no case open");
    }
    if (!this.complete) {
      throw new Error(`submission blocked: unset metrics ${this.unsetMetrics.join(", ")}`);
    }
    const scores: Record<string, BinaryScore> = {};
    for (const id of this.metricIds) {
      scores[id] = this.state(id) as BinaryScore;
    }
    const submission: ScoreSubmission = {
      model_id: this.modelId,
      rater_id: this.raterId,
      scores,
    };
    if (this.notes.size > 0) {
      submission.notes = Object.fromEntries(this.notes);
    }
    return submission;
  }

  /** Called after a 201 from the server: drop the draft and advance. */
  markSubmitted(): string | null {
    this.drafts.clear(this.draftKey());
    const index = this.caseId ? this.pending.indexOf(this.caseId) : -1;
    if (index >= 0) {
      this.pending.splice(index, 1);
    }
    return this.pending[index] ?? this.pending[0] ?? null;
  }

  /** Network failure path: the draft stays put so a retry loses nothing. */
  keepDraftForRetry(): Record<string, ToggleState> | null {
    return this.drafts.load(this.draftKey());
  }
}
