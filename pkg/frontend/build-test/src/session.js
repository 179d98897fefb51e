// Review session state: tri-state toggles per (case, model), draft
// persistence, and the completeness gate that blocks submission until all
// ten metrics are set. Pure logic, no DOM.
/** In-memory fallback used when localStorage is unavailable (tests, older
 * browsers in private mode). */
export class MemoryDraftStore {
    drafts = new Map();
    load(key) {
        const found = this.drafts.get(key);
        return found ? { ...found } : null;
    }
    save(key, toggles) {
        this.drafts.set(key, { ...toggles });
    }
    clear(key) {
        this.drafts.delete(key);
    }
}
export class ReviewSession {
    raterId;
    pending;
    drafts;
    metricIds;
    toggles = new Map();
    notes = new Map();
    caseId = null;
    modelId = null;
    constructor(raterId, metrics, pending = [], drafts = new MemoryDraftStore()) {
        this.raterId = raterId;
        this.pending = pending;
        this.drafts = drafts;
        if (metrics.length !== 10) {
            throw new Error(`rubric must carry exactly ten metrics, got ${metrics.length}`);
        }
        this.metricIds = metrics.map((m) => m.id);
    }
    get currentCase() {
        return this.caseId;
    }
    get currentModel() {
        return this.modelId;
    }
    draftKey() {
        return `crashviz-draft:${this.raterId}:${this.caseId}:${this.modelId}`;
    }
    open(caseId, modelId) {
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
    state(metricId) {
        const value = this.toggles.get(metricId);
        return value === undefined ? null : value;
    }
    set(metricId, value) {
        if (!this.toggles.has(metricId)) {
            throw new Error(`unknown metric: ${metricId}`);
        }
        this.toggles.set(metricId, value);
        this.saveDraft();
    }
    /** Digit-key toggle: unset -> 1 -> 0 -> unset. */
    cycle(metricId) {
        const current = this.state(metricId);
        const next = current === null ? 1 : current === 1 ? 0 : null;
        this.set(metricId, next);
        return next;
    }
    setNote(metricId, text) {
        if (text) {
            this.notes.set(metricId, text);
        }
        else {
            this.notes.delete(metricId);
        }
    }
    get unsetMetrics() {
        return this.metricIds.filter((id) => this.state(id) === null);
    }
    get complete() {
        return this.unsetMetrics.length === 0;
    }
    saveDraft() {
        if (this.caseId && this.modelId) {
            this.drafts.save(this.draftKey(), Object.fromEntries(this.toggles));
        }
    }
    /** Exactly the toggles the rater set — the UI never invents scores. */
    buildSubmission() {
        if (!this.caseId || !this.modelId) {
            throw new Error("no case open");
        }
        if (!this.complete) {
            throw new Error(`submission blocked: unset metrics ${this.unsetMetrics.join(", ")}`);
        }
        const scores = {};
        for (const id of this.metricIds) {
            scores[id] = this.state(id);
        }
        const submission = {
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
    markSubmitted() {
        this.drafts.clear(this.draftKey());
        const index = this.caseId ? this.pending.indexOf(this.caseId) : -1;
        if (index >= 0) {
            this.pending.splice(index, 1);
        }
        return this.pending[index] ?? this.pending[0] ?? null;
    }
    /** Network failure path: the draft stays put so a retry loses nothing. */
    keepDraftForRetry() {
        return this.drafts.load(this.draftKey());
    }
}
