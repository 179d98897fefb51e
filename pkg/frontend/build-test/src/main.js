// Application wiring: load rubric + cases, keep one ReviewSession alive,
// route keyboard shortcuts, submit sheets, and drive the conflict panel.
import { ApiClient } from "./api.js";
import { InsufficientRatings, buildConsensusSubmission, conflictView } from "./conflicts.js";
import { MemoryDraftStore, ReviewSession } from "./session.js";
import { el, renderCaseList, renderConflicts, renderPanes, renderRecord, renderStatus, renderToggles, } from "./view.js";
class LocalDraftStore {
    load(key) {
        const raw = window.localStorage.getItem(key);
        return raw ? JSON.parse(raw) : null;
    }
    save(key, toggles) {
        window.localStorage.setItem(key, JSON.stringify(toggles));
    }
    clear(key) {
        window.localStorage.removeItem(key);
    }
}
function draftStore() {
    try {
        window.localStorage.setItem("crashviz-probe", "1");
        window.localStorage.removeItem("crashviz-probe");
        return new LocalDraftStore();
    }
    catch {
        return new MemoryDraftStore();
    }
}
class App {
    root;
    api = new ApiClient("");
    metrics = [];
    cases = [];
    detail = null;
    session = null;
    modelId = null;
    status = "";
    statusKind = "info";
    pendingRetry = null;
    resolutions = new Map();
    constructor(root) {
        this.root = root;
    }
    async start() {
        this.metrics = await this.api.metrics();
        const raterId = window.localStorage.getItem("crashviz-rater") || "rater-1";
        this.session = new ReviewSession(raterId, this.metrics, [], draftStore());
        await this.reloadCases();
        window.addEventListener("keydown", (event) => this.onKey(event));
        if (this.cases.length > 0) {
            await this.openCase(this.cases[0].case_id);
        }
        else {
            this.render();
        }
    }
    async reloadCases() {
        this.cases = await this.api.cases();
        if (this.session) {
            this.session.pending = this.cases.map((c) => c.case_id);
        }
    }
    async openCase(caseId) {
        this.detail = await this.api.caseDetail(caseId);
        const summary = this.cases.find((c) => c.case_id === caseId);
        this.modelId = summary?.models[0] ?? null;
        if (this.session && this.modelId) {
            this.session.open(caseId, this.modelId);
        }
        this.resolutions = new Map();
        this.setStatus("");
        this.render();
    }
    onKey(event) {
        if (!this.session || event.target instanceof HTMLInputElement) {
            return;
        }
        // Digit keys 1..9,0 cycle metrics 1..10: unset -> 1 -> 0 -> unset.
        if (/^[0-9]$/.test(event.key)) {
            const index = event.key === "0" ? 9 : Number(event.key) - 1;
            const metric = this.metrics[index];
            if (metric) {
                this.session.cycle(metric.id);
                this.render();
            }
        }
        else if (event.key === "Enter" && this.session.complete) {
            void this.submit();
        }
    }
    setStatus(message, kind = "info") {
        this.status = message;
        this.statusKind = kind;
    }
    async submit() {
        const session = this.session;
        const detail = this.detail;
        if (!session || !detail) {
            return;
        }
        const attempt = async () => {
            const body = session.buildSubmission();
            await this.api.submitScores(detail.case_id, body);
            const next = session.markSubmitted();
            this.pendingRetry = null;
            this.setStatus(`submitted ${detail.case_id}/${body.model_id} as ${body.rater_id}`);
            await this.reloadCases();
            if (next) {
                await this.openCase(next);
            }
            else {
                this.render();
            }
        };
        try {
            await attempt();
        }
        catch (error) {
            // Draft is still in the store: offer a retry instead of losing work.
            this.pendingRetry = attempt;
            this.setStatus(`submit failed (${String(error)}) — draft kept, retry available`, "error");
            this.render();
        }
    }
    async resolveConflicts() {
        const detail = this.detail;
        if (!detail || !this.modelId) {
            return;
        }
        try {
            const view = conflictView(detail.sheets, this.modelId, this.metrics.map((m) => m.id));
            const body = buildConsensusSubmission(view, this.resolutions);
            await this.api.submitConsensus(detail.case_id, body);
            this.setStatus(`consensus recorded for ${detail.case_id}/${this.modelId}`);
            await this.openCase(detail.case_id);
        }
        catch (error) {
            this.setStatus(String(error), "error");
            this.render();
        }
    }
    render() {
        const root = this.root;
        root.replaceChildren();
        const header = el("header", {}, [
            el("h1", {}, ["crashviz review"]),
            el("span", { class: "rater" }, [`rater: ${this.session?.raterId ?? "?"}`]),
        ]);
        const raterInput = el("input", {
            type: "text",
            value: this.session?.raterId ?? "",
            "aria-label": "rater id",
        });
        raterInput.addEventListener("change", () => {
            if (this.session) {
                this.session.raterId = raterInput.value || "rater-1";
                window.localStorage.setItem("crashviz-rater", this.session.raterId);
                this.render();
            }
        });
        header.append(raterInput);
        root.append(header);
        const sidebar = el("aside", {}, [
            renderCaseList(this.cases, this.detail?.case_id ?? null, (id) => void this.openCase(id)),
        ]);
        const mainPanel = el("main", {});
        if (this.status) {
            mainPanel.append(renderStatus(this.status, this.statusKind));
            if (this.pendingRetry) {
                const retry = el("button", { type: "button" }, ["retry submit"]);
                retry.addEventListener("click", () => void this.pendingRetry?.());
                mainPanel.append(retry);
            }
        }
        if (this.detail && this.session) {
            const detail = this.detail;
            const summary = this.cases.find((c) => c.case_id === detail.case_id);
            if (summary && summary.models.length > 1) {
                const select = el("select", { "aria-label": "model" });
                for (const model of summary.models) {
                    const option = el("option", { value: model }, [model]);
                    if (model === this.modelId) {
                        option.setAttribute("selected", "selected");
                    }
                    select.append(option);
                }
                select.addEventListener("change", () => {
                    this.modelId = select.value;
                    if (this.session && this.modelId) {
                        this.session.open(detail.case_id, this.modelId);
                    }
                    this.resolutions = new Map();
                    this.render();
                });
                mainPanel.append(el("label", { class: "model-pick" }, ["model: ", select]));
            }
            mainPanel.append(renderPanes(detail, this.modelId, (name) => this.api.artifactUrl(detail.case_id, name)));
            mainPanel.append(renderRecord(detail));
            mainPanel.append(renderToggles(this.metrics, this.session, () => this.render()));
            const submit = el("button", {
                type: "button",
                class: "submit",
                ...(this.session.complete ? {} : { disabled: "disabled" }),
            }, [
                this.session.complete
                    ? "submit scores"
                    : `set ${this.session.unsetMetrics.length} more metric(s)`,
            ]);
            submit.addEventListener("click", () => void this.submit());
            mainPanel.append(submit);
            if (this.modelId) {
                try {
                    const view = conflictView(detail.sheets, this.modelId, this.metrics.map((m) => m.id));
                    const labels = new Map(this.metrics.map((m) => [m.id, m.label]));
                    mainPanel.append(renderConflicts(view, labels, (metricId, value, note) => {
                        this.resolutions.set(metricId, { value, note });
                        if (view.conflicts.every((id) => this.resolutions.has(id))) {
                            void this.resolveConflicts();
                        }
                        else {
                            this.setStatus(`resolution noted for ${metricId}; ${view.conflicts.length - this.resolutions.size} left`);
                            this.render();
                        }
                    }));
                }
                catch (error) {
                    if (!(error instanceof InsufficientRatings)) {
                        throw error;
                    }
                }
            }
        }
        else {
            mainPanel.append(renderStatus("no cases in the store yet"));
        }
        root.append(el("div", { class: "layout" }, [sidebar, mainPanel]));
    }
}
const rootElement = document.getElementById("app");
if (rootElement) {
    const app = new App(rootElement);
    void app.start();
}
