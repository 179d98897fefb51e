// Typed client for the crashviz serve API. All rubric text comes from the
// server (/api/metrics); nothing rubric-related is duplicated in the bundle.
export class ApiError extends Error {
    status;
    constructor(status, message) {
        super(message);
        this.status = status;
    }
}
export class ApiClient {
    base;
    fetchImpl;
    constructor(base = "", fetchImpl = (input, init) => fetch(input, init)) {
        this.base = base;
        this.fetchImpl = fetchImpl;
    }
    async request(path, init) {
        const response = await this.fetchImpl(`${this.base}${path}`, init);
        const text = await response.text();
        if (!response.ok) {
            let detail = text;
            try {
                detail = JSON.parse(text).error ?? text;
            }
            catch {
                // non-JSON error body: report it as-is
            }
            throw new ApiError(response.status, detail);
        }
        return JSON.parse(text);
    }
    metrics() {
        return this.request("/api/metrics");
    }
    cases() {
        return this.request("/api/cases");
    }
    caseDetail(caseId) {
        return this.request(`/api/cases/${encodeURIComponent(caseId)}`);
    }
    artifactUrl(caseId, name) {
        const parts = name.split("/").map(encodeURIComponent).join("/");
        return `${this.base}/api/cases/${encodeURIComponent(caseId)}/artifacts/${parts}`;
    }
    submitScores(caseId, body) {
        return this.request(`/api/cases/${encodeURIComponent(caseId)}/scores`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        });
    }
    submitConsensus(caseId, body) {
        return this.request(`/api/cases/${encodeURIComponent(caseId)}/consensus`, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        });
    }
    report() {
        return this.request("/api/report?format=json");
    }
}
