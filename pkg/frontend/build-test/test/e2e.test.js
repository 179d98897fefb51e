// End-to-end round trip against the real backend: seed a store with the
// Python CLI, spawn `crashviz serve`, and drive the same code paths the
// browser uses (ApiClient + ReviewSession + conflict view).
//
// Requires the crashviz Python package to be installed (pip install -e ..).
import assert from "node:assert/strict";
import { spawn, spawnSync } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { test } from "node:test";
import { ApiClient } from "../src/api.js";
import { buildConsensusSubmission, conflictView } from "../src/conflicts.js";
import { MemoryDraftStore, ReviewSession } from "../src/session.js";
const PYTHON = process.env.CRASHVIZ_PYTHON ?? "python3";
function run(args, cwd) {
    const result = spawnSync(PYTHON, args, { cwd, encoding: "utf-8" });
    assert.equal(result.status, 0, `${PYTHON} ${args.join(" ")} failed:\n${result.stdout}\n${result.stderr}`);
}
async function startServer(cwd) {
    const child = spawn(PYTHON, ["-m", "crashviz.cli", "serve", "--store", "store", "--bind", "127.0.0.1:0"], { cwd, stdio: ["ignore", "pipe", "pipe"] });
    const base = await new Promise((resolve, reject) => {
        const timer = setTimeout(() => reject(new Error("server did not start in 15s")), 15000);
        let buffer = "";
        child.stdout.on("data", (chunk) => {
            buffer += chunk.toString();
            const match = buffer.match(/http:\/\/[\d.]+:\d+/);
            if (match) {
                clearTimeout(timer);
                resolve(match[0]);
            }
        });
        child.on("exit", (code) => {
            clearTimeout(timer);
            reject(new Error(`server exited early with code ${code}`));
        });
    });
    return { child, base };
}
test("review round trip: toggles -> report, disagreement -> consensus", async () => {
    const workdir = mkdtempSync(join(tmpdir(), "crashviz-e2e-"));
    run(["-m", "crashviz.fixtures", "--count", "3", "--out", "records.json"], workdir);
    run(["-m", "crashviz.cli", "ingest", "records.json", "--store", "store"], workdir);
    run(["-m", "crashviz.cli", "generate", "--store", "store", "--mock"], workdir);
    const { child, base } = await startServer(workdir);
    try {
        const api = new ApiClient(base);
        // Rubric text comes from the server, not the bundle.
        const metrics = await api.metrics();
        assert.equal(metrics.length, 10);
        const location = metrics.find((m) => m.id === "m4");
        assert.match(location.description, /correct quadrant or at the correct entry\/exit point/);
        const cases = await api.cases();
        assert.equal(cases.length, 3);
        const caseId = cases[0].case_id;
        const modelId = cases[0].models[0];
        assert.equal(modelId, "mock-reference");
        // Rater A scores through the session machinery: m5 = 0, rest 1.
        const sessionA = new ReviewSession("rater-a", metrics, [caseId], new MemoryDraftStore());
        sessionA.open(caseId, modelId);
        for (const metric of metrics) {
            sessionA.set(metric.id, metric.id === "m5" ? 0 : 1);
        }
        const submissionA = sessionA.buildSubmission();
        const storedA = await api.submitScores(caseId, submissionA);
        assert.equal(storedA.total, 9);
        sessionA.markSubmitted();
        // The toggles appear verbatim in the aggregated report.
        let report = await api.report();
        let entry = report.models.find((m) => m.model_id === modelId);
        for (const metric of metrics) {
            assert.equal(entry.per_metric[metric.id].mean, submissionA.scores[metric.id], `report drifted from toggles at ${metric.id}`);
        }
        // Rater B agrees everywhere except m7: exactly one conflict must surface.
        const sessionB = new ReviewSession("rater-b", metrics, [caseId], new MemoryDraftStore());
        sessionB.open(caseId, modelId);
        for (const metric of metrics) {
            sessionB.set(metric.id, metric.id === "m5" || metric.id === "m7" ? 0 : 1);
        }
        await api.submitScores(caseId, sessionB.buildSubmission());
        const detail = await api.caseDetail(caseId);
        const view = conflictView(detail.sheets, modelId, metrics.map((m) => m.id));
        assert.deepEqual(view.conflicts, ["m7"]);
        // Resolve the single conflict; the consensus sheet lands server-side.
        const resolutions = new Map([
            ["m7", { value: 1, note: "discussed: zone touches the marker" }],
        ]);
        const outcome = await api.submitConsensus(caseId, buildConsensusSubmission(view, resolutions));
        assert.deepEqual(outcome.conflicts, ["m7"]);
        assert.equal(outcome.sheet.rater_id, "consensus");
        assert.equal(outcome.sheet.scores["m7"], 1);
        assert.equal(outcome.sheet.scores["m5"], 0);
        // The report now reflects the consensus values (one sheet, not two).
        report = await api.report();
        entry = report.models.find((m) => m.model_id === modelId);
        assert.equal(entry.per_metric["m7"].mean, 1);
        assert.equal(entry.per_metric["m5"].mean, 0);
        assert.equal(entry.per_metric["m7"].n, 1);
    }
    finally {
        child.kill("SIGTERM");
        await new Promise((resolve) => child.on("exit", resolve));
    }
});
