// Two-rater disagreement view: per-metric agreement, conflict extraction,
// and the consensus payload builder. Pure logic, no DOM.

import type { BinaryScore, ConsensusSubmission, SheetPayload } from "./api.js";

export interface MetricComparison {
  metricId: string;
  a: BinaryScore;
  b: BinaryScore;
  agrees: boolean;
}

export interface ConflictView {
  caseId: string;
  modelId: string;
  raterA: string;
  raterB: string;
  rows: MetricComparison[];
  conflicts: string[];
}

export class InsufficientRatings extends Error {}

export function humanSheets(sheets: SheetPayload[], modelId: string): SheetPayload[] {
  return sheets.filter(
    (s) => s.model_id === modelId && s.rater_id !== "auto" && s.rater_id !== "consensus",
  );
}

export function compareSheets(a: SheetPayload, b: SheetPayload, metricIds: string[]): ConflictView {
  if (a.case_id !== b.case_id || a.model_id !== b.model_id) {
    throw new Error("sheets describe different case/model pairs");
  }
  const rows = metricIds.map((metricId) => {
    const left = a.scores[metricId];
    const right = b.scores[metricId];
    return { metricId, a: left, b: right, agrees: left === right };
  });
  return {
    caseId: a.case_id,
    modelId: a.model_id,
    raterA: a.rater_id,
    raterB: b.rater_id,
    rows,
    conflicts: rows.filter((row) => !row.agrees).map((row) => row.metricId),
  };
}

/** Pick the two sheets for the conflict panel, or explain what is missing. */
export function conflictView(
  sheets: SheetPayload[],
  modelId: string,
  metricIds: string[],
): ConflictView {
  const humans = humanSheets(sheets, modelId);
  if (humans.length < 2) {
    throw new InsufficientRatings(
      `need two human sheets for ${modelId}, have ${humans.length}`,
    );
  }
  return compareSheets(humans[0]!, humans[1]!, metricIds);
}

export function buildConsensusSubmission(
  view: ConflictView,
  resolutions: Map<string, { value: BinaryScore; note: string }>,
): ConsensusSubmission {
  const missing = view.conflicts.filter((id) => !resolutions.has(id));
  if (missing.length > 0) {
    throw new Error(`unresolved conflicts: ${missing.join(", ")}`);
  }
  const body: ConsensusSubmission = {
    model_id: view.modelId,
    rater_a: view.raterA,
    rater_b: view.raterB,
    resolutions: {},
  };
  for (const metricId of view.conflicts) {
    body.resolutions[metricId] = resolutions.get(metricId)!;
  }
  return body;
}
