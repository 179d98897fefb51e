// Typed client for the crashviz serve API. All rubric text comes from the
// server (/api/metrics); nothing rubric-related is duplicated in the bundle.

export type BinaryScore = 0 | 1;

export interface MetricInfo {
  id: string;
  label: string;
  description: string;
}

export interface CaseSummary {
  case_id: string;
  source_case_id: string;
  location: string;
  collision_type: string;
  models: string[];
  sheet_count: number;
}

export interface SheetPayload {
  case_id: string;
  model_id: string;
  rater_id: string;
  scores: Record<string, BinaryScore>;
  notes: Record<string, string>;
  total: number;
}

export interface VehicleDoc {
  label: string;
  entry_leg: string;
  exit_leg: string;
  damage_code: number;
  pre_impact_action: string | null;
}

export interface RecordDoc {
  case_id: string;
  location: string;
  narrative: string;
  collision_type: string;
  vehicles: VehicleDoc[];
  conditions?: Record<string, string>;
  report_image_ref?: string;
}

export interface CaseDetail {
  case_id: string;
  record: RecordDoc;
  artifacts: string[];
  prompt_text: string | null;
  sheets: SheetPayload[];
}

export interface MetricReport {
  label: string;
  mean: number;
  mean_display: string;
  std: number;
  n: number;
}

export interface ModelReport {
  model_id: string;
  total: number;
  total_display: string;
  per_metric: Record<string, MetricReport>;
}

export interface BenchmarkReport {
  thresholds: { high: number; low: number };
  models: ModelReport[];
  notes: string[];
}

export interface ScoreSubmission {
  model_id: string;
  rater_id: string;
  scores: Record<string, BinaryScore>;
  notes?: Record<string, string>;
}

export interface ConsensusSubmission {
  model_id: string;
  rater_a: string;
  rater_b: string;
  resolutions: Record<string, { value: BinaryScore; note: string }>;
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, init);
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        detail = (JSON.parse(text) as { error?: string }).error ?? text;
      } catch {
        // non-JSON error body: report it as-is
      }
      throw new ApiError(response.status, detail);
    }
    return JSON.parse(text) as T;
  }

  metrics(): Promise<MetricInfo[]> {
    return this.request<MetricInfo[]>("/api/metrics");
  }

  cases(): Promise<CaseSummary[]> {
    return this.request<CaseSummary[]>("/api/cases");
  }

  caseDetail(caseId: string): Promise<CaseDetail> {
    return this.request<CaseDetail>(`/api/cases/${encodeURIComponent(caseId)}`);
  }

  artifactUrl(caseId: string, name: string): string {
    const parts = name.split("/").map(encodeURIComponent).join("/");
    return `${this.base}/api/cases/${encodeURIComponent(caseId)}/artifacts/${parts}`;
  }

  submitScores(caseId: string, body: ScoreSubmission): Promise<SheetPayload> {
    return this.request<SheetPayload>(
      `/api/cases/${encodeURIComponent(caseId)}/scores`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      },
    );
  }

  submitConsensus(
    caseId: string,
    body: ConsensusSubmission,
  ): Promise<{ conflicts: string[]; sheet: SheetPayload }> {
    return this.request(`/api/cases/${encodeURIComponent(caseId)}/consensus`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  report(): Promise<BenchmarkReport> {
    return this.request<BenchmarkReport>("/api/report?format=json");
  }
}
