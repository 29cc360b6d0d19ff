// Wire types, matching the service's JSON exactly.

export type Verdict = "yes" | "no" | "missing";

export type TaskState = "running" | "complete" | "failed";

export interface TaskStatus {
  status: TaskState;
  done: number;
  total: number;
}

export interface DimensionWire {
  label: string;
  definition: string;
  builtin: boolean;
}

export interface ExcerptWire {
  chunk_id: string;
  text: string;
  score: number;
  first_pass_score: number;
  oversized: boolean;
}

export interface SummaryWire {
  text: string;
  cited_excerpt_ids: string[];
}

export interface AnalysisWire {
  dimension: DimensionWire;
  registration_excerpts: ExcerptWire[];
  paper_excerpts: ExcerptWire[];
  registration_summary: SummaryWire;
  paper_summary: SummaryWire;
  judgement: { verdict: Verdict; deviation_information: string };
}

export interface ReportWire {
  schema_version: number;
  report_id: string;
  created_at: string;
  status: TaskState;
  progress: { done: number; total: number };
  failure_reason: string | null;
  settings: {
    parser: string;
    model: string;
    chaining: boolean;
    retrieval: { k: number; pool_multiplier: number };
    dimensions: DimensionWire[];
    multi_study: { multi_study: boolean; target_label: string | null };
  };
  analyses: AnalysisWire[];
}
