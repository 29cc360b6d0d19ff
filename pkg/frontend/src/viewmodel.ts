import type { AnalysisWire, ReportWire, Verdict } from "./types.js";

export type ViewMode = "quotes" | "summaries";

export interface QuoteView {
  id: string;
  text: string;
  score: number;
  oversized: boolean;
}

export interface ReportRow {
  label: string;
  definition: string;
  registrationQuotes: QuoteView[];
  paperQuotes: QuoteView[];
  registrationSummary: string;
  paperSummary: string;
  verdict: Verdict;
  deviationInformation: string;
}

export interface ReportViewModel {
  reportId: string;
  status: string;
  failureReason: string | null;
  rows: ReportRow[];
  /** per-row display mode; toggling never touches the report data */
  viewModes: ViewMode[];
}

function quoteViews(analysis: AnalysisWire, side: "registration_excerpts" | "paper_excerpts"): QuoteView[] {
  return analysis[side].map((excerpt) => ({
    id: excerpt.chunk_id,
    text: excerpt.text,
    score: excerpt.score,
    oversized: excerpt.oversized,
  }));
}

export function buildViewModel(report: ReportWire, previous?: ReportViewModel): ReportViewModel {
  const rows = report.analyses.map((analysis) => ({
    label: analysis.dimension.label,
    definition: analysis.dimension.definition,
    registrationQuotes: quoteViews(analysis, "registration_excerpts"),
    paperQuotes: quoteViews(analysis, "paper_excerpts"),
    registrationSummary: analysis.registration_summary.text,
    paperSummary: analysis.paper_summary.text,
    verdict: analysis.judgement.verdict,
    deviationInformation: analysis.judgement.deviation_information,
  }));
  // Keep the user's toggle choices for rows that already existed.
  const viewModes = rows.map((_, index) => previous?.viewModes[index] ?? "quotes");
  return {
    reportId: report.report_id,
    status: report.status,
    failureReason: report.failure_reason,
    rows,
    viewModes,
  };
}

/** Flip one row between quotes and summaries; returns a new view model. */
export function toggleViewMode(model: ReportViewModel, rowIndex: number): ReportViewModel {
  if (rowIndex < 0 || rowIndex >= model.viewModes.length) return model;
  const viewModes = model.viewModes.slice();
  viewModes[rowIndex] = viewModes[rowIndex] === "quotes" ? "summaries" : "quotes";
  return { ...model, viewModes };
}
