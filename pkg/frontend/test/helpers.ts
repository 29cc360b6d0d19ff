import type { AnalysisWire, ReportWire, TaskState, Verdict } from "../src/types.js";

export function makeAnalysis(label: string, verdict: Verdict): AnalysisWire {
  return {
    dimension: { label, definition: `definition of ${label}`, builtin: true },
    registration_excerpts: [
      { chunk_id: "R1", text: `registration quote for ${label}`, score: 0.9, first_pass_score: 0.8, oversized: false },
      { chunk_id: "R2", text: "second registration quote", score: 0.5, first_pass_score: 0.5, oversized: false },
    ],
    paper_excerpts: [
      { chunk_id: "P1", text: `paper quote for ${label}`, score: 0.7, first_pass_score: 0.7, oversized: false },
    ],
    registration_summary: { text: `registration summary for ${label}`, cited_excerpt_ids: ["R1"] },
    paper_summary: { text: `paper summary for ${label}`, cited_excerpt_ids: ["P1"] },
    judgement: { verdict, deviation_information: `deviation details for ${label}` },
  };
}

export function makeReport(done: number, total: number, status: TaskState = "running"): ReportWire {
  const verdicts: Verdict[] = ["yes", "no", "missing"];
  return {
    schema_version: 1,
    report_id: "ABCDEFGH12",
    created_at: "2026-01-01T00:00:00Z",
    status,
    progress: { done, total },
    failure_reason: status === "failed" ? "UnparseableDocument: empty upload" : null,
    settings: {
      parser: "grobid",
      model: "mock-judge",
      chaining: true,
      retrieval: { k: 5, pool_multiplier: 3 },
      dimensions: Array.from({ length: total }, (_, i) => ({
        label: `dimension ${i + 1}`,
        definition: "",
        builtin: true,
      })),
      multi_study: { multi_study: false, target_label: null },
    },
    analyses: Array.from({ length: done }, (_, i) =>
      makeAnalysis(`dimension ${i + 1}`, verdicts[i % verdicts.length]),
    ),
  };
}

export function jsonResponse(payload: unknown, status = 200): Response {
  return new Response(JSON.stringify(payload), {
    status,
    headers: { "content-type": "application/json" },
  });
}
