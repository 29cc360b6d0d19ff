// HTML-string renderers; main.ts owns the DOM, these stay pure and testable.

import { verdictColor, verdictLabel } from "./colors.js";
import type { SettingsFormState } from "./form.js";
import type { TaskStatus } from "./types.js";
import type { QuoteView, ReportViewModel } from "./viewmodel.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function quoteCell(quotes: QuoteView[]): string {
  if (quotes.length === 0) {
    return '<p class="no-content">No content available from this source.</p>';
  }
  const items = quotes.map(
    (quote) => `
      <blockquote class="quote${quote.oversized ? " oversized" : ""}" data-quote-id="${escapeHtml(quote.id)}">
        <span class="quote-id">${escapeHtml(quote.id)}</span>
        <span class="quote-score">${quote.score.toFixed(3)}</span>
        <span class="quote-text">${escapeHtml(quote.text)}</span>
        <button type="button" class="copy-quote" data-copy="${escapeHtml(quote.text)}" title="Copy quote for Ctrl+F">copy</button>
      </blockquote>`,
  );
  return items.join("\n");
}

export function renderReportTable(model: ReportViewModel): string {
  const rows = model.rows
    .map((row, index) => {
      const mode = model.viewModes[index];
      const registration =
        mode === "quotes" ? quoteCell(row.registrationQuotes) : `<p class="summary">${escapeHtml(row.registrationSummary)}</p>`;
      const paper =
        mode === "quotes" ? quoteCell(row.paperQuotes) : `<p class="summary">${escapeHtml(row.paperSummary)}</p>`;
      return `
    <tr class="${verdictColor(row.verdict)}" data-row="${index}">
      <td class="dimension">
        <strong>${escapeHtml(row.label)}</strong>
        <button type="button" class="toggle-view" data-row="${index}">
          show ${mode === "quotes" ? "summaries" : "quotes"}
        </button>
      </td>
      <td class="registration">${registration}</td>
      <td class="paper">${paper}</td>
      <td class="verdict"><span class="verdict-text">${verdictLabel(row.verdict)}</span></td>
      <td class="deviation-information">${escapeHtml(row.deviationInformation)}</td>
    </tr>`;
    })
    .join("\n");
  return `
<table class="report-table">
  <thead>
    <tr>
      <th>Dimension</th>
      <th>Registration</th>
      <th>Paper</th>
      <th>Deviation</th>
      <th>Deviation information</th>
    </tr>
  </thead>
  <tbody>
${rows}
  </tbody>
</table>`;
}

export function renderProgress(status: TaskStatus): string {
  const note =
    status.status === "failed"
      ? '<p class="failed">The task failed; see the report for the reason.</p>'
      : "";
  return `
<div class="progress" role="status">
  <p>${status.done} of ${status.total} dimensions evaluated</p>
  <progress max="${status.total}" value="${status.done}"></progress>
  ${note}
</div>`;
}

export function renderNotFound(reportId: string): string {
  return `<div class="not-found"><p>Report <code>${escapeHtml(reportId)}</code> was not found.</p></div>`;
}

export function renderErrorBanner(message: string): string {
  return `<div class="error-banner" role="alert">${escapeHtml(message)}</div>`;
}

export function renderDimensionList(state: SettingsFormState, errors: Record<string, string>): string {
  const rows = state.dimensions
    .map(
      (dim, index) => `
    <li class="dimension-entry">
      <span class="dim-label">${escapeHtml(dim.label)}</span>
      ${dim.builtin ? '<span class="dim-builtin">built-in</span>' : ""}
      <button type="button" class="remove-dimension" data-index="${index}">remove</button>
    </li>`,
    )
    .join("\n");
  const error = errors.dimensions ? `<p class="field-error">${escapeHtml(errors.dimensions)}</p>` : "";
  return `<ul class="dimension-list">${rows}</ul>${error}`;
}

export function renderCsvLink(url: string): string {
  return `<a class="csv-download" href="${escapeHtml(url)}" download>Download CSV</a>`;
}
