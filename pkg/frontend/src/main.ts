// DOM bootstrap: wires the settings form, the poller, and the report table.

import { ApiClient } from "./api.js";
import {
  addCustomDimension,
  defaultFormState,
  removeDimension,
  settingsPayload,
  validateForm,
} from "./form.js";
import { ProgressPoller } from "./poller.js";
import {
  renderCsvLink,
  renderDimensionList,
  renderErrorBanner,
  renderNotFound,
  renderProgress,
  renderReportTable,
} from "./render.js";
import type { ReportWire } from "./types.js";
import { buildViewModel, toggleViewMode, type ReportViewModel } from "./viewmodel.js";

const apiBase = new URLSearchParams(window.location.search).get("api") ?? "";
const api = new ApiClient(apiBase);

let formState = defaultFormState();
let viewModel: ReportViewModel | null = null;

const formRoot = document.getElementById("settings-form") as HTMLFormElement;
const dimensionsRoot = document.getElementById("dimensions")!;
const progressRoot = document.getElementById("progress")!;
const reportRoot = document.getElementById("report")!;
const bannerRoot = document.getElementById("banner")!;

const poller = new ProgressPoller(api, {
  onUpdate(status, report) {
    progressRoot.innerHTML = renderProgress(status);
    if (report) renderReport(report);
  },
  onError(failures) {
    if (failures >= 3) {
      bannerRoot.innerHTML = renderErrorBanner(
        "The server is not responding; retrying with backoff.",
      );
    }
  },
  onNotFound() {
    reportRoot.innerHTML = renderNotFound(currentReportId ?? "");
  },
});

let currentReportId: string | null = null;

function renderReport(report: ReportWire): void {
  viewModel = buildViewModel(report, viewModel ?? undefined);
  reportRoot.innerHTML =
    renderCsvLink(api.csvUrl(report.report_id)) + renderReportTable(viewModel);
  if (report.status === "failed" && report.failure_reason) {
    bannerRoot.innerHTML = renderErrorBanner(`Task failed: ${report.failure_reason}`);
  }
}

function syncDimensionList(errors: Record<string, string> = {}): void {
  dimensionsRoot.innerHTML = renderDimensionList(formState, errors);
}

function readFormInputs(): void {
  const data = new FormData(formRoot);
  formState = {
    ...formState,
    parser: data.get("parser") === "plaintext_fallback" ? "plaintext_fallback" : "grobid",
    model: String(data.get("model") ?? ""),
    chaining: data.get("chaining") === "on",
    k: Number(data.get("k") ?? 5),
    registrationMode: data.get("registration_mode") === "registry" ? "registry" : "upload",
    nctId: String(data.get("nct_id") ?? ""),
    multiStudy: data.get("multi_study") === "on",
    targetLabel: String(data.get("target_label") ?? ""),
  };
}

document.getElementById("add-dimension")!.addEventListener("click", () => {
  const labelInput = document.getElementById("custom-label") as HTMLInputElement;
  const definitionInput = document.getElementById("custom-definition") as HTMLTextAreaElement;
  const label = labelInput.value.trim();
  const definition = definitionInput.value.trim();
  if (!label) {
    syncDimensionList({ dimensions: "Custom dimensions need a non-empty label." });
    return;
  }
  if (!definition) {
    syncDimensionList({ dimensions: `Custom dimension "${label}" needs a definition.` });
    return;
  }
  formState = addCustomDimension(formState, label, definition);
  labelInput.value = "";
  definitionInput.value = "";
  syncDimensionList();
});

dimensionsRoot.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.classList.contains("remove-dimension")) {
    formState = removeDimension(formState, Number(target.dataset.index));
    syncDimensionList();
  }
});

reportRoot.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  if (target.classList.contains("toggle-view") && viewModel) {
    viewModel = toggleViewMode(viewModel, Number(target.dataset.row));
    const csv = currentReportId ? renderCsvLink(api.csvUrl(currentReportId)) : "";
    reportRoot.innerHTML = csv + renderReportTable(viewModel);
  }
  if (target.classList.contains("copy-quote")) {
    void navigator.clipboard?.writeText(target.dataset.copy ?? "");
  }
});

formRoot.addEventListener("submit", (event) => {
  event.preventDefault();
  void submitTask();
});

async function submitTask(): Promise<void> {
  readFormInputs();
  const registrationInput = document.getElementById("registration-file") as HTMLInputElement;
  const paperInput = document.getElementById("paper-file") as HTMLInputElement;
  const registrationFile = registrationInput.files?.[0] ?? null;
  const paperFile = paperInput.files?.[0] ?? null;

  const errors = validateForm(formState, {
    registration: registrationFile !== null,
    paper: paperFile !== null,
  });
  if (Object.keys(errors).length > 0) {
    syncDimensionList(errors);
    bannerRoot.innerHTML = renderErrorBanner(Object.values(errors)[0]);
    return;
  }

  const form = new FormData();
  form.append("settings", JSON.stringify(settingsPayload(formState)));
  if (formState.registrationMode === "upload" && registrationFile) {
    form.append("registration", registrationFile);
  }
  if (paperFile) form.append("paper", paperFile);

  bannerRoot.innerHTML = "";
  reportRoot.innerHTML = "";
  try {
    const { report_id } = await api.createTask(form);
    currentReportId = report_id;
    viewModel = null;
    progressRoot.innerHTML = renderProgress({ status: "running", done: 0, total: formState.dimensions.length });
    poller.start(report_id);
  } catch (error) {
    bannerRoot.innerHTML = renderErrorBanner(String(error));
  }
}

syncDimensionList();
