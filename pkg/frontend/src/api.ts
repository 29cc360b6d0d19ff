import type { ReportWire, TaskStatus } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class NotFoundError extends Error {}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

/** Thin client for the documented endpoints; reads are side-effect free. */
export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl = "", fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  async createTask(form: FormData): Promise<{ report_id: string }> {
    const response = await this.fetchFn(`${this.base}/tasks`, { method: "POST", body: form });
    if (!response.ok) {
      const detail = await response.text();
      throw new ApiError(detail || `task creation failed (${response.status})`, response.status);
    }
    return (await response.json()) as { report_id: string };
  }

  async getStatus(reportId: string): Promise<TaskStatus> {
    const response = await this.fetchFn(`${this.base}/tasks/${reportId}/status`);
    if (response.status === 404) throw new NotFoundError(reportId);
    if (!response.ok) throw new ApiError(`status fetch failed`, response.status);
    return (await response.json()) as TaskStatus;
  }

  async getReport(reportId: string): Promise<ReportWire> {
    const response = await this.fetchFn(`${this.base}/reports/${reportId}`);
    if (response.status === 404) throw new NotFoundError(reportId);
    if (!response.ok) throw new ApiError(`report fetch failed`, response.status);
    return (await response.json()) as ReportWire;
  }

  csvUrl(reportId: string): string {
    return `${this.base}/reports/${reportId}.csv`;
  }
}
