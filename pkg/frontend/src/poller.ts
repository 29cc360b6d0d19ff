import { ApiClient, NotFoundError } from "./api.js";
import type { ReportWire, TaskStatus } from "./types.js";

export interface PollerCallbacks {
  /** Fired on every successful poll; report is refetched when done advances. */
  onUpdate: (status: TaskStatus, report: ReportWire | null) => void;
  /** Fired per failed poll with the consecutive-failure count (banner at 3). */
  onError?: (failures: number, error: unknown) => void;
  onNotFound?: () => void;
}

export interface PollerOptions {
  intervalMs?: number;
  setTimeoutFn?: (handler: () => void, ms: number) => ReturnType<typeof setTimeout>;
  clearTimeoutFn?: (handle: ReturnType<typeof setTimeout>) => void;
}

const DEFAULT_INTERVAL_MS = 2000;

/** Polls task status every two seconds, one request in flight at a time.
 *
 * Completed rows are appended as they arrive (the report is refetched only
 * when the done counter advances). Polling stops at complete/failed or when
 * the report id is unknown; network errors back off exponentially.
 */
export class ProgressPoller {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private stopped = true;
  private failures = 0;
  private lastDone = -1;

  constructor(
    private readonly api: ApiClient,
    private readonly callbacks: PollerCallbacks,
    private readonly options: PollerOptions = {},
  ) {}

  get active(): boolean {
    return !this.stopped;
  }

  start(reportId: string): void {
    this.stop();
    this.stopped = false;
    this.failures = 0;
    this.lastDone = -1;
    void this.poll(reportId);
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      (this.options.clearTimeoutFn ?? clearTimeout)(this.timer);
      this.timer = null;
    }
  }

  private schedule(reportId: string, delayMs: number): void {
    if (this.stopped) return;
    const setTimeoutFn = this.options.setTimeoutFn ?? setTimeout;
    this.timer = setTimeoutFn(() => {
      void this.poll(reportId);
    }, delayMs);
  }

  private async poll(reportId: string): Promise<void> {
    if (this.stopped) return;
    const interval = this.options.intervalMs ?? DEFAULT_INTERVAL_MS;
    try {
      const status = await this.api.getStatus(reportId);
      this.failures = 0;
      let report: ReportWire | null = null;
      if (status.done !== this.lastDone || status.status !== "running") {
        report = await this.api.getReport(reportId);
        this.lastDone = status.done;
      }
      this.callbacks.onUpdate(status, report);
      if (status.status === "complete" || status.status === "failed") {
        this.stop();
        return;
      }
      this.schedule(reportId, interval);
    } catch (error) {
      if (error instanceof NotFoundError) {
        this.stop();
        this.callbacks.onNotFound?.();
        return;
      }
      this.failures += 1;
      this.callbacks.onError?.(this.failures, error);
      this.schedule(reportId, interval * 2 ** Math.min(this.failures, 4));
    }
  }
}
