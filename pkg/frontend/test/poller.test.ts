import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { ProgressPoller } from "../src/poller.js";
import type { ReportWire, TaskStatus } from "../src/types.js";
import { jsonResponse, makeReport } from "./helpers.js";

/** Stubbed API server: scripted status responses plus matching reports. */
function stubServer(statuses: TaskStatus[]) {
  const calls = { status: 0, report: 0 };
  const fetchFn = async (url: string): Promise<Response> => {
    if (url.includes("/status")) {
      const index = Math.min(calls.status, statuses.length - 1);
      calls.status += 1;
      return jsonResponse(statuses[index]);
    }
    if (url.includes("/reports/")) {
      calls.report += 1;
      const latest = statuses[Math.min(calls.status - 1, statuses.length - 1)];
      return jsonResponse(makeReport(latest.done, latest.total, latest.status));
    }
    throw new Error(`unexpected url ${url}`);
  };
  return { fetchFn, calls };
}

describe("ProgressPoller", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("reports k completed rows when status says (k, M)", async () => {
    const { fetchFn } = stubServer([{ status: "running", done: 2, total: 6 }]);
    const updates: Array<{ status: TaskStatus; report: ReportWire | null }> = [];
    const poller = new ProgressPoller(new ApiClient("", fetchFn), {
      onUpdate: (status, report) => updates.push({ status, report }),
    });

    poller.start("ABCDEFGH12");
    await vi.advanceTimersByTimeAsync(0);

    expect(updates).toHaveLength(1);
    expect(updates[0].status).toEqual({ status: "running", done: 2, total: 6 });
    expect(updates[0].report?.analyses).toHaveLength(2);
    poller.stop();
  });

  it("polls on a two-second interval and refetches the report only when done advances", async () => {
    const { fetchFn, calls } = stubServer([
      { status: "running", done: 1, total: 6 },
      { status: "running", done: 1, total: 6 },
      { status: "running", done: 2, total: 6 },
      { status: "complete", done: 6, total: 6 },
    ]);
    const poller = new ProgressPoller(new ApiClient("", fetchFn), { onUpdate: () => {} });

    poller.start("ABCDEFGH12");
    await vi.advanceTimersByTimeAsync(0);
    expect(calls.status).toBe(1);
    expect(calls.report).toBe(1);

    await vi.advanceTimersByTimeAsync(2000);
    expect(calls.status).toBe(2);
    expect(calls.report).toBe(1); // done unchanged, no report refetch

    await vi.advanceTimersByTimeAsync(2000);
    expect(calls.status).toBe(3);
    expect(calls.report).toBe(2);

    await vi.advanceTimersByTimeAsync(2000);
    expect(calls.status).toBe(4);
    expect(calls.report).toBe(3);
  });

  it("stops polling at completion: no further requests are observable", async () => {
    const { fetchFn, calls } = stubServer([{ status: "complete", done: 6, total: 6 }]);
    const poller = new ProgressPoller(new ApiClient("", fetchFn), { onUpdate: () => {} });

    poller.start("ABCDEFGH12");
    await vi.advanceTimersByTimeAsync(0);
    expect(poller.active).toBe(false);
    const after = calls.status;

    await vi.advanceTimersByTimeAsync(60_000);
    expect(calls.status).toBe(after);
  });

  it("stops polling when the task fails", async () => {
    const { fetchFn, calls } = stubServer([{ status: "failed", done: 0, total: 6 }]);
    const poller = new ProgressPoller(new ApiClient("", fetchFn), { onUpdate: () => {} });

    poller.start("ABCDEFGH12");
    await vi.advanceTimersByTimeAsync(0);
    expect(poller.active).toBe(false);
    await vi.advanceTimersByTimeAsync(30_000);
    expect(calls.status).toBe(1);
  });

  it("backs off on network errors and raises the banner after 3 failures", async () => {
    let attempts = 0;
    const fetchFn = async (): Promise<Response> => {
      attempts += 1;
      throw new Error("connection refused");
    };
    const failures: number[] = [];
    const poller = new ProgressPoller(new ApiClient("", fetchFn), {
      onUpdate: () => {},
      onError: (count) => failures.push(count),
    });

    poller.start("ABCDEFGH12");
    await vi.advanceTimersByTimeAsync(0);
    expect(failures).toEqual([1]);

    await vi.advanceTimersByTimeAsync(4000); // 2000 * 2^1
    expect(failures).toEqual([1, 2]);

    await vi.advanceTimersByTimeAsync(8000); // 2000 * 2^2
    expect(failures).toEqual([1, 2, 3]);
    expect(Math.max(...failures)).toBeGreaterThanOrEqual(3);
    expect(poller.active).toBe(true); // still retrying with backoff
    expect(attempts).toBe(3);
    poller.stop();
  });

  it("renders the not-found path on 404 and stops", async () => {
    const fetchFn = async (): Promise<Response> => new Response("missing", { status: 404 });
    let notFound = false;
    const poller = new ProgressPoller(new ApiClient("", fetchFn), {
      onUpdate: () => {},
      onNotFound: () => {
        notFound = true;
      },
    });

    poller.start("ZZZZZZZZZZ");
    await vi.advanceTimersByTimeAsync(0);
    expect(notFound).toBe(true);
    expect(poller.active).toBe(false);
  });

  it("keeps a single poll in flight: stop cancels the pending timer", async () => {
    const { fetchFn, calls } = stubServer([{ status: "running", done: 0, total: 6 }]);
    const poller = new ProgressPoller(new ApiClient("", fetchFn), { onUpdate: () => {} });
    poller.start("ABCDEFGH12");
    await vi.advanceTimersByTimeAsync(0);
    poller.stop();
    await vi.advanceTimersByTimeAsync(20_000);
    expect(calls.status).toBe(1);
  });
});
