import type { DimensionGraph, JobHandle, Report } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail = ""
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Thin typed client over the service endpoints; jobs are polled. */
export class ApiClient {
  constructor(
    private baseUrl = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init)
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const err = (body ?? {}) as { code?: string; message?: string; detail?: string };
      throw new ApiError(
        response.status,
        err.code ?? "http_error",
        err.message ?? `request failed with status ${response.status}`,
        err.detail ?? ""
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload?: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
  }

  createSession(essay: string, rubric?: string): Promise<{ session_id: string }> {
    return this.post("/sessions", rubric ? { essay, rubric } : { essay });
  }

  evaluate(sessionId: string): Promise<{ job_id: string }> {
    return this.post(`/sessions/${sessionId}/evaluate`);
  }

  challenge(sessionId: string, dimension: string, text: string): Promise<{ job_id: string }> {
    return this.post(`/sessions/${sessionId}/challenge`, { dimension, text });
  }

  getJob(jobId: string): Promise<JobHandle> {
    return this.request(`/jobs/${jobId}`);
  }

  getReport(sessionId: string): Promise<Report> {
    return this.request(`/sessions/${sessionId}/report`);
  }

  getGraph(sessionId: string, dimension: string): Promise<DimensionGraph> {
    return this.request(`/sessions/${sessionId}/graph/${dimension}`);
  }

  /**
   * Poll a job until it reaches a terminal state. Resolves on done,
   * rejects on failed.
   */
  pollJob(jobId: string, intervalMs = 750): Promise<JobHandle> {
    return new Promise((resolve, reject) => {
      const tick = async () => {
        let job: JobHandle;
        try {
          job = await this.getJob(jobId);
        } catch (err) {
          reject(err);
          return;
        }
        if (job.status === "done") {
          resolve(job);
        } else if (job.status === "failed") {
          reject(new ApiError(500, "job_failed", job.error ?? "job failed"));
        } else {
          setTimeout(tick, intervalMs);
        }
      };
      void tick();
    });
  }
}
