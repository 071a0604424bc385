import type { FetchLike } from "../src/api.js";

export interface RecordedFixtures {
  essay: string;
  challenge_text: string;
  create: { session_id: string };
  evaluate_job: { job_id: string };
  job_done: unknown;
  challenge_job: { job_id: string };
  challenge_job_done: unknown;
  report_initial: unknown;
  report_revised: unknown;
  graph_issue_initial: unknown;
  graph_issue_revised: unknown;
  [key: string]: unknown;
}

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/**
 * A fetch that replays the recorded service responses. Stateful in one way
 * only, like the real service: after the challenge is posted, report and
 * issue-graph reads return the revised recordings.
 */
export function makeReplayFetch(fx: RecordedFixtures): { fetchImpl: FetchLike; calls: string[] } {
  let challenged = false;
  const calls: string[] = [];
  const sid = fx.create.session_id;

  const fetchImpl: FetchLike = async (input, init) => {
    const method = init?.method ?? "GET";
    const url = input;
    calls.push(`${method} ${url}`);
    if (method === "POST" && url === "/sessions") return jsonResponse(fx.create, 201);
    if (method === "POST" && url === `/sessions/${sid}/evaluate`)
      return jsonResponse(fx.evaluate_job, 202);
    if (method === "POST" && url === `/sessions/${sid}/challenge`) {
      challenged = true;
      return jsonResponse(fx.challenge_job, 202);
    }
    if (method === "GET" && url === `/jobs/${fx.evaluate_job.job_id}`)
      return jsonResponse(fx.job_done);
    if (method === "GET" && url === `/jobs/${fx.challenge_job.job_id}`)
      return jsonResponse(fx.challenge_job_done);
    if (method === "GET" && url === `/sessions/${sid}/report`)
      return jsonResponse(challenged ? fx.report_revised : fx.report_initial);
    if (method === "GET" && url.startsWith(`/sessions/${sid}/graph/`)) {
      const dimension = url.split("/").pop() as string;
      if (dimension === "issue") {
        return jsonResponse(challenged ? fx.graph_issue_revised : fx.graph_issue_initial);
      }
      const recorded = fx[`graph_${dimension}_initial`];
      if (recorded) return jsonResponse(recorded);
    }
    return jsonResponse(
      { code: "unrecorded", message: `no recording for ${method} ${url}`, detail: "" },
      404
    );
  };
  return { fetchImpl, calls };
}

export async function waitFor(
  predicate: () => boolean,
  timeoutMs = 2000,
  what = "condition"
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) return;
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
  throw new Error(`timed out waiting for ${what}`);
}
