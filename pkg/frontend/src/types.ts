/** Wire types mirroring the feedback service's JSON API. */

export interface GraphNode {
  id: string;
  label: string;
  author: string;
  proposed_level: number | null;
  accepted: boolean;
  in_grounded: boolean;
}

export interface GraphEdge {
  from: string;
  to: string;
  rationale: string;
}

export interface DimensionGraph {
  dimension: string;
  grade: number;
  contested: boolean;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface Grade {
  dimension_key: string;
  level: number;
}

export interface ReportEntry {
  dimension: string;
  grade: Grade;
  feedback_text: string;
  accepted_argument_ids: string[];
  contested: boolean;
  level_overridden: boolean;
  warnings: string[];
}

export interface Report {
  session_id: string;
  state: string;
  entries: ReportEntry[];
}

export type JobStatus = "pending" | "running" | "done" | "failed";

export interface JobHandle {
  job_id: string;
  status: JobStatus;
  result_ref: string | null;
  error: string | null;
}
