/** Payload types for the curation service API. Field names are fixed by the
 * service's API reference; keep them in sync with the backend README. */

export type MarkValue = "C" | "I" | "U";

export interface Task {
  uid: string;
  doc_id: string;
  sentence: string;
  label: "Known" | "Unknown";
  gene_surface: string;
  gene_start: number;
  gene_end: number;
  phenotype_surface: string;
  phenotype_start: number;
  phenotype_end: number;
  mark: MarkValue | null;
  note: string;
}

export interface Assignment {
  curator: string;
  tasks: Task[];
}

export interface ProgressCounts {
  marked: number;
  total: number;
}

export interface ProgressResponse {
  progress: Record<string, ProgressCounts>;
}

export interface MarkResponse {
  curator: string;
  uid: string;
  mark: MarkValue;
  stored: boolean;
  changed: boolean;
}
