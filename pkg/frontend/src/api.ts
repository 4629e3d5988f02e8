import type { Assignment, MarkResponse, MarkValue, ProgressResponse } from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client for the curation service. The fetch function is
 * injectable so tests can run against a live service or a stub. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  getAssignment(curator: string): Promise<Assignment> {
    return this.request<Assignment>(`/api/assignment/${encodeURIComponent(curator)}`);
  }

  getProgress(): Promise<ProgressResponse> {
    return this.request<ProgressResponse>("/api/progress");
  }

  postMark(curator: string, uid: string, mark: MarkValue, note = ""): Promise<MarkResponse> {
    return this.request<MarkResponse>("/api/marks", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ curator, uid, mark, note }),
    });
  }
}
