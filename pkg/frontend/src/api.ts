// Typed client for the annotation service JSON API. The UI talks to the
// server exclusively through this module.

export type Criterion = "lang" | "comp" | "givn" | "relv";
export const CRITERIA: Criterion[] = ["lang", "comp", "givn", "relv"];

export type Role = "answer" | "anchor" | "prior-context" | "post-context";

export interface SentenceView {
  index: number;
  text: string;
  roles: Role[];
}

export interface TaskView {
  edge_id: string;
  question: string;
  ordinal: number;
  sentences: SentenceView[];
  anchor_idx: number;
  answer_idx: number;
  forced_skip: boolean;
  options: Record<Criterion, string[]>;
  progress: { completed: number; total: number };
}

export interface TaskFlag {
  edge_id: string;
  completed: boolean;
}

export interface ProgressView {
  completed: number;
  total: number;
  tasks: TaskFlag[];
  survey_code?: string;
}

export interface AnnotationBody {
  edge_id: string;
  annotator_id: string;
  lang: string;
  comp: string;
  givn: string;
  relv: string;
  comment: string;
}

export interface FeedbackRow {
  edge_id: string;
  lang: string;
  comp: string;
  givn: string;
  relv: string;
  comment: string;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = typeof fetch;

export class ApiClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async nextTask(annotator: string): Promise<TaskView | null> {
    const response = await this.fetchFn(
      this.url(`/api/tasks/next?annotator=${encodeURIComponent(annotator)}`),
    );
    if (response.status === 204) {
      return null;
    }
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as TaskView;
  }

  async submit(body: AnnotationBody): Promise<void> {
    const response = await this.fetchFn(this.url("/api/annotations"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (response.status !== 201) {
      let message = `submission failed (${response.status})`;
      try {
        const payload = (await response.json()) as { error?: string };
        if (payload.error) {
          message = payload.error;
        }
      } catch {
        // keep the generic message
      }
      throw new ApiError(response.status, message);
    }
  }

  async progress(annotator: string): Promise<ProgressView> {
    const response = await this.fetchFn(
      this.url(`/api/progress?annotator=${encodeURIComponent(annotator)}`),
    );
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as ProgressView;
  }

  async annotations(annotator: string): Promise<FeedbackRow[]> {
    const response = await this.fetchFn(
      this.url(`/api/annotations?annotator=${encodeURIComponent(annotator)}`),
    );
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as FeedbackRow[];
  }

  async exportLabels(): Promise<string> {
    const response = await this.fetchFn(this.url("/api/export"));
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return await response.text();
  }
}
