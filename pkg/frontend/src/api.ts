// Typed client for the study service (payload shapes documented in api.md).
// The client is a thin wrapper: no randomization, no plan bookkeeping, no
// retries beyond what the flows ask for.

export interface SessionInfo {
  session_id: string;
  token: string;
  study: 'pairwise' | 'rating';
  domain: string;
  n_tasks: number;
  seed: number;
}

export interface ScenarioPayload {
  id: string;
  domain: string;
  title: string;
  narrative: string;
  scale_notes: string;
  profile_rows: [string, string][];
  decision_header: string;
  decision_text: string;
}

export interface Question {
  id: string;
  text: string;
  topic: string;
}

interface TaskBase {
  done: false;
  task_index: number;
  n_tasks: number;
  study: 'pairwise' | 'rating';
  role_framing: string | null;
  scenario: ScenarioPayload;
}

export interface RatingTask extends TaskBase {
  study: 'rating';
  explanation: { text: string };
  instrument: Question[];
  scale: { points: number; anchors: Record<string, string> };
}

export interface PairwiseTask extends TaskBase {
  study: 'pairwise';
  prompt: string;
  panels: { side: 'A' | 'B'; text: string }[];
}

export type NextTask = { done: true } | RatingTask | PairwiseTask;

export interface SubmitResult {
  stored: string;
  done: boolean;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function asJson<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let code = `HTTP_${response.status}`;
    let message = response.statusText;
    try {
      const body = await response.json();
      code = body.code ?? code;
      message = body.message ?? message;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, code, message);
  }
  return (await response.json()) as T;
}

export class StudyClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = (...args) => fetch(...args),
  ) {}

  createSession(body: {
    participant: string;
    study?: 'pairwise' | 'rating';
    seed?: number;
    demographics?: Record<string, string>;
  }): Promise<SessionInfo> {
    return this.request('POST', '/sessions', body);
  }

  nextTask(session: SessionInfo): Promise<NextTask> {
    return this.request(
      'GET',
      `/sessions/${session.session_id}/next?token=${encodeURIComponent(session.token)}`,
    );
  }

  submit(
    session: SessionInfo,
    body:
      | { scenario_id: string; answers: Record<string, number>; elapsed_s: number }
      | { scenario_id: string; choice: 'A' | 'B' },
  ): Promise<SubmitResult> {
    return this.request(
      'POST',
      `/sessions/${session.session_id}/responses?token=${encodeURIComponent(session.token)}`,
      body,
    );
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    return asJson<T>(response);
  }
}
