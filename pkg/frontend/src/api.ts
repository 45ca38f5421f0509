/** Typed client for the session-review HTTP API. */

export interface SegmentView {
  index: number;
  start: number;
  end: number;
  status: "active" | "ignored";
  transcript: string | null;
  flagged: boolean;
  duration: number;
}

export interface FailureInfo {
  message: string;
  violations: string[];
}

export interface SessionView {
  id: string;
  phase: string;
  bundle_id: string;
  video_rate: number;
  frame_count: number;
  segments: SegmentView[];
  active_count: number;
  compiled: boolean;
  last_failure: FailureInfo | null;
}

export interface CompileResult {
  model: string;
  view: SessionView;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

async function decode(response: Response): Promise<unknown> {
  const type = response.headers.get("content-type") ?? "";
  const body = type.includes("json") ? await response.json() : await response.text();
  if (!response.ok) {
    const err = (body as { error?: { code?: string; message?: string; detail?: Record<string, unknown> } }).error;
    throw new ApiError(
      response.status,
      err?.code ?? "error",
      err?.message ?? `HTTP ${response.status}`,
      err?.detail ?? {},
    );
  }
  return body;
}

export class Client {
  constructor(readonly baseUrl: string) {}

  private async call(method: string, path: string, body?: unknown): Promise<unknown> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      init.headers = { "Content-Type": "application/json" };
    }
    return decode(await fetch(this.baseUrl + path, init));
  }

  createSession(bundlePath: string): Promise<SessionView> {
    return this.call("POST", "/sessions", { bundle_path: bundlePath }) as Promise<SessionView>;
  }

  getSession(id: string): Promise<SessionView> {
    return this.call("GET", `/sessions/${id}`) as Promise<SessionView>;
  }

  mergeSegments(id: string, first: number, second: number): Promise<SessionView> {
    return this.call("POST", `/sessions/${id}/segments/merge`, { first, second }) as Promise<SessionView>;
  }

  ignoreSegment(id: string, index: number): Promise<SessionView> {
    return this.call("POST", `/sessions/${id}/segments/${index}/ignore`) as Promise<SessionView>;
  }

  confirmSegments(id: string): Promise<SessionView> {
    return this.call("POST", `/sessions/${id}/segments/confirm`) as Promise<SessionView>;
  }

  setTranscript(id: string, index: number, text: string): Promise<SessionView> {
    return this.call("PUT", `/sessions/${id}/segments/${index}/transcript`, { text }) as Promise<SessionView>;
  }

  confirmTranscripts(id: string): Promise<SessionView> {
    return this.call("POST", `/sessions/${id}/transcripts/confirm`) as Promise<SessionView>;
  }

  compile(id: string): Promise<CompileResult> {
    return this.call("POST", `/sessions/${id}/compile`) as Promise<CompileResult>;
  }

  taskModel(id: string): Promise<string> {
    return this.call("GET", `/sessions/${id}/taskmodel`) as Promise<string>;
  }

  signalCsv(id: string): Promise<string> {
    return this.call("GET", `/sessions/${id}/signal`) as Promise<string>;
  }

  thumbnailUrl(id: string, index: number): string {
    return `${this.baseUrl}/sessions/${id}/segments/${index}/thumbnail`;
  }
}

/** Parse the diagnostics CSV (frame_index,raw,deoutliered,filtered,is_stop). */
export function parseSignalCsv(csv: string): { filtered: number[]; stops: number[] } {
  const filtered: number[] = [];
  const stops: number[] = [];
  const lines = csv.trim().split("\n");
  for (const line of lines.slice(1)) {
    const cols = line.split(",");
    if (cols.length < 5) continue;
    filtered.push(Number(cols[3]));
    if (cols[4] === "1") stops.push(Number(cols[0]));
  }
  return { filtered, stops };
}

/** Extract the ordered step labels out of a serialized task-model document. */
export function modelStepLabels(document: string): string[] {
  const labels: string[] = [];
  for (const line of document.split("\n")) {
    const match = /^step \d+: label=(.+)$/.exec(line);
    if (match) labels.push(match[1]);
  }
  return labels;
}
