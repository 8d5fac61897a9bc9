/** Thin fetch wrappers around the dialogue manager REST endpoints. */

import type {
  FramePayload,
  ModelInfo,
  Policy,
  SessionCreated,
  SessionDoc,
  TurnPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(path, init);
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    const detail =
      typeof body === "object" && body !== null && "error" in body
        ? String((body as { error: unknown }).error)
        : resp.statusText;
    throw new ApiError(resp.status, detail);
  }
  return body as T;
}

function post<T>(path: string, payload: unknown): Promise<T> {
  return request<T>(path, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export function createSession(policy: Policy): Promise<SessionCreated> {
  return post("/api/sessions", { policy });
}

/**
 * Post one user turn. When `frame` is given it is sent verbatim and the
 * server skips its own utterance parsing.
 */
export function postTurn(
  sessionId: string,
  utterance: string,
  frame?: FramePayload,
): Promise<TurnPayload> {
  const body: Record<string, unknown> = { utterance };
  if (frame !== undefined) body.frame = frame;
  return post(`/api/sessions/${sessionId}/turns`, body);
}

export function getSession(sessionId: string): Promise<SessionDoc> {
  return request(`/api/sessions/${sessionId}`);
}

export function getModel(): Promise<ModelInfo> {
  return request("/api/model");
}
