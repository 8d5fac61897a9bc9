import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiError, createSession, getModel, postTurn } from "../src/api.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("api client", () => {
  it("createSession posts the policy and returns the parsed body", async () => {
    const reply = {
      session_id: "s1",
      policy: "hybrid",
      action_names: ["a"],
      greeting: "hi",
      turn: {},
    };
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, reply));
    vi.stubGlobal("fetch", fetchMock);

    const created = await createSession("hybrid");
    expect(created.session_id).toBe("s1");
    const [url, init] = fetchMock.mock.calls[0]!;
    expect(url).toBe("/api/sessions");
    expect(init.method).toBe("POST");
    expect(JSON.parse(init.body)).toEqual({ policy: "hybrid" });
  });

  it("postTurn omits the frame unless one is given", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, {}));
    vi.stubGlobal("fetch", fetchMock);

    await postTurn("s1", "hello");
    expect(JSON.parse(fetchMock.mock.calls[0]![1].body)).toEqual({ utterance: "hello" });
  });

  it("postTurn passes a manual frame override verbatim", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(200, {}));
    vi.stubGlobal("fetch", fetchMock);

    const frame = {
      intent: "request",
      informed: { food: "chinese" },
      requested: ["phone", "address"],
    };
    await postTurn("s1", "give me the details", frame);
    const body = JSON.parse(fetchMock.mock.calls[0]![1].body);
    expect(body.frame).toEqual(frame);
    expect(fetchMock.mock.calls[0]![0]).toBe("/api/sessions/s1/turns");
  });

  it("surfaces server error messages with the status code", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(jsonResponse(409, { error: "session is busy with another turn" })),
    );

    const err = await postTurn("s1", "hi").catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(409);
    expect((err as ApiError).message).toContain("busy");
  });

  it("falls back to the status text when the body is not json", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(new Response("<html>", { status: 502, statusText: "Bad Gateway" })),
    );

    const err = await getModel().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).message).toBe("Bad Gateway");
  });
});
