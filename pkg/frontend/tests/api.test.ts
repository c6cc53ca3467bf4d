import { describe, expect, it } from "vitest";
import { ApiClient, isAbort } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

describe("ApiClient latest-wins", () => {
  it("aborts the in-flight request when a newer one starts", async () => {
    const gates: Array<() => void> = [];
    const fetchFn = (async (_url: RequestInfo | URL, init?: RequestInit) => {
      const signal = init?.signal ?? null;
      await new Promise<void>((resolve, reject) => {
        gates.push(resolve);
        signal?.addEventListener("abort", () =>
          reject(new DOMException("aborted", "AbortError")),
        );
      });
      return jsonResponse({ z: [0], x_raw: [], score_raw: 0 });
    }) as typeof fetch;

    const api = new ApiClient("", fetchFn);
    const first = api.generate([0.1]);
    const second = api.generate([0.2]);
    gates[1]();
    await expect(second).resolves.toMatchObject({ score_raw: 0 });
    await expect(first).rejects.toSatisfy(isAbort);
  });

  it("rejects stale responses that resolve after being superseded", async () => {
    // a fetch implementation that ignores the abort signal entirely
    const gates: Array<() => void> = [];
    const fetchFn = (async () => {
      await new Promise<void>((resolve) => gates.push(resolve));
      return jsonResponse({ ok: true });
    }) as typeof fetch;

    const api = new ApiClient("", fetchFn);
    const first = api.sweep(4);
    const second = api.sweep(8);
    gates[0](); // the OLD request resolves late
    gates[1]();
    await expect(second).resolves.toEqual({ ok: true });
    await expect(first).rejects.toSatisfy(isAbort);
  });

  it("surfaces server error bodies", async () => {
    const fetchFn = (async () => jsonResponse({ error: "count must be between 2 and 64" }, 400)) as typeof fetch;
    const api = new ApiClient("", fetchFn);
    await expect(api.sweep(99)).rejects.toThrow(/count must be between 2 and 64/);
  });

  it("sends the generate payload", async () => {
    let seen: { url: string; body: string } | undefined;
    const fetchFn = (async (url: RequestInfo | URL, init?: RequestInit) => {
      seen = { url: String(url), body: String(init?.body) };
      return jsonResponse({});
    }) as typeof fetch;
    const api = new ApiClient("http://x", fetchFn);
    await api.generate([0.25], true);
    expect(seen?.url).toBe("http://x/api/generate");
    expect(JSON.parse(seen!.body)).toEqual({ z: [0.25], finetune: true });
  });
});
