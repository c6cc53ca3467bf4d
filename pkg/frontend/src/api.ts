import type { Meta, SceneEditResponse, SceneOp, SolutionRecord } from "./types.js";

/**
 * Typed client for the explorer endpoints with latest-wins semantics:
 * a new generate (or sweep) call aborts the one still in flight, so slider
 * streams can never apply stale responses out of order.
 */
export class ApiClient {
  private controllers = new Map<string, AbortController>();

  constructor(
    private baseUrl: string = "",
    private fetchFn: typeof fetch = fetch.bind(globalThis),
  ) {}

  private async request<T>(key: string, path: string, init?: RequestInit): Promise<T> {
    this.controllers.get(key)?.abort();
    const controller = new AbortController();
    this.controllers.set(key, controller);
    const resp = await this.fetchFn(this.baseUrl + path, { ...init, signal: controller.signal });
    if (this.controllers.get(key) !== controller) {
      throw new DOMException("superseded by a newer request", "AbortError");
    }
    if (!resp.ok) {
      let message = `${resp.status}`;
      try {
        const body = (await resp.json()) as { error?: string };
        if (body.error) message = body.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new Error(`${path} failed: ${message}`);
    }
    return (await resp.json()) as T;
  }

  meta(): Promise<Meta> {
    return this.request<Meta>("meta", "/api/meta");
  }

  generate(z: number[], finetune = false): Promise<SolutionRecord> {
    return this.request<SolutionRecord>("generate", "/api/generate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ z, finetune }),
    });
  }

  sweep(count: number): Promise<SolutionRecord[]> {
    return this.request<SolutionRecord[]>("sweep", `/api/sweep?count=${count}`);
  }

  editScene(op: SceneOp): Promise<SceneEditResponse> {
    return this.request<SceneEditResponse>("scene", "/api/scene/obstacles", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(op),
    });
  }
}

export function isAbort(err: unknown): boolean {
  return err instanceof DOMException && err.name === "AbortError";
}
