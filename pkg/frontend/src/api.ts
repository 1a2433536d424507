import type {
  CompareDoc,
  CurvesDoc,
  MergeDoc,
  OptimizationResultDoc,
  SessionDoc,
  SpecControls,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx reply carrying the service's JSON diagnostics (e.g. 422 infeasible). */
export class ApiHttpError extends Error {
  constructor(
    readonly status: number,
    readonly body: Record<string, unknown>,
  ) {
    super(`service replied ${status}`);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = (await response.json()) as T;
    if (!response.ok) {
      throw new ApiHttpError(response.status, body as Record<string, unknown>);
    }
    return body;
  }

  private post<T>(path: string, body: unknown, signal?: AbortSignal): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
      signal,
    });
  }

  listDemos(): Promise<{ demos: string[] }> {
    return this.request("/demos");
  }

  createDemoSession(name: string): Promise<SessionDoc> {
    return this.post("/sessions", { demo: name });
  }

  uploadPopulation(fileText: string): Promise<SessionDoc> {
    return this.request("/sessions", { method: "POST", body: fileText });
  }

  optimize(
    sessionId: string,
    predictor: string,
    spec: SpecControls,
    signal?: AbortSignal,
  ): Promise<OptimizationResultDoc> {
    return this.post(`/sessions/${sessionId}/optimize`, { predictor, ...spec }, signal);
  }

  curves(sessionId: string, predictor: string, group: string, points = 101): Promise<CurvesDoc> {
    return this.request(
      `/sessions/${sessionId}/curves?predictor=${encodeURIComponent(predictor)}` +
        `&group=${group}&points=${points}`,
    );
  }

  merge(sessionId: string, z: string, q: string, perGroup: boolean): Promise<MergeDoc> {
    return this.post(`/sessions/${sessionId}/merge`, { z, q, per_group: perGroup });
  }

  compare(
    sessionId: string,
    base: string,
    refined: string,
    spec: SpecControls,
  ): Promise<CompareDoc> {
    const query = new URLSearchParams({ base, refined, spec: JSON.stringify(spec) });
    return this.request(`/sessions/${sessionId}/compare?${query.toString()}`);
  }
}
