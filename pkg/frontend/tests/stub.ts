/** A scripted stand-in for the analysis service, used by the contract tests.
 * Records every request and serves canned JSON fixtures; individual routes
 * can be overridden with deferred promises to orchestrate race conditions. */

import type { FetchLike } from "../src/api.js";
import type {
  CompareDoc,
  MergeDoc,
  OptimizationResultDoc,
  SessionDoc,
} from "../src/types.js";

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
}

export const SESSION_FIXTURE: SessionDoc = {
  id: "s-demo",
  cells: 4,
  groups: { A: 0.6, B: 0.4 },
  predictors: ["z"],
};

export const OPTIMIZE_FIXTURE: OptimizationResultDoc = {
  spec: {
    objective: "utility",
    fairness_metric: "beta",
    eps: 0.25,
    t_i: -1,
    t_u: -1,
    tau_u: 0.7,
    tau_l: 0.5,
    lambda_u: 1,
    lambda_i: 0,
    lambda_beta: 0,
  },
  predictor: "z",
  status: "optimal",
  value: 0.0665,
  rule: [
    { v: 0, group: "A", p: 0 },
    { v: 1, group: "A", p: 1 },
    { v: 0.5, group: "B", p: 0.5125 },
  ],
  threshold_policy: {
    A: { tau: 0.7, tie_probability: 0 },
    B: { tau: 0.5, tie_probability: 0.5125 },
  },
  stats: {
    utility: 0.0665,
    disparity: 0.25,
    per_group: {
      A: { beta: 0.5, tpr: 1, fpr: 0, ppv: 1, impact: 0.25 },
      B: { beta: 0.25, tpr: 0.25, fpr: 0.25, ppv: 0.5, impact: 0.0125 },
    },
  },
  threshold_stats: {
    utility: 0.0665,
    disparity: 0.25,
    per_group: {
      A: { beta: 0.5, tpr: 1, fpr: 0, ppv: 1, impact: 0.25 },
      B: { beta: 0.25, tpr: 0.25, fpr: 0.25, ppv: 0.5, impact: 0.0125 },
    },
  },
};

export const MERGE_FIXTURE: MergeDoc = {
  result: "merge(z,q)",
  estimated: false,
  per_scope: [
    {
      scope: "A",
      info_before: { z: 0.2, q: 0.1 },
      info_after: 0.35,
      distances: { qz: 0.15, zq: 0.1 },
      guaranteed_gain: 0.29,
      eta: 0.1,
    },
  ],
  session: { id: "s-merged", cells: 4, groups: { A: 0.6, B: 0.4 }, predictors: ["z", "merge(z,q)"] },
  merged_predictor: "merge(z,q)",
};

export const COMPARE_FIXTURE: CompareDoc = {
  ok: true,
  comparisons: [
    {
      spec: { objective: "utility" },
      base_status: "optimal",
      refined_status: "optimal",
      opt_base: 0.05,
      opt_refined: 0.09,
      margin: 0.04,
      witness_ok: true,
      ok: true,
    },
  ],
};

type Responder = (call: RecordedCall) => Promise<unknown> | unknown;

export class StubService {
  calls: RecordedCall[] = [];
  private overrides = new Map<string, Responder>();

  /** Route key is "METHOD /path-prefix". */
  override(route: string, responder: Responder): void {
    this.overrides.set(route, responder);
  }

  callsTo(prefix: string): RecordedCall[] {
    return this.calls.filter((c) => c.path.includes(prefix));
  }

  readonly fetchFn: FetchLike = async (input, init) => {
    const url = new URL(input);
    const path = url.pathname + url.search;
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    const call: RecordedCall = { method, path, body };
    this.calls.push(call);

    for (const [route, responder] of this.overrides) {
      const [routeMethod, routePrefix] = route.split(" ", 2);
      if (method === routeMethod && path.startsWith(routePrefix!)) {
        return jsonResponse(await responder(call));
      }
    }
    return jsonResponse(this.defaultRoute(method, path));
  };

  private defaultRoute(method: string, path: string): unknown {
    if (method === "GET" && path === "/demos") return { demos: ["caution", "figure1"] };
    if (method === "POST" && path === "/sessions") return SESSION_FIXTURE;
    if (method === "POST" && path.endsWith("/optimize")) return OPTIMIZE_FIXTURE;
    if (method === "POST" && path.endsWith("/merge")) return MERGE_FIXTURE;
    if (method === "GET" && path.includes("/compare")) return COMPARE_FIXTURE;
    if (method === "GET" && path.includes("/curves")) {
      return {
        group: "A",
        rows: [
          { beta: 0, tpr: 0, fpr: 0, ppv: null },
          { beta: 1, tpr: 1, fpr: 1, ppv: 0.5 },
        ],
      };
    }
    throw new Error(`stub has no route for ${method} ${path}`);
  }
}

export function jsonResponse(doc: unknown, status = 200): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function deferred<T>(): { promise: Promise<T>; resolve: (v: T) => void } {
  let resolve!: (v: T) => void;
  const promise = new Promise<T>((r) => {
    resolve = r;
  });
  return { promise, resolve };
}
