import type { SpecControls } from "./types.js";
import { DEFAULT_CONTROLS } from "./types.js";

/** Everything needed to restore a what-if view: session, predictor choices,
 * and the full spec control block.  Serializes losslessly to a URL hash. */
export interface ExplorerState {
  sessionId: string | null;
  predictor: string | null;
  comparePair: { base: string; refined: string } | null;
  controls: SpecControls;
}

export function initialState(): ExplorerState {
  return {
    sessionId: null,
    predictor: null,
    comparePair: null,
    controls: { ...DEFAULT_CONTROLS },
  };
}

const NUMERIC_KEYS = [
  "eps",
  "t_i",
  "t_u",
  "tau_u",
  "tau_l",
  "lambda_u",
  "lambda_i",
  "lambda_beta",
] as const;

export function stateToHash(state: ExplorerState): string {
  const params = new URLSearchParams();
  if (state.sessionId) params.set("session", state.sessionId);
  if (state.predictor) params.set("predictor", state.predictor);
  if (state.comparePair) {
    params.set("base", state.comparePair.base);
    params.set("refined", state.comparePair.refined);
  }
  params.set("objective", state.controls.objective);
  params.set("h", state.controls.fairness_metric);
  for (const key of NUMERIC_KEYS) {
    params.set(key, String(state.controls[key]));
  }
  return `#${params.toString()}`;
}

export function stateFromHash(hash: string): ExplorerState {
  const state = initialState();
  const params = new URLSearchParams(hash.replace(/^#/, ""));
  state.sessionId = params.get("session");
  state.predictor = params.get("predictor");
  const base = params.get("base");
  const refined = params.get("refined");
  if (base && refined) state.comparePair = { base, refined };
  const objective = params.get("objective");
  if (objective) state.controls.objective = objective as SpecControls["objective"];
  const metric = params.get("h");
  if (metric) state.controls.fairness_metric = metric as SpecControls["fairness_metric"];
  for (const key of NUMERIC_KEYS) {
    const raw = params.get(key);
    if (raw !== null && raw !== "" && Number.isFinite(Number(raw))) {
      state.controls[key] = Number(raw);
    }
  }
  return state;
}
