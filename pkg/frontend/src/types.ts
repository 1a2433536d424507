/** JSON shapes of the analysis service; the UI treats all of them as opaque
 * facts to display and never derives statistics of its own. */

export type Objective = "utility" | "disparity" | "impact" | "combo";
export type Metric = "beta" | "tpr" | "fpr";

export interface SpecControls {
  objective: Objective;
  fairness_metric: Metric;
  eps: number;
  t_i: number;
  t_u: number;
  tau_u: number;
  tau_l: number;
  lambda_u: number;
  lambda_i: number;
  lambda_beta: number;
}

export interface GroupStatsDoc {
  beta: number;
  tpr: number | null;
  fpr: number | null;
  ppv: number | null;
  impact: number;
}

export interface PolicyStatsDoc {
  utility: number;
  per_group: Record<string, GroupStatsDoc>;
  disparity?: number;
}

export interface RuleEntryDoc {
  v: number;
  group: string;
  p: number;
}

export interface ThresholdDoc {
  tau: number;
  tie_probability: number;
}

export interface OptimizationResultDoc {
  spec: SpecControls & Record<string, unknown>;
  predictor: string;
  status: "optimal" | "infeasible";
  value?: number;
  rule?: RuleEntryDoc[];
  threshold_policy?: Record<string, ThresholdDoc>;
  stats?: PolicyStatsDoc;
  threshold_stats?: PolicyStatsDoc;
  diagnostics?: string;
}

export interface SessionDoc {
  id: string;
  cells: number;
  groups: Record<string, number>;
  predictors: string[];
}

export interface CurveRowDoc {
  beta: number;
  tpr: number | null;
  fpr: number | null;
  ppv: number | null;
}

export interface CurvesDoc {
  group: string;
  rows: CurveRowDoc[];
}

export interface MergeScopeDoc {
  scope: string;
  info_before: { z: number; q: number };
  info_after: number;
  distances: { qz: number; zq: number };
  guaranteed_gain: number;
  eta: number;
}

export interface MergeDoc {
  result: string;
  estimated: boolean;
  per_scope: MergeScopeDoc[];
  session: SessionDoc;
  merged_predictor: string;
}

export interface ComparisonDoc {
  spec: Record<string, unknown>;
  base_status: string;
  refined_status: string;
  opt_base: number | null;
  opt_refined: number | null;
  margin: number | null;
  witness_ok: boolean | null;
  ok: boolean;
}

export interface CompareDoc {
  ok: boolean;
  comparisons: ComparisonDoc[];
}

export const DEFAULT_CONTROLS: SpecControls = {
  objective: "utility",
  fairness_metric: "beta",
  eps: 1,
  t_i: -1,
  t_u: -1,
  tau_u: 0.7,
  tau_l: 0.5,
  lambda_u: 1,
  lambda_i: 0,
  lambda_beta: 0,
};
