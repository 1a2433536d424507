import { ApiClient, ApiHttpError } from "./api.js";
import { debounce, type Debounced } from "./debounce.js";
import { Sequencer } from "./sequencer.js";
import type { ExplorerState } from "./state.js";
import { initialState, stateToHash } from "./state.js";
import type { ExplorerView } from "./render.js";
import type { SpecControls } from "./types.js";

export const DEBOUNCE_MS = 150;

/** The explorer loop: every control change is debounced into one /optimize
 * call; responses carry sequence tickets so a stale reply never overwrites a
 * newer one.  All displayed numbers come from the service responses. */
export class ExplorerController {
  readonly state: ExplorerState;
  private readonly optimizeQueue: Debounced<[]>;
  private readonly optimizeSeq = new Sequencer();
  private readonly onHashChange: (hash: string) => void;

  constructor(
    private readonly api: ApiClient,
    private readonly view: ExplorerView,
    options: {
      state?: ExplorerState;
      pushHash?: (hash: string) => void;
      debounceMs?: number;
    } = {},
  ) {
    this.state = options.state ?? initialState();
    this.onHashChange = options.pushHash ?? (() => undefined);
    this.optimizeQueue = debounce(() => {
      void this.runOptimize();
    }, options.debounceMs ?? DEBOUNCE_MS);
  }

  async start(): Promise<void> {
    const { demos } = await this.api.listDemos();
    this.view.renderDemos(demos);
    this.view.renderControls(this.state);
  }

  async loadDemo(name: string): Promise<void> {
    const session = await this.api.createDemoSession(name);
    this.state.sessionId = session.id;
    this.state.predictor = session.predictors[0] ?? null;
    this.state.comparePair = null;
    this.view.renderSession(session);
    this.publishState();
    this.requestOptimize();
  }

  async uploadPopulation(fileText: string): Promise<void> {
    const session = await this.api.uploadPopulation(fileText);
    this.state.sessionId = session.id;
    this.state.predictor = session.predictors[0] ?? null;
    this.view.renderSession(session);
    this.publishState();
    this.requestOptimize();
  }

  setPredictor(name: string): void {
    this.state.predictor = name;
    this.publishState();
    this.requestOptimize();
  }

  /** Slider/select handler: updates state and schedules one optimize call. */
  onControlChange(patch: Partial<SpecControls>): void {
    Object.assign(this.state.controls, patch);
    this.view.renderControls(this.state);
    this.publishState();
    this.requestOptimize();
  }

  requestOptimize(): void {
    if (!this.state.sessionId || !this.state.predictor) return;
    this.optimizeQueue();
  }

  /** Immediate optimize, bypassing the debounce (used on session load). */
  async runOptimize(): Promise<void> {
    const { sessionId, predictor } = this.state;
    if (!sessionId || !predictor) return;
    const ticket = this.optimizeSeq.next();
    try {
      const result = await this.api.optimize(
        sessionId,
        predictor,
        { ...this.state.controls },
        ticket.signal,
      );
      if (!this.optimizeSeq.isCurrent(ticket.seq)) return; // stale reply
      this.view.renderResult(result);
      await this.refreshCurves(result);
    } catch (error) {
      if (!this.optimizeSeq.isCurrent(ticket.seq)) return;
      if (error instanceof ApiHttpError && error.status === 422) {
        this.view.renderInfeasible(error.body);
        return;
      }
      if ((error as Error).name === "AbortError") return;
      this.view.renderError(`request failed: ${(error as Error).message}`);
    }
  }

  private async refreshCurves(result: {
    threshold_stats?: { per_group: Record<string, { beta: number }> };
  }): Promise<void> {
    const { sessionId, predictor } = this.state;
    if (!sessionId || !predictor) return;
    for (const group of ["A", "B"]) {
      try {
        const curves = await this.api.curves(sessionId, predictor, group);
        const beta = result.threshold_stats?.per_group[group]?.beta ?? null;
        this.view.renderCurves(group, curves.rows, beta);
      } catch {
        // a single-group population has no second curve; leave the panel empty
      }
    }
  }

  /** Merge q into the current predictor per group, then compare program values. */
  async mergeAndCompare(q: string): Promise<void> {
    const { sessionId, predictor } = this.state;
    if (!sessionId || !predictor) return;
    try {
      const merged = await this.api.merge(sessionId, predictor, q, true);
      this.view.renderMerge(merged);
      this.view.renderSession(merged.session);
      this.state.sessionId = merged.session.id;
      this.state.comparePair = { base: predictor, refined: merged.merged_predictor };
      this.publishState();
      const comparison = await this.api.compare(
        merged.session.id,
        predictor,
        merged.merged_predictor,
        { ...this.state.controls },
      );
      this.view.renderCompare(comparison);
    } catch (error) {
      if (error instanceof ApiHttpError) {
        this.view.renderError(`merge/compare failed: ${JSON.stringify(error.body)}`);
        return;
      }
      throw error;
    }
  }

  private publishState(): void {
    this.onHashChange(stateToHash(this.state));
  }
}
