import type {
  CompareDoc,
  CurveRowDoc,
  MergeDoc,
  OptimizationResultDoc,
  SessionDoc,
} from "./types.js";
import type { ExplorerState } from "./state.js";

/** DOM view: pure presentation.  Every number shown here is the verbatim
 * string form of a value returned by the service; the view never derives
 * statistics of its own. */
export class ExplorerView {
  constructor(private readonly root: HTMLElement) {
    this.root.innerHTML = LAYOUT;
  }

  private el(id: string): HTMLElement {
    const node = this.root.querySelector<HTMLElement>(`#${id}`);
    if (!node) throw new Error(`layout is missing #${id}`);
    return node;
  }

  renderDemos(names: string[]): void {
    this.el("demo-list").innerHTML = names
      .map((n) => `<button class="demo" data-demo="${n}">${n}</button>`)
      .join(" ");
  }

  renderSession(session: SessionDoc): void {
    this.el("session-info").textContent =
      `session ${session.id}: ${session.cells} cells, ` +
      `groups ${Object.keys(session.groups).join("/")}`;
    this.el("predictor-list").innerHTML = session.predictors
      .map((p) => `<option value="${p}">${p}</option>`)
      .join("");
  }

  renderControls(state: ExplorerState): void {
    const controls = state.controls;
    for (const [key, value] of Object.entries(controls)) {
      const input = this.root.querySelector<HTMLInputElement>(`[name="${key}"]`);
      if (input) input.value = String(value);
    }
  }

  renderResult(result: OptimizationResultDoc): void {
    this.el("diagnostics").textContent = "";
    const stats = result.stats;
    if (result.status !== "optimal" || !stats) return;
    this.el("stat-value").textContent = String(result.value);
    this.el("stat-utility").textContent = String(stats.utility);
    this.el("stat-disparity").textContent =
      stats.disparity === undefined ? "n/a" : String(stats.disparity);
    const groupB = stats.per_group["B"];
    this.el("stat-impact-b").textContent = groupB ? String(groupB.impact) : "n/a";

    const header = "<tr><th>group</th><th>beta</th><th>tpr</th><th>fpr</th><th>ppv</th></tr>";
    const rows = Object.entries(stats.per_group)
      .map(
        ([group, s]) =>
          `<tr><td>${group}</td><td>${s.beta}</td><td>${s.tpr ?? "-"}</td>` +
          `<td>${s.fpr ?? "-"}</td><td>${s.ppv ?? "-"}</td></tr>`,
      )
      .join("");
    this.el("group-stats").innerHTML = header + rows;

    const ruleRows = (result.rule ?? [])
      .map((entry) => `<tr><td>${entry.v}</td><td>${entry.group}</td><td>${entry.p}</td></tr>`)
      .join("");
    this.el("rule-table").innerHTML =
      "<tr><th>score</th><th>group</th><th>f(v,S)</th></tr>" + ruleRows;
  }

  renderInfeasible(body: Record<string, unknown>): void {
    const diagnostics = body["diagnostics"] ?? body["error"] ?? "infeasible";
    this.el("diagnostics").textContent = `infeasible: ${diagnostics}`;
  }

  renderError(message: string): void {
    this.el("diagnostics").textContent = message;
  }

  renderCurves(group: string, rows: CurveRowDoc[], thresholdBeta: number | null): void {
    const width = 220;
    const height = 160;
    const x = (beta: number) => 10 + beta * (width - 20);
    const y = (value: number) => height - 10 - value * (height - 20);
    const path = (pick: (row: CurveRowDoc) => number | null) =>
      rows
        .filter((row) => pick(row) !== null)
        .map((row, i) => `${i ? "L" : "M"}${x(row.beta).toFixed(1)},${y(pick(row) as number).toFixed(1)}`)
        .join(" ");
    const marker =
      thresholdBeta === null
        ? ""
        : `<line x1="${x(thresholdBeta)}" y1="10" x2="${x(thresholdBeta)}" ` +
          `y2="${height - 10}" class="marker" stroke="#888" stroke-dasharray="4"/>`;
    const svg =
      `<svg viewBox="0 0 ${width} ${height}" data-group="${group}">` +
      `<path d="${path((r) => r.tpr)}" fill="none" stroke="#2a7" class="tpr"/>` +
      `<path d="${path((r) => r.fpr)}" fill="none" stroke="#d44" class="fpr"/>` +
      marker +
      `</svg><figcaption>group ${group}: TPR (green), FPR (red)</figcaption>`;
    this.el(`curves-${group.toLowerCase()}`).innerHTML = svg;
  }

  renderMerge(doc: MergeDoc): void {
    const scopes = doc.per_scope
      .map(
        (s) =>
          `${s.scope}: I ${s.info_before.z} -> ${s.info_after} ` +
          `(guaranteed ${s.guaranteed_gain})`,
      )
      .join("; ");
    this.el("merge-info").textContent = `merged as ${doc.merged_predictor}; ${scopes}`;
  }

  renderCompare(doc: CompareDoc): void {
    const comparison = doc.comparisons[0];
    if (!comparison) return;
    this.el("compare-base").textContent = String(comparison.opt_base);
    this.el("compare-refined").textContent = String(comparison.opt_refined);
    this.el("compare-delta").textContent = String(comparison.margin);
    this.el("compare-verdict").textContent = comparison.ok
      ? "refinement keeps or improves the program value"
      : "violation reported by the service";
  }
}

const LAYOUT = `
<header>
  <h1>fairinfo explorer</h1>
  <div id="demo-list"></div>
  <div id="session-info">no session loaded</div>
</header>
<section id="controls">
  <select id="predictor-list"></select>
  <label>objective <select name="objective">
    <option>utility</option><option>disparity</option>
    <option>impact</option><option>combo</option>
  </select></label>
  <label>h <select name="fairness_metric">
    <option>beta</option><option>tpr</option><option>fpr</option>
  </select></label>
  <label>eps <input name="eps" type="range" min="0" max="1" step="0.01"></label>
  <label>t_i <input name="t_i" type="number" step="0.05"></label>
  <label>t_u <input name="t_u" type="number" step="0.05"></label>
  <label>tau_u <input name="tau_u" type="range" min="0" max="1" step="0.01"></label>
  <label>tau_l <input name="tau_l" type="range" min="0" max="1" step="0.01"></label>
  <label>lambda_u <input name="lambda_u" type="number" step="0.5"></label>
  <label>lambda_i <input name="lambda_i" type="number" step="0.5"></label>
  <label>lambda_beta <input name="lambda_beta" type="number" step="0.5"></label>
</section>
<section id="results">
  <div id="diagnostics" role="alert"></div>
  <dl>
    <dt>objective value</dt><dd id="stat-value"></dd>
    <dt>utility U</dt><dd id="stat-utility"></dd>
    <dt>disparity</dt><dd id="stat-disparity"></dd>
    <dt>impact on B</dt><dd id="stat-impact-b"></dd>
  </dl>
  <table id="group-stats"></table>
  <table id="rule-table"></table>
</section>
<section id="curves">
  <figure id="curves-a"></figure>
  <figure id="curves-b"></figure>
</section>
<section id="comparison">
  <button id="merge-compare">merge &amp; compare</button>
  <div id="merge-info"></div>
  <dl>
    <dt>OPT(base)</dt><dd id="compare-base"></dd>
    <dt>OPT(refined)</dt><dd id="compare-refined"></dd>
    <dt>delta</dt><dd id="compare-delta"></dd>
  </dl>
  <div id="compare-verdict"></div>
</section>
`;
