import { ApiClient } from "./api.js";
import { ExplorerController } from "./controller.js";
import { ExplorerView } from "./render.js";
import { stateFromHash } from "./state.js";
import type { Metric, Objective } from "./types.js";

const SERVICE_URL =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8151";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const view = new ExplorerView(root);
const controller = new ExplorerController(new ApiClient(SERVICE_URL), view, {
  state: stateFromHash(window.location.hash),
  pushHash: (hash) => history.replaceState(null, "", hash),
});

root.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const demo = target.dataset["demo"];
  if (demo) void controller.loadDemo(demo);
  if (target.id === "merge-compare") {
    const predictor = controller.state.predictor;
    if (predictor) void controller.mergeAndCompare(predictor);
  }
});

root.addEventListener("input", (event) => {
  const input = event.target as HTMLInputElement | HTMLSelectElement;
  if (!input.name) return;
  if (input.name === "objective") {
    controller.onControlChange({ objective: input.value as Objective });
  } else if (input.name === "fairness_metric") {
    controller.onControlChange({ fairness_metric: input.value as Metric });
  } else {
    controller.onControlChange({ [input.name]: Number(input.value) });
  }
});

root.addEventListener("change", (event) => {
  const select = event.target as HTMLSelectElement;
  if (select.id === "predictor-list") controller.setPredictor(select.value);
});

void controller.start();
