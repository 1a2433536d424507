import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { DEBOUNCE_MS, ExplorerController } from "../src/controller.js";
import { ExplorerView } from "../src/render.js";
import { OPTIMIZE_FIXTURE, StubService, jsonResponse } from "./stub.js";

function mount() {
  document.body.innerHTML = '<div id="app"></div>';
  return new ExplorerView(document.getElementById("app") as HTMLElement);
}

async function loadedController(stub: StubService) {
  const controller = new ExplorerController(new ApiClient("http://stub", stub.fetchFn), mount());
  await controller.start();
  await controller.loadDemo("caution");
  await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
  stub.calls.length = 0;
  return controller;
}

describe("optimize flow", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("a burst of eps slider changes produces exactly one optimize call after the debounce", async () => {
    const stub = new StubService();
    const controller = await loadedController(stub);

    controller.onControlChange({ eps: 0.8 });
    controller.onControlChange({ eps: 0.5 });
    controller.onControlChange({ eps: 0.25 });
    expect(stub.callsTo("/optimize")).toHaveLength(0); // nothing before the quiet period

    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS - 10);
    expect(stub.callsTo("/optimize")).toHaveLength(0);
    await vi.advanceTimersByTimeAsync(20);

    const optimizeCalls = stub.callsTo("/optimize");
    expect(optimizeCalls).toHaveLength(1);
    // the request carries the final slider value, not the intermediate ones
    expect((optimizeCalls[0]!.body as { eps: number }).eps).toBe(0.25);
  });

  it("renders U, disparity, and Imp_B verbatim from the service response", async () => {
    const stub = new StubService();
    const controller = await loadedController(stub);

    controller.onControlChange({ eps: 0.25 });
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);

    const stats = OPTIMIZE_FIXTURE.stats!;
    expect(document.getElementById("stat-utility")!.textContent).toBe(String(stats.utility));
    expect(document.getElementById("stat-disparity")!.textContent).toBe(
      String(stats.disparity),
    );
    expect(document.getElementById("stat-impact-b")!.textContent).toBe(
      String(stats.per_group["B"]!.impact),
    );
    expect(document.getElementById("stat-value")!.textContent).toBe(
      String(OPTIMIZE_FIXTURE.value),
    );
    // the f(v,S) table shows every rule entry
    const ruleRows = document.querySelectorAll("#rule-table tr");
    expect(ruleRows).toHaveLength(1 + OPTIMIZE_FIXTURE.rule!.length);
  });

  it("renders 422 infeasibility diagnostics inline instead of a blank state", async () => {
    const stub = new StubService();
    const api = new ApiClient("http://stub", async (input, init) => {
      if (new URL(input).pathname.endsWith("/optimize")) {
        return jsonResponse(
          { status: "infeasible", diagnostics: "t_u=0.5 unreachable (max utility is 0.09)" },
          422,
        );
      }
      return stub.fetchFn(input, init);
    });
    const controller = new ExplorerController(api, mount());
    await controller.start();
    await controller.loadDemo("caution");
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);

    const diagnostics = document.getElementById("diagnostics")!.textContent!;
    expect(diagnostics).toContain("infeasible");
    expect(diagnostics).toContain("t_u=0.5 unreachable");
  });
});
