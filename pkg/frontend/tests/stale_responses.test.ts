import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { DEBOUNCE_MS, ExplorerController } from "../src/controller.js";
import { ExplorerView } from "../src/render.js";
import { Sequencer } from "../src/sequencer.js";
import {
  OPTIMIZE_FIXTURE,
  StubService,
  deferred,
  jsonResponse,
} from "./stub.js";

function mount() {
  document.body.innerHTML = '<div id="app"></div>';
  return new ExplorerView(document.getElementById("app") as HTMLElement);
}

describe("monotone rendering", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("sequencer accepts only the newest ticket and aborts the older request", () => {
    const sequencer = new Sequencer();
    const first = sequencer.next();
    const second = sequencer.next();
    expect(first.signal.aborted).toBe(true);
    expect(second.signal.aborted).toBe(false);
    expect(sequencer.isCurrent(first.seq)).toBe(false);
    expect(sequencer.isCurrent(second.seq)).toBe(true);
  });

  it("a slow early optimize response never overwrites a later one", async () => {
    const stub = new StubService();
    const slow = deferred<Response>();
    let optimizeCalls = 0;
    const api = new ApiClient("http://stub", async (input, init) => {
      if (new URL(input).pathname.endsWith("/optimize")) {
        optimizeCalls += 1;
        if (optimizeCalls === 1) return slow.promise; // first reply stalls
        return jsonResponse({
          ...OPTIMIZE_FIXTURE,
          value: 0.2,
          stats: { ...OPTIMIZE_FIXTURE.stats!, utility: 0.2 },
        });
      }
      return stub.fetchFn(input, init);
    });
    const controller = new ExplorerController(api, mount());
    await controller.start();
    await controller.loadDemo("caution");

    // first request goes out and stalls
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    expect(optimizeCalls).toBe(1);

    // second request supersedes it and renders
    controller.onControlChange({ eps: 0 });
    await vi.advanceTimersByTimeAsync(DEBOUNCE_MS + 10);
    expect(optimizeCalls).toBe(2);
    expect(document.getElementById("stat-utility")!.textContent).toBe("0.2");

    // the stale reply finally lands: the view must not change
    slow.resolve(jsonResponse({
      ...OPTIMIZE_FIXTURE,
      value: 0.001,
      stats: { ...OPTIMIZE_FIXTURE.stats!, utility: 0.001 },
    }));
    await vi.advanceTimersByTimeAsync(10);
    expect(document.getElementById("stat-utility")!.textContent).toBe("0.2");
  });
});
