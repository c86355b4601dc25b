import assert from "node:assert/strict";
import { test } from "node:test";

import type { MarginReport } from "../src/api.js";
import { panelCells } from "../src/performance-panel.js";

function report(overrides: Partial<MarginReport> = {}): MarginReport {
  return {
    session_id: "s",
    revision: 1,
    controller: "c",
    controller_order: 3,
    gain_margin_db: 6.02,
    gm_freq_hz: 0.159,
    phase_margin_deg: 21.4,
    pm_freq_hz: 0.108,
    modulus_margin: 0.29,
    mm_freq_hz: 0.12,
    bandwidth_hz: 0.108,
    closed_loop_bw_hz: 0.2,
    gain_crossovers_hz: [0.108],
    phase_crossovers_hz: [0.159],
    flags: {},
    ...overrides,
  };
}

function cell(cells: ReturnType<typeof panelCells>, metric: string) {
  const c = cells.find((c) => c.metric === metric);
  assert.ok(c, metric);
  return c!;
}

test("failing phase margin is highlighted", () => {
  const cells = panelCells(report(), { min_pm_deg: 30 });
  assert.equal(cell(cells, "phase_margin").highlighted, true);
});

test("passing phase margin is not highlighted", () => {
  const cells = panelCells(report(), { min_pm_deg: 20 });
  assert.equal(cell(cells, "phase_margin").highlighted, false);
});

test("no requirements means nothing highlighted", () => {
  const cells = panelCells(report(), {});
  assert.ok(cells.every((c) => !c.highlighted));
});

test("infinite gain margin renders as infinity and never highlights", () => {
  const cells = panelCells(report({ gain_margin_db: null }), { min_gm_db: 100 });
  const gm = cell(cells, "gain_margin");
  assert.equal(gm.value, "∞ dB");
  assert.equal(gm.highlighted, false);
});

test("absent crossover renders an em dash with explanation", () => {
  const cells = panelCells(
    report({ phase_margin_deg: null, bandwidth_hz: null }),
    { min_pm_deg: 30 },
  );
  const pm = cell(cells, "phase_margin");
  assert.equal(pm.value, "—");
  assert.equal(pm.note, "no gain crossover");
  assert.equal(pm.highlighted, false);
});

test("bandwidth range highlighting", () => {
  const inside = panelCells(report({ bandwidth_hz: 5 }), { bw_range_hz: [1, 10] });
  assert.equal(cell(inside, "bandwidth").highlighted, false);
  const outside = panelCells(report({ bandwidth_hz: 20 }), { bw_range_hz: [1, 10] });
  assert.equal(cell(outside, "bandwidth").highlighted, true);
});
