// End-to-end: the editor-driven session must yield exactly the numbers the
// batch CLI prints for the same session file (single source of truth), the
// requirement highlighting must toggle around the measured phase margin, and
// the time-response pane must lock out measured-frd plants.

import assert from "node:assert/strict";
import { after, before, test } from "node:test";
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { ApiClient, ApiError } from "../src/api.js";
import { buildFilterDoc, fractionalDemoFilters, validateFilter } from "../src/filter-editor.js";
import { panelCells } from "../src/performance-panel.js";
import { paneAvailability } from "../src/time-response.js";

const PORT = 8741 + (process.pid % 50);
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess;
const api = new ApiClient(BASE);

async function waitForServer(): Promise<void> {
  for (let i = 0; i < 120; i++) {
    try {
      const res = await fetch(`${BASE}/api/v1/sessions`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error("service did not come up");
}

before(async () => {
  server = spawn(
    "python3",
    ["-m", "uvicorn", "fracshape.service:app", "--host", "127.0.0.1",
     "--port", String(PORT), "--log-level", "warning"],
    { stdio: "ignore" },
  );
  await waitForServer();
});

after(() => {
  server.kill("SIGTERM");
});

const STAGE_PLANT = {
  type: "example" as const,
  kind: "double_mass_spring_collocated",
  masses_kg: [1.0, 0.2],
  stiffnesses_n_per_m: [4.0e4, 4.0e3],
  dampings_ns_per_m: [20.0, 2.0],
};

test("filter editor session matches CLI margins exactly", async () => {
  // the demo session carries the stage-rescaled gain for the fractional set
  const demo = await api.createSession({ demo: true });
  const foc = demo.document.controllers.find((c) => c.name === "foc");
  assert.ok(foc);
  const kp = foc!.filters[0].params.Kp;

  // drive the same controller in through the editor path, field by field
  let s = await api.createSession({});
  let rev = (await api.setPlant(s.session_id, s.revision, STAGE_PLANT)).revision;
  rev = (await api.addController(s.session_id, rev, "foc")).revision;
  for (const doc of fractionalDemoFilters(kp)) {
    assert.deepEqual(validateFilter(doc.kind as never, doc.params), []);
    rev = (await api.appendFilter(s.session_id, rev, "foc", doc)).revision;
  }

  const uiReport = await api.getMargins(s.session_id, "foc");
  assert.equal(uiReport.controller_order, 8);
  assert.ok(uiReport.phase_margin_deg !== null);

  // same session file through the batch CLI
  const doc = await api.getDocument(s.session_id);
  const dir = mkdtempSync(join(tmpdir(), "fracshape-ui-"));
  const file = join(dir, "design.flores");
  writeFileSync(file, JSON.stringify(doc, null, 2));
  const cli = spawnSync(
    "python3",
    ["-m", "fracshape", "margins", "--session", file, "--controller", "foc"],
    { encoding: "utf-8" },
  );
  assert.equal(cli.status, 0, cli.stderr);
  const cliReport = JSON.parse(cli.stdout);

  assert.equal(cliReport.phase_margin_deg, uiReport.phase_margin_deg);
  assert.equal(cliReport.gain_margin_db, uiReport.gain_margin_db);
  assert.equal(cliReport.modulus_margin, uiReport.modulus_margin);
  assert.equal(cliReport.bandwidth_hz, uiReport.bandwidth_hz);
  assert.equal(cliReport.pm_freq_hz, uiReport.pm_freq_hz);
});

test("requirement highlighting toggles around the measured phase margin", async () => {
  const s = await api.createSession({ demo: true });
  const report = await api.getMargins(s.session_id);
  const pm = report.phase_margin_deg;
  assert.ok(pm !== null);

  const above = panelCells(report, { min_pm_deg: pm! + 1.0 });
  assert.equal(above.find((c) => c.metric === "phase_margin")!.highlighted, true);
  const below = panelCells(report, { min_pm_deg: pm! - 1.0 });
  assert.equal(below.find((c) => c.metric === "phase_margin")!.highlighted, false);

  // the server evaluates the same comparison in its flags
  let rev = (await api.setRequirements(s.session_id, s.revision, { min_pm_deg: pm! + 1.0 }))
    .revision;
  assert.equal((await api.getMargins(s.session_id)).flags.phase_margin, false);
  await api.setRequirements(s.session_id, rev, { min_pm_deg: pm! - 1.0 });
  assert.equal((await api.getMargins(s.session_id)).flags.phase_margin, true);
});

test("time-response pane is locked out for measured-frd plants", async () => {
  const s = await api.createSession({});
  const frd = {
    type: "frd" as const,
    freqs_hz: [1.0, 10.0, 100.0],
    re: [1.0, 0.4, 0.02],
    im: [0.0, -0.4, -0.05],
  };
  let rev = (await api.setPlant(s.session_id, s.revision, frd)).revision;
  rev = (await api.addController(s.session_id, rev, "c")).revision;
  await api.appendFilter(s.session_id, rev, "c", buildFilterDoc("gain", { Kp: 1.0 }));

  const state = await api.getSession(s.session_id);
  const avail = paneAvailability(state.document.plant);
  assert.equal(avail.enabled, false);
  assert.ok(avail.reason && avail.reason.length > 0);

  await assert.rejects(
    api.simulate(s.session_id, {
      duration_s: 0.1,
      sample_period_s: 0.001,
      reference: { shape: "step" },
    }),
    (err: unknown) => err instanceof ApiError && err.code === "FrdPlantUnsupported",
  );
});
