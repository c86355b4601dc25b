// Interactive loop-shaping frontend: filter editing with live plot, margin,
// and time-response refresh. Every number shown here comes from the API.

import { ApiClient, type MarginReport, type PlotSeries } from "./api.js";
import {
  APPROX_METHODS,
  FIELD_CATALOG,
  FILTER_KINDS,
  type FilterKindName,
  buildFilterDoc,
  filterSummary,
  isFractional,
  validateFilter,
} from "./filter-editor.js";
import { panelCells } from "./performance-panel.js";
import {
  DISTURBANCE_SHAPES,
  NOISE_SHAPES,
  REFERENCE_SHAPES,
  buildSimConfig,
  defaultTimePane,
  paneAvailability,
} from "./time-response.js";
import { SessionStore, SUBSYSTEMS, VIEWS } from "./state.js";
import { TRACE_COLORS, drawPane, seriesToTraces } from "./plots.js";

const api = new ApiClient("");
const store = new SessionStore(api);
const timePane = defaultTimePane();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function option(value: string, label = value): HTMLOptionElement {
  const o = document.createElement("option");
  o.value = value;
  o.textContent = label;
  return o;
}

// ---- plant controls -----------------------------------------------------------

async function setExamplePlant(): Promise<void> {
  await store.mutate((rev) =>
    api.setPlant(store.state!.session_id, rev, {
      type: "example",
      kind: "double_mass_spring_collocated",
      masses_kg: [1.0, 0.2],
      stiffnesses_n_per_m: [4.0e4, 4.0e3],
      dampings_ns_per_m: [20.0, 2.0],
    }),
  );
}

async function setTfPlant(): Promise<void> {
  const num = el<HTMLInputElement>("tf-num").value.split(",").map(Number);
  const den = el<HTMLInputElement>("tf-den").value.split(",").map(Number);
  if (num.some(Number.isNaN) || den.some(Number.isNaN)) {
    el("plant-error").textContent = "coefficients must be comma-separated numbers";
    return;
  }
  el("plant-error").textContent = "";
  await store.mutate((rev) =>
    api.setPlant(store.state!.session_id, rev, { type: "tf", num, den }),
  );
}

async function uploadFrd(file: File): Promise<void> {
  // raw CSV goes to the service; all parsing and conversion happen there
  const text = await file.text();
  try {
    await store.mutate((rev) =>
      api.uploadFrdCsv(store.state!.session_id, rev, text, file.name),
    );
    el("plant-error").textContent = "";
  } catch (err) {
    el("plant-error").textContent = String(err);
  }
}

// ---- controller & filter editor --------------------------------------------------

function renderControllerList(): void {
  const list = el("controller-list");
  list.innerHTML = "";
  const names = store.controllerNames();
  names.forEach((name, i) => {
    const row = document.createElement("div");
    row.className = "controller-row";
    const check = document.createElement("input");
    check.type = "checkbox";
    check.checked = store.view.visibleControllers.includes(name);
    check.onchange = () => {
      const vis = new Set(store.view.visibleControllers);
      check.checked ? vis.add(name) : vis.delete(name);
      store.setView({ visibleControllers: [...vis] });
    };
    const label = document.createElement("span");
    label.textContent = name;
    label.style.color = TRACE_COLORS[i % TRACE_COLORS.length];
    label.className = store.activeController() === name ? "active-name" : "";
    label.onclick = () =>
      store.mutate((rev) => api.setActiveController(store.state!.session_id, rev, name));
    row.append(check, label);
    list.append(row);
  });
}

function renderFilterList(): void {
  const list = el("filter-list");
  list.innerHTML = "";
  const active = store.activeController();
  if (!active || !store.state) return;
  const ctrl = store.state.document.controllers.find((c) => c.name === active);
  if (!ctrl) return;
  ctrl.filters.forEach((f, index) => {
    const row = document.createElement("div");
    row.className = "filter-row";
    const text = document.createElement("span");
    text.textContent = filterSummary(f);
    const del = document.createElement("button");
    del.textContent = "×";
    del.onclick = () =>
      store.mutate((rev) =>
        api.deleteFilter(store.state!.session_id, rev, active, index),
      );
    row.append(text, del);
    list.append(row);
  });
}

function renderFilterForm(): void {
  const kind = el<HTMLSelectElement>("filter-kind").value as FilterKindName;
  const fields = el("filter-fields");
  fields.innerHTML = "";
  for (const spec of FIELD_CATALOG[kind]) {
    const wrap = document.createElement("label");
    wrap.className = "field";
    wrap.textContent = `${spec.label} [${spec.unit}] `;
    const input = document.createElement("input");
    input.type = "number";
    input.step = "any";
    input.dataset.param = spec.name;
    const err = document.createElement("span");
    err.className = "field-error";
    err.dataset.errorFor = spec.name;
    wrap.append(input, err);
    fields.append(wrap);
  }
  el<HTMLSelectElement>("filter-method").parentElement!.style.display = isFractional(kind)
    ? ""
    : "none";
}

function readFilterForm(): Record<string, number> {
  const params: Record<string, number> = {};
  el("filter-fields")
    .querySelectorAll("input")
    .forEach((input) => {
      const name = (input as HTMLInputElement).dataset.param!;
      const v = (input as HTMLInputElement).value;
      if (v !== "") params[name] = Number(v);
    });
  return params;
}

async function submitFilter(): Promise<void> {
  const active = store.activeController();
  if (!active) return;
  const kind = el<HTMLSelectElement>("filter-kind").value as FilterKindName;
  const params = readFilterForm();
  el("filter-fields")
    .querySelectorAll(".field-error")
    .forEach((node) => (node.textContent = ""));
  const issues = validateFilter(kind, params);
  if (issues.length > 0) {
    for (const issue of issues) {
      const node = el("filter-fields").querySelector(
        `[data-error-for="${issue.field}"]`,
      );
      if (node) node.textContent = issue.message;
    }
    return; // invalid edits never reach the API
  }
  const method = el<HTMLSelectElement>("filter-method").value;
  await store.mutate((rev) =>
    api.appendFilter(
      store.state!.session_id,
      rev,
      active,
      buildFilterDoc(kind, params, method),
    ),
  );
}

// ---- frequency plots ----------------------------------------------------------------

async function refreshPlots(): Promise<void> {
  if (!store.state) return;
  const names = store.view.visibleControllers;
  const series: PlotSeries[] = [];
  for (const name of names) {
    series.push(
      await api.getPlot(store.state.session_id, {
        subsystem: store.view.subsystem,
        view: store.view.view,
        controller: name,
        wrap_phase: store.view.wrapPhase,
      }),
    );
  }
  const traces = seriesToTraces(series);
  const top = el<HTMLCanvasElement>("plot-top");
  const bottom = el<HTMLCanvasElement>("plot-bottom");
  bottom.style.display = traces.bottom ? "" : "none";
  drawPane(
    top.getContext("2d")!,
    top.width,
    top.height,
    traces.top,
    traces.xLog,
    traces.xLabel,
    traces.topLabel,
  );
  if (traces.bottom) {
    drawPane(
      bottom.getContext("2d")!,
      bottom.width,
      bottom.height,
      traces.bottom,
      traces.xLog,
      traces.xLabel,
      traces.bottomLabel ?? "",
    );
  }
  if (series.length > 0) {
    el("controller-order").textContent =
      `controller order: ${series.map((s) => `${s.controller}: ${s.controller_order}`).join("  ")}`;
  }
}

// ---- performance panel -----------------------------------------------------------------

async function refreshMargins(): Promise<void> {
  if (!store.state || !store.activeController()) {
    el("performance-body").innerHTML = "";
    return;
  }
  let report: MarginReport;
  try {
    report = await api.getMargins(store.state.session_id);
  } catch {
    el("performance-body").innerHTML = "<tr><td colspan=2>—</td></tr>";
    return;
  }
  const reqs = store.state.document.requirements;
  const body = el("performance-body");
  body.innerHTML = "";
  for (const cell of panelCells(report, reqs)) {
    const tr = document.createElement("tr");
    if (cell.highlighted) tr.className = "req-fail";
    const name = document.createElement("td");
    name.textContent = cell.label;
    const value = document.createElement("td");
    value.textContent = cell.value + (cell.note ? ` (${cell.note})` : "");
    tr.append(name, value);
    body.append(tr);
  }
}

async function submitRequirements(): Promise<void> {
  const read = (id: string) => {
    const v = el<HTMLInputElement>(id).value;
    return v === "" ? null : Number(v);
  };
  await store.mutate((rev) =>
    api.setRequirements(store.state!.session_id, rev, {
      min_gm_db: read("req-gm"),
      min_pm_deg: read("req-pm"),
      min_mm: read("req-mm"),
    }),
  );
}

// ---- time response -----------------------------------------------------------------------

function renderTimePane(): void {
  const plant = store.state?.document.plant;
  const avail = plant ? paneAvailability(plant) : { enabled: false, reason: null };
  const pane = el("time-pane");
  pane.classList.toggle("disabled", !avail.enabled);
  el<HTMLButtonElement>("run-sim").disabled = !avail.enabled;
  el("time-pane-reason").textContent = avail.reason ?? "";
  pane.title = avail.reason ?? "";
}

async function runSimulation(): Promise<void> {
  if (!store.state) return;
  timePane.duration_s = Number(el<HTMLInputElement>("sim-duration").value) || 1.0;
  timePane.sample_period_s =
    Number(el<HTMLInputElement>("sim-period").value) || 1e-4;
  timePane.reference.shape = el<HTMLSelectElement>("ref-shape").value;
  timePane.reference.frequency_hz =
    Number(el<HTMLInputElement>("ref-freq").value) || 1.0;
  const distShape = el<HTMLSelectElement>("dist-shape").value;
  timePane.disturbance = distShape === "none" ? null : {
    ...timePane.reference,
    shape: distShape,
    amplitude: Number(el<HTMLInputElement>("dist-amp").value) || 0.1,
  };
  const noiseShape = el<HTMLSelectElement>("noise-shape").value;
  timePane.noise = noiseShape === "none" ? null : {
    shape: noiseShape,
    amplitude: 1.0,
    frequency_hz: Number(el<HTMLInputElement>("noise-freq").value) || 50.0,
    std_dev: Number(el<HTMLInputElement>("noise-std").value) || 0.01,
    seed: 1,
    start_time_s: 0,
  };
  timePane.use_prefilter = el<HTMLInputElement>("use-prefilter").checked;

  try {
    const result = await api.simulate(store.state.session_id, buildSimConfig(timePane));
    const canvas = el<HTMLCanvasElement>("time-plot");
    const traces = [
      { x: result.time_s, y: result.reference, label: "r" },
      { x: result.time_s, y: result.output, label: "y" },
    ];
    if (result.output_no_prefilter) {
      traces.push({ x: result.time_s, y: result.output_no_prefilter, label: "y (no pre-filter)" });
    }
    drawPane(
      canvas.getContext("2d")!,
      canvas.width,
      canvas.height,
      traces,
      false,
      "time [s]",
      "output",
    );
    el("sim-status").textContent = result.diverged
      ? `diverged at sample ${result.diverged_at_index}`
      : "";
  } catch (err) {
    el("sim-status").textContent = String(err);
  }
}

// ---- wiring -------------------------------------------------------------------------------

function populateSelectors(): void {
  const sub = el<HTMLSelectElement>("subsystem");
  SUBSYSTEMS.forEach((s) => sub.append(option(s, s.replace(/_/g, " "))));
  sub.value = store.view.subsystem;
  const view = el<HTMLSelectElement>("view");
  VIEWS.forEach((v) => view.append(option(v)));
  const kind = el<HTMLSelectElement>("filter-kind");
  FILTER_KINDS.forEach((k) => kind.append(option(k)));
  const method = el<HTMLSelectElement>("filter-method");
  APPROX_METHODS.forEach((m) => method.append(option(m)));
  const ref = el<HTMLSelectElement>("ref-shape");
  REFERENCE_SHAPES.forEach((s) => ref.append(option(s)));
  const dist = el<HTMLSelectElement>("dist-shape");
  dist.append(option("none"));
  DISTURBANCE_SHAPES.forEach((s) => dist.append(option(s)));
  const noise = el<HTMLSelectElement>("noise-shape");
  noise.append(option("none"));
  NOISE_SHAPES.forEach((s) => noise.append(option(s)));
}

async function refreshAll(): Promise<void> {
  renderControllerList();
  renderFilterList();
  renderTimePane();
  await Promise.all([refreshPlots(), refreshMargins()]);
}

async function init(): Promise<void> {
  populateSelectors();
  renderFilterForm();
  store.onChange(() => void refreshAll());

  el("new-demo").onclick = () => void store.open({ demo: true });
  el("new-blank").onclick = () => void store.open({});
  el("save-session").onclick = async () => {
    if (!store.state) return;
    const doc = await api.getDocument(store.state.session_id);
    const blob = new Blob([JSON.stringify(doc, null, 2)], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "design.flores";
    a.click();
  };
  el<HTMLInputElement>("load-session").onchange = async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    await store.open({ document: JSON.parse(await file.text()) });
  };

  el("plant-example").onclick = () => void setExamplePlant();
  el("plant-tf-apply").onclick = () => void setTfPlant();
  el<HTMLInputElement>("plant-frd").onchange = (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (file) void uploadFrd(file);
  };

  el("add-controller").onclick = () => {
    const name = el<HTMLInputElement>("controller-name").value.trim();
    if (!name) return;
    void store.mutate((rev) => api.addController(store.state!.session_id, rev, name));
  };
  el<HTMLSelectElement>("filter-kind").onchange = renderFilterForm;
  el("add-filter").onclick = () => void submitFilter();

  el<HTMLSelectElement>("subsystem").onchange = (ev) =>
    store.setView({ subsystem: (ev.target as HTMLSelectElement).value as never });
  el<HTMLSelectElement>("view").onchange = (ev) =>
    store.setView({ view: (ev.target as HTMLSelectElement).value as never });
  el<HTMLInputElement>("wrap-phase").onchange = (ev) =>
    store.setView({ wrapPhase: (ev.target as HTMLInputElement).checked });

  el("apply-reqs").onclick = () => void submitRequirements();
  el("run-sim").onclick = () => void runSimulation();

  await store.open({ demo: true });
}

window.addEventListener("DOMContentLoaded", () => void init());
