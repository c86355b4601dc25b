// Typed client for the local JSON API. All numbers displayed anywhere in the
// UI originate from these calls; the client performs no numerical computation.

export interface SessionEnvelope {
  session_id: string;
  revision: number;
}

export interface SessionState extends SessionEnvelope {
  document: SessionDocument;
}

export interface SessionDocument {
  format_version: number;
  plant: PlantDoc;
  controllers: ControllerDoc[];
  requirements: RequirementsDoc;
  grid: GridDoc;
  active_controller: string | null;
}

export type PlantDoc =
  | { type: "tf"; num: number[]; den: number[]; sample_period_s?: number }
  | { type: "frd"; freqs_hz: number[]; re: number[]; im: number[]; source_file?: string }
  | {
      type: "example";
      kind: string;
      masses_kg: number[];
      stiffnesses_n_per_m: number[];
      dampings_ns_per_m: number[];
    };

export interface FilterDoc {
  kind: string;
  params: Record<string, number>;
  approx_method?: string;
  approx_band_hz?: [number, number] | null;
}

export interface ControllerDoc {
  name: string;
  filters: FilterDoc[];
  prefilter?: { num: number[]; den: number[] };
}

export interface RequirementsDoc {
  min_gm_db?: number | null;
  min_pm_deg?: number | null;
  min_mm?: number | null;
  bw_range_hz?: [number, number] | null;
}

export interface GridDoc {
  f_min_hz: number;
  f_max_hz: number;
  points_per_decade: number;
}

export interface MarginReport extends SessionEnvelope {
  controller: string;
  controller_order: number;
  gain_margin_db: number | null;
  gm_freq_hz: number | null;
  phase_margin_deg: number | null;
  pm_freq_hz: number | null;
  modulus_margin: number;
  mm_freq_hz: number;
  bandwidth_hz: number | null;
  closed_loop_bw_hz: number | null;
  gain_crossovers_hz: number[];
  phase_crossovers_hz: number[];
  flags: Record<string, boolean | null>;
}

export interface PlotSeries extends SessionEnvelope {
  subsystem: string;
  view: string;
  controller: string;
  controller_order: number;
  column_names: string[];
  columns: Record<string, number[]>;
}

export interface SimResult extends SessionEnvelope {
  time_s: number[];
  reference: number[];
  output: number[];
  control_effort: number[];
  output_no_prefilter: number[] | null;
  diverged: boolean;
  diverged_at_index: number | null;
  seeds: Record<string, number> | null;
}

export interface SimConfigDoc {
  duration_s: number;
  sample_period_s: number;
  reference: SignalDoc;
  disturbance?: SignalDoc;
  noise?: SignalDoc;
  use_prefilter?: boolean;
}

export interface SignalDoc {
  shape: string;
  amplitude?: number;
  frequency_hz?: number;
  std_dev?: number;
  seed?: number;
  start_time_s?: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    public detail: unknown,
  ) {
    super(`${code} (${status})`);
  }
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await fetch(this.base + path, {
      method,
      headers: body !== undefined ? { "content-type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    const payload = await res.json();
    if (!res.ok) {
      throw new ApiError(res.status, payload.error ?? "HttpError", payload.detail);
    }
    return payload as T;
  }

  createSession(opts: { document?: unknown; demo?: boolean } = {}): Promise<SessionState> {
    return this.request("POST", "/api/v1/sessions", opts);
  }

  getSession(id: string): Promise<SessionState> {
    return this.request("GET", `/api/v1/sessions/${id}`);
  }

  getDocument(id: string): Promise<SessionDocument> {
    return this.request("GET", `/api/v1/sessions/${id}/document`);
  }

  setPlant(id: string, revision: number, plant: PlantDoc): Promise<SessionEnvelope> {
    return this.request("PUT", `/api/v1/sessions/${id}/plant?base_revision=${revision}`, {
      plant,
    });
  }

  async uploadFrdCsv(
    id: string,
    revision: number,
    csvText: string,
    sourceFile?: string,
  ): Promise<SessionEnvelope> {
    const q = new URLSearchParams({ base_revision: String(revision) });
    if (sourceFile) q.set("source_file", sourceFile);
    const res = await fetch(
      this.base + `/api/v1/sessions/${id}/plant/frd-csv?${q.toString()}`,
      { method: "PUT", headers: { "content-type": "text/csv" }, body: csvText },
    );
    const payload = await res.json();
    if (!res.ok) {
      throw new ApiError(res.status, payload.error ?? "HttpError", payload.detail);
    }
    return payload as SessionEnvelope;
  }

  setRequirements(
    id: string,
    revision: number,
    reqs: RequirementsDoc,
  ): Promise<SessionEnvelope> {
    return this.request(
      "PUT",
      `/api/v1/sessions/${id}/requirements?base_revision=${revision}`,
      reqs,
    );
  }

  setGrid(id: string, revision: number, grid: GridDoc): Promise<SessionEnvelope> {
    return this.request("PUT", `/api/v1/sessions/${id}/grid?base_revision=${revision}`, grid);
  }

  addController(id: string, revision: number, name: string): Promise<SessionEnvelope> {
    return this.request(
      "POST",
      `/api/v1/sessions/${id}/controllers?base_revision=${revision}`,
      { name },
    );
  }

  setActiveController(id: string, revision: number, name: string): Promise<SessionEnvelope> {
    return this.request(
      "PUT",
      `/api/v1/sessions/${id}/active-controller?base_revision=${revision}`,
      { name },
    );
  }

  appendFilter(
    id: string,
    revision: number,
    controller: string,
    filter: FilterDoc,
  ): Promise<SessionEnvelope> {
    return this.request(
      "POST",
      `/api/v1/sessions/${id}/controllers/${controller}/filters?base_revision=${revision}`,
      { filter },
    );
  }

  replaceFilter(
    id: string,
    revision: number,
    controller: string,
    index: number,
    filter: FilterDoc,
  ): Promise<SessionEnvelope> {
    return this.request(
      "PUT",
      `/api/v1/sessions/${id}/controllers/${controller}/filters/${index}?base_revision=${revision}`,
      { filter },
    );
  }

  deleteFilter(
    id: string,
    revision: number,
    controller: string,
    index: number,
  ): Promise<SessionEnvelope> {
    return this.request(
      "DELETE",
      `/api/v1/sessions/${id}/controllers/${controller}/filters/${index}?base_revision=${revision}`,
    );
  }

  getMargins(id: string, controller?: string): Promise<MarginReport> {
    const q = controller ? `?controller=${encodeURIComponent(controller)}` : "";
    return this.request("GET", `/api/v1/sessions/${id}/margins${q}`);
  }

  getPlot(
    id: string,
    opts: {
      subsystem: string;
      view: string;
      controller?: string;
      wrap_phase?: boolean;
      f_min_hz?: number;
      f_max_hz?: number;
    },
  ): Promise<PlotSeries> {
    const params = new URLSearchParams({ subsystem: opts.subsystem, view: opts.view });
    if (opts.controller) params.set("controller", opts.controller);
    if (opts.wrap_phase !== undefined) params.set("wrap_phase", String(opts.wrap_phase));
    if (opts.f_min_hz !== undefined) params.set("f_min_hz", String(opts.f_min_hz));
    if (opts.f_max_hz !== undefined) params.set("f_max_hz", String(opts.f_max_hz));
    return this.request("GET", `/api/v1/sessions/${id}/plot?${params.toString()}`);
  }

  simulate(id: string, config: SimConfigDoc, controller?: string): Promise<SimResult> {
    return this.request("POST", `/api/v1/sessions/${id}/simulate`, { config, controller });
  }

  exportController(
    id: string,
    controller: string,
    samplePeriodS?: number,
  ): Promise<SessionEnvelope & { export: Record<string, unknown> }> {
    const q = samplePeriodS !== undefined ? `?sample_period_s=${samplePeriodS}` : "";
    return this.request(
      "GET",
      `/api/v1/sessions/${id}/controllers/${controller}/export${q}`,
    );
  }
}
