// Time-response pane model: role-restricted signal shape pickers and the
// measured-plant lockout (simulation needs a transfer-function plant).

import type { PlantDoc, SignalDoc, SimConfigDoc } from "./api.js";

export const REFERENCE_SHAPES = ["step", "sine", "sawtooth"] as const;
export const DISTURBANCE_SHAPES = ["step", "sine", "gaussian"] as const;
export const NOISE_SHAPES = ["sine", "gaussian"] as const;

export interface PaneAvailability {
  enabled: boolean;
  reason: string | null;
}

export function paneAvailability(plant: PlantDoc): PaneAvailability {
  if (plant.type === "frd") {
    return {
      enabled: false,
      reason: "time response is unavailable for measured frequency-response plants",
    };
  }
  return { enabled: true, reason: null };
}

export interface SignalFormState {
  shape: string;
  amplitude: number;
  frequency_hz: number;
  std_dev: number;
  seed: number;
  start_time_s: number;
}

export function defaultSignal(shape: string): SignalFormState {
  return { shape, amplitude: 1.0, frequency_hz: 1.0, std_dev: 0.1, seed: 1, start_time_s: 0 };
}

export function toSignalDoc(state: SignalFormState): SignalDoc {
  const doc: SignalDoc = { shape: state.shape, amplitude: state.amplitude };
  if (state.shape === "sine" || state.shape === "sawtooth") {
    doc.frequency_hz = state.frequency_hz;
  }
  if (state.shape === "gaussian") {
    doc.std_dev = state.std_dev;
    doc.seed = state.seed;
  }
  if (state.start_time_s > 0) doc.start_time_s = state.start_time_s;
  return doc;
}

export interface TimePaneState {
  duration_s: number;
  sample_period_s: number;
  reference: SignalFormState;
  disturbance: SignalFormState | null;
  noise: SignalFormState | null;
  use_prefilter: boolean;
}

export function defaultTimePane(): TimePaneState {
  return {
    duration_s: 1.0,
    sample_period_s: 1e-4,
    reference: defaultSignal("step"),
    disturbance: null,
    noise: null,
    use_prefilter: false,
  };
}

export function buildSimConfig(state: TimePaneState): SimConfigDoc {
  const cfg: SimConfigDoc = {
    duration_s: state.duration_s,
    sample_period_s: state.sample_period_s,
    reference: toSignalDoc(state.reference),
    use_prefilter: state.use_prefilter,
  };
  if (state.disturbance) cfg.disturbance = toSignalDoc(state.disturbance);
  if (state.noise) cfg.noise = toSignalDoc(state.noise);
  return cfg;
}
