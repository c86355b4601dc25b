// Filter-editor form model: per-kind field catalogs with unit labels, local
// validation mirroring the service contracts (invalid edits never reach the
// wire), and mutation payload construction.

import type { FilterDoc } from "./api.js";

export interface FieldSpec {
  name: string;
  label: string;
  unit: string;
  integer?: boolean;
}

export const FILTER_KINDS = [
  "gain",
  "pi",
  "pd",
  "leadlag",
  "notch",
  "lowpass",
  "frac_pi",
  "frac_pd",
  "frac_leadlag",
] as const;

export type FilterKindName = (typeof FILTER_KINDS)[number];

export const APPROX_METHODS = ["crone", "carlson", "matsuda", "tustin", "sobfd", "tobfd"];

const HZ = "Hz";
const NONE = "–"; // dimensionless

export const FIELD_CATALOG: Record<FilterKindName, FieldSpec[]> = {
  gain: [{ name: "Kp", label: "gain", unit: NONE }],
  pi: [{ name: "f_i", label: "integral cut-off", unit: HZ }],
  pd: [
    { name: "f_d", label: "derivative start", unit: HZ },
    { name: "f_t", label: "derivative taming", unit: HZ },
  ],
  leadlag: [
    { name: "f_z", label: "zero corner", unit: HZ },
    { name: "f_p", label: "pole corner", unit: HZ },
  ],
  notch: [
    { name: "f_notch", label: "notch frequency", unit: HZ },
    { name: "damping_num", label: "numerator damping", unit: NONE },
    { name: "damping_den", label: "denominator damping", unit: NONE },
  ],
  lowpass: [
    { name: "f_cutoff", label: "cut-off", unit: HZ },
    { name: "order", label: "order", unit: NONE, integer: true },
  ],
  frac_pi: [
    { name: "f_i", label: "integral cut-off", unit: HZ },
    { name: "lambda", label: "integral order λ", unit: NONE },
    { name: "n_pairs", label: "approximation pairs", unit: NONE, integer: true },
  ],
  frac_pd: [
    { name: "f_d", label: "derivative start", unit: HZ },
    { name: "f_t", label: "derivative taming", unit: HZ },
    { name: "alpha", label: "derivative order α", unit: NONE },
    { name: "n_pairs", label: "approximation pairs", unit: NONE, integer: true },
  ],
  frac_leadlag: [
    { name: "f_z", label: "zero corner", unit: HZ },
    { name: "f_p", label: "pole corner", unit: HZ },
    { name: "alpha", label: "order α", unit: NONE },
    { name: "n_pairs", label: "approximation pairs", unit: NONE, integer: true },
  ],
};

export const FRACTIONAL_KINDS: FilterKindName[] = ["frac_pi", "frac_pd", "frac_leadlag"];

export function isFractional(kind: FilterKindName): boolean {
  return FRACTIONAL_KINDS.includes(kind);
}

export interface ValidationIssue {
  field: string;
  message: string;
}

// Mirrors the service-side filter contract so bad edits are caught at the
// offending field without an API round trip.
export function validateFilter(
  kind: FilterKindName,
  params: Record<string, number>,
): ValidationIssue[] {
  const issues: ValidationIssue[] = [];
  for (const field of FIELD_CATALOG[kind]) {
    const value = params[field.name];
    if (value === undefined || Number.isNaN(value)) {
      issues.push({ field: field.name, message: "required" });
      continue;
    }
    if (field.name !== "Kp" && !(value > 0)) {
      issues.push({ field: field.name, message: "must be positive" });
    }
    if (field.integer && value !== Math.round(value)) {
      issues.push({ field: field.name, message: "must be an integer" });
    }
  }
  if ((kind === "pd" || kind === "frac_pd") && params.f_d !== undefined) {
    if (params.f_t !== undefined && !(params.f_d < params.f_t)) {
      issues.push({ field: "f_d", message: "derivative start must lie below taming" });
    }
  }
  const orderName = kind === "frac_pi" ? "lambda" : "alpha";
  if (isFractional(kind) && params[orderName] !== undefined) {
    const v = params[orderName];
    if (!(v > 0 && v <= 2)) {
      issues.push({ field: orderName, message: "fractional order must be in (0, 2]" });
    }
  }
  return issues;
}

export function buildFilterDoc(
  kind: FilterKindName,
  params: Record<string, number>,
  approxMethod = "crone",
): FilterDoc {
  const doc: FilterDoc = { kind, params: { ...params } };
  if (isFractional(kind)) doc.approx_method = approxMethod;
  return doc;
}

// Filter list for the published fractional demo controller, as the editor
// would submit it field by field.
export function fractionalDemoFilters(kp: number): FilterDoc[] {
  return [
    buildFilterDoc("gain", { Kp: kp }),
    buildFilterDoc("pi", { f_i: 10.0 }),
    buildFilterDoc("frac_pd", { f_d: 33.33, f_t: 300.0, alpha: 1.1, n_pairs: 3 }),
    buildFilterDoc("frac_leadlag", { f_z: 10000.0, f_p: 1000.0, alpha: 1.8, n_pairs: 3 }),
    buildFilterDoc("lowpass", { f_cutoff: 10000.0, order: 1 }),
  ];
}

export function filterSummary(doc: FilterDoc): string {
  const parts = Object.entries(doc.params).map(([k, v]) => `${k}=${v}`);
  return `${doc.kind}(${parts.join(", ")})`;
}
