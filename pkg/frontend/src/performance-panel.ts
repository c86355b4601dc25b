// Performance panel model: the four displayed metrics with requirement
// highlighting. A metric is highlighted only when a finite measured value
// fails a set requirement; infinite gain margin never highlights, and absent
// crossovers render as an em dash with an explanation.

import type { MarginReport, RequirementsDoc } from "./api.js";
import { fmtDb, fmtDeg, fmtHz, fmtPlain } from "./format.js";

export interface PanelCell {
  metric: string;
  label: string;
  value: string;
  highlighted: boolean;
  note: string | null;
}

export function panelCells(report: MarginReport, reqs: RequirementsDoc): PanelCell[] {
  const cells: PanelCell[] = [];

  const gm = report.gain_margin_db;
  cells.push({
    metric: "gain_margin",
    label: "gain margin",
    value: fmtDb(gm),
    highlighted: gm !== null && reqs.min_gm_db != null && gm < reqs.min_gm_db,
    note: gm === null ? "no phase crossover" : null,
  });

  const pm = report.phase_margin_deg;
  cells.push({
    metric: "phase_margin",
    label: "phase margin",
    value: fmtDeg(pm),
    highlighted: pm !== null && reqs.min_pm_deg != null && pm < reqs.min_pm_deg,
    note: pm === null ? "no gain crossover" : null,
  });

  const mm = report.modulus_margin;
  cells.push({
    metric: "modulus_margin",
    label: "modulus margin",
    value: fmtPlain(mm),
    highlighted: reqs.min_mm != null && mm < reqs.min_mm,
    note: null,
  });

  const bw = report.bandwidth_hz;
  let bwHighlight = false;
  if (bw !== null && reqs.bw_range_hz != null) {
    const [lo, hi] = reqs.bw_range_hz;
    bwHighlight = bw < lo || bw > hi;
  }
  cells.push({
    metric: "bandwidth",
    label: "bandwidth",
    value: fmtHz(bw),
    highlighted: bwHighlight,
    note: bw === null ? "no gain crossover" : null,
  });

  return cells;
}
