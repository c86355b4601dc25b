import assert from "node:assert/strict";
import { test } from "node:test";

import {
  FIELD_CATALOG,
  FILTER_KINDS,
  buildFilterDoc,
  fractionalDemoFilters,
  isFractional,
  validateFilter,
} from "../src/filter-editor.js";

test("every kind has a field catalog with unit labels", () => {
  for (const kind of FILTER_KINDS) {
    const fields = FIELD_CATALOG[kind];
    assert.ok(fields.length > 0, kind);
    for (const f of fields) {
      assert.ok(f.unit.length > 0, `${kind}.${f.name}`);
    }
  }
});

test("fractional demo controller filters validate cleanly", () => {
  for (const doc of fractionalDemoFilters(0.0023)) {
    const issues = validateFilter(doc.kind as never, doc.params);
    assert.deepEqual(issues, [], doc.kind);
  }
});

test("derivative start at or above taming is an inline error", () => {
  const issues = validateFilter("frac_pd", { f_d: 300, f_t: 300, alpha: 1.1, n_pairs: 3 });
  assert.equal(issues.length, 1);
  assert.equal(issues[0].field, "f_d");
});

test("missing fields are reported per field", () => {
  const issues = validateFilter("pd", {});
  assert.deepEqual(
    issues.map((i) => i.field).sort(),
    ["f_d", "f_t"],
  );
});

test("fractional order range enforced", () => {
  const bad = validateFilter("frac_pi", { f_i: 10, lambda: 2.5, n_pairs: 3 });
  assert.ok(bad.some((i) => i.field === "lambda"));
  const ok = validateFilter("frac_pi", { f_i: 10, lambda: 2.0, n_pairs: 3 });
  assert.deepEqual(ok, []);
});

test("integer fields reject fractions", () => {
  const issues = validateFilter("lowpass", { f_cutoff: 100, order: 1.5 });
  assert.ok(issues.some((i) => i.field === "order"));
});

test("approx method only attached to fractional kinds", () => {
  assert.equal(buildFilterDoc("pi", { f_i: 10 }).approx_method, undefined);
  assert.equal(
    buildFilterDoc("frac_pd", { f_d: 1, f_t: 10, alpha: 1.1, n_pairs: 3 }).approx_method,
    "crone",
  );
  assert.ok(isFractional("frac_leadlag"));
  assert.ok(!isFractional("notch"));
});
