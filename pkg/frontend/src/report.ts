// Text rendering of scan outcomes; pure so the wording is testable.

import type { ScanProgress, ScanResult } from "./api.js";

export function renderScanReport(
  result: ScanResult | null,
  partial: boolean,
  seen: ScanProgress[] = [],
): string {
  if (result === null) {
    const flagged = seen.filter((p) => (p.count ?? 0) > 2);
    const head = "Scan cancelled (partial results)";
    if (flagged.length === 0) {
      return `${head}: no multiple-reset frequencies among ${seen.length} tested`;
    }
    return (
      `${head}: multiple resets at ` +
      flagged.map((p) => `${p.freq_hz} Hz`).join(", ")
    );
  }
  const lines: string[] = [];
  if (!result.has_multiple_reset_region) {
    lines.push("There is No Multiple-Reset Region");
  } else {
    for (const [lo, hi] of result.intervals_hz) {
      lines.push(`Multiple-Reset Regions: ${lo} to ${hi} [Hz]`);
    }
  }
  for (const f of result.failures) {
    lines.push(`failed at ${f.freq_hz} Hz: ${f.message}`);
  }
  if (partial) lines.push("(partial)");
  return lines.join("\n");
}

export function renderStability(s: {
  passed: boolean;
  marginal: boolean;
  worst_spectral_radius: number;
  worst_delta_s: number;
}): string {
  const state = s.passed ? "ok" : s.marginal ? "marginal" : "FAILED";
  return (
    `reset element contraction: ${state} ` +
    `(worst spectral radius ${s.worst_spectral_radius.toPrecision(6)} ` +
    `at ${s.worst_delta_s.toPrecision(3)} s)`
  );
}
