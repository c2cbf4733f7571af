// Client-side validation mirroring the server's config schema: edits stay
// local until submission, and a request is only sent when every field
// parses. Field errors are keyed by input name for inline display.

import type { AnalysisConfig, BlockSpec } from "./api.js";

export interface FormValues {
  preset: string; // "" means explicit blocks
  c1: string;
  c2: string;
  c3: string;
  c4: string;
  cs: string;
  resetNum: string;
  resetDen: string;
  gamma: string;
  plantNum: string;
  plantDen: string;
  fStart: string;
  fEnd: string;
  points: string;
  harmonics: string;
}

export const DEFAULT_FORM: FormValues = {
  preset: "closed_loop_demo",
  c1: "gain 1",
  c2: "gain 1",
  c3: "gain 1",
  c4: "gain 1",
  cs: "gain 1",
  resetNum: "1",
  resetDen: "0.00106103295, 1",
  gamma: "0",
  plantNum: "661500",
  plantDen: "83.57, 279.4, 583700",
  fStart: "1",
  fEnd: "1000",
  points: "120",
  harmonics: "100",
};

export const PRESETS = [
  "closed_loop_demo",
  "open_loop_demo",
  "pid_case_study",
  "cglp_pid_case_study",
  "shaped_cglp_pid_case_study",
  "multiple_reset_demo",
];

export interface ValidationResult {
  config?: AnalysisConfig;
  errors: Record<string, string>;
}

export function parseCoeffs(text: string): number[] | null {
  const parts = text.split(/[\s,]+/).filter((p) => p.length > 0);
  if (parts.length === 0) return null;
  const vals = parts.map(Number);
  return vals.some((v) => !isFinite(v)) ? null : vals;
}

// A block field accepts "gain k" or a "num / den" pair of coefficient lists.
export function parseBlock(text: string): BlockSpec | null {
  const trimmed = text.trim();
  const gainMatch = /^gain\s+(-?[\d.eE+-]+)$/.exec(trimmed);
  if (gainMatch) {
    const g = Number(gainMatch[1]);
    return isFinite(g) ? { gain: g } : null;
  }
  const halves = trimmed.split("/");
  if (halves.length !== 2) return null;
  const num = parseCoeffs(halves[0]);
  const den = parseCoeffs(halves[1]);
  if (!num || !den) return null;
  if (den.every((v) => v === 0)) return null;
  return { num, den };
}

export function validateForm(values: FormValues): ValidationResult {
  const errors: Record<string, string> = {};

  const fStart = Number(values.fStart);
  const fEnd = Number(values.fEnd);
  const points = Number(values.points);
  const harmonics = Number(values.harmonics);
  if (!(isFinite(fStart) && fStart > 0)) {
    errors.fStart = "start frequency must be positive";
  }
  if (!(isFinite(fEnd) && fEnd >= fStart)) {
    errors.fEnd = "end frequency must be at least the start";
  }
  if (!Number.isInteger(points) || points < 1) {
    errors.points = "points must be a positive integer";
  }
  if (!Number.isInteger(harmonics) || harmonics < 1) {
    errors.harmonics = "harmonic cap must be a positive integer";
  }

  const analysis = {
    f_start_hz: fStart,
    f_end_hz: fEnd,
    points,
    harmonics,
  };

  if (values.preset) {
    if (!PRESETS.includes(values.preset)) {
      errors.preset = "unknown preset";
    }
    if (Object.keys(errors).length > 0) return { errors };
    return { config: { preset: values.preset, analysis }, errors };
  }

  const blocks: Record<string, BlockSpec> = {};
  for (const name of ["c1", "c2", "c3", "c4", "cs"] as const) {
    const spec = parseBlock(values[name]);
    if (!spec) {
      errors[name] = "expected 'gain k' or 'num / den' coefficient lists";
    } else {
      blocks[name] = spec;
    }
  }
  const resetNum = parseCoeffs(values.resetNum);
  const resetDen = parseCoeffs(values.resetDen);
  if (!resetNum) errors.resetNum = "coefficient list required";
  if (!resetDen) errors.resetDen = "coefficient list required";
  const gamma = Number(values.gamma);
  if (!isFinite(gamma) || gamma <= -1 || gamma > 1) {
    errors.gamma = "reset value must lie in (-1, 1]";
  }
  const plantNum = parseCoeffs(values.plantNum);
  const plantDen = parseCoeffs(values.plantDen);
  if (!plantNum) errors.plantNum = "coefficient list required";
  if (!plantDen) errors.plantDen = "coefficient list required";

  if (Object.keys(errors).length > 0) return { errors };
  return {
    config: {
      blocks,
      reset: { num: resetNum!, den: resetDen!, gamma },
      plant: { num: plantNum!, den: plantDen! },
      analysis,
    },
    errors,
  };
}
