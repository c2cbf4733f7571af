// Hand-rolled SVG Bode charts: log-frequency x-axis, one series per
// harmonic per run. Pure string builders so they are testable off-DOM.

import type { GridPayload } from "./api.js";

export interface Series {
  label: string;
  color: string;
  freqsHz: number[];
  values: number[];
}

export const PALETTE = [
  "#1965b0", "#dc050c", "#4eb265", "#f1932d", "#882e72",
  "#7bafde", "#ee8026", "#521a13", "#90c987", "#d1bbd7",
];

export function wrapDeg(p: number): number {
  let v = p % 360;
  if (v <= -180) v += 360;
  if (v > 180) v -= 360;
  return v;
}

// cosmetic display unwrapping; the underlying data stays wrapped
export function unwrapDeg(values: number[]): number[] {
  const out: number[] = [];
  let offset = 0;
  for (let i = 0; i < values.length; i++) {
    if (i > 0) {
      const jump = values[i] - values[i - 1];
      if (jump > 180) offset -= 360;
      else if (jump < -180) offset += 360;
    }
    out.push(values[i] + offset);
  }
  return out;
}

export function seriesFromGrid(
  payload: GridPayload,
  key: "mag_db" | "phase_deg",
  labelPrefix: string,
  colorOffset = 0,
  unwrapPhase = false,
): Series[] {
  const byHarmonic = new Map<number, { f: number[]; v: number[] }>();
  for (const row of payload.rows) {
    let entry = byHarmonic.get(row.n);
    if (!entry) {
      entry = { f: [], v: [] };
      byHarmonic.set(row.n, entry);
    }
    entry.f.push(row.freq_hz);
    entry.v.push(row[key]);
  }
  const out: Series[] = [];
  let i = 0;
  for (const [n, entry] of [...byHarmonic.entries()].sort((a, b) => a[0] - b[0])) {
    const values = key === "phase_deg" && unwrapPhase ? unwrapDeg(entry.v) : entry.v;
    out.push({
      label: `${labelPrefix} n=${n}`,
      color: PALETTE[(i + colorOffset) % PALETTE.length],
      freqsHz: entry.f,
      values,
    });
    i += 1;
  }
  return out;
}

interface Range {
  lo: number;
  hi: number;
}

function niceRange(values: number[]): Range {
  const finite = values.filter((v) => isFinite(v));
  if (finite.length === 0) return { lo: -1, hi: 1 };
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    lo -= 1;
    hi += 1;
  }
  const pad = 0.05 * (hi - lo);
  return { lo: lo - pad, hi: hi + pad };
}

export interface BodeOptions {
  title: string;
  yLabel: string;
  width?: number;
  height?: number;
}

export function bodeSvg(series: Series[], opts: BodeOptions): string {
  const width = opts.width ?? 640;
  const height = opts.height ?? 260;
  const ml = 62, mr = 12, mt = 24, mb = 34;
  const pw = width - ml - mr;
  const ph = height - mt - mb;

  const allF = series.flatMap((s) => s.freqsHz).filter((f) => f > 0);
  const allV = series.flatMap((s) => s.values);
  const fLo = allF.length ? Math.log10(Math.min(...allF)) : 0;
  const fHi = allF.length ? Math.log10(Math.max(...allF)) : 3;
  const xSpan = fHi > fLo ? fHi - fLo : 1;
  const y = niceRange(allV);

  const xOf = (f: number) => ml + ((Math.log10(f) - fLo) / xSpan) * pw;
  const yOf = (v: number) => mt + (1 - (v - y.lo) / (y.hi - y.lo)) * ph;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" ` +
    `font-family="sans-serif" font-size="11">`,
  );
  parts.push(
    `<text x="${ml}" y="14" font-size="12" font-weight="bold">${opts.title}</text>`,
  );
  parts.push(
    `<rect x="${ml}" y="${mt}" width="${pw}" height="${ph}" fill="none" stroke="#999"/>`,
  );

  // decade grid
  for (let d = Math.ceil(fLo); d <= Math.floor(fHi); d++) {
    const x = xOf(10 ** d);
    parts.push(
      `<line x1="${x.toFixed(1)}" y1="${mt}" x2="${x.toFixed(1)}" ` +
      `y2="${mt + ph}" stroke="#ddd"/>`,
      `<text x="${x.toFixed(1)}" y="${height - 16}" text-anchor="middle">` +
      `1e${d}</text>`,
    );
  }
  parts.push(
    `<text x="${ml + pw / 2}" y="${height - 2}" text-anchor="middle">frequency [Hz]</text>`,
  );

  // horizontal ticks
  const nTicks = 5;
  for (let i = 0; i <= nTicks; i++) {
    const v = y.lo + (i / nTicks) * (y.hi - y.lo);
    const yy = yOf(v);
    parts.push(
      `<line x1="${ml}" y1="${yy.toFixed(1)}" x2="${ml + pw}" ` +
      `y2="${yy.toFixed(1)}" stroke="#eee"/>`,
      `<text x="${ml - 6}" y="${(yy + 3).toFixed(1)}" text-anchor="end">` +
      `${v.toPrecision(3)}</text>`,
    );
  }
  parts.push(
    `<text transform="rotate(-90 14 ${mt + ph / 2})" x="14" y="${mt + ph / 2}" ` +
    `text-anchor="middle">${opts.yLabel}</text>`,
  );

  for (const s of series) {
    const pts: string[] = [];
    for (let i = 0; i < s.freqsHz.length; i++) {
      const v = s.values[i];
      if (!isFinite(v) || s.freqsHz[i] <= 0) continue;
      pts.push(`${xOf(s.freqsHz[i]).toFixed(2)},${yOf(v).toFixed(2)}`);
    }
    parts.push(
      `<polyline fill="none" stroke="${s.color}" stroke-width="1.5" ` +
      `points="${pts.join(" ")}" data-label="${s.label}"/>`,
    );
  }

  // legend
  let lx = ml + 8;
  for (const s of series) {
    parts.push(
      `<rect x="${lx}" y="${mt + 6}" width="10" height="3" fill="${s.color}"/>`,
      `<text x="${lx + 13}" y="${mt + 11}">${s.label}</text>`,
    );
    lx += 13 + 8 * s.label.length;
  }

  parts.push("</svg>");
  return parts.join("");
}

export function loopDiagramSvg(): string {
  // static generalized-loop diagram: series pre-compensator, reset element
  // with parallel path and shaped trigger, post compensator, plant,
  // feedback compensator
  const box = (x: number, y: number, label: string, accent = false) =>
    `<rect x="${x}" y="${y}" width="52" height="26" fill="${accent ? "#eef4ff" : "#fff"}" ` +
    `stroke="${accent ? "#1965b0" : "#333"}"/>` +
    `<text x="${x + 26}" y="${y + 17}" text-anchor="middle" font-size="11">${label}</text>`;
  const arrow = (x1: number, y1: number, x2: number, y2: number) =>
    `<line x1="${x1}" y1="${y1}" x2="${x2}" y2="${y2}" stroke="#333" marker-end="url(#arr)"/>`;
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 640 170" font-family="sans-serif">`,
    `<defs><marker id="arr" markerWidth="8" markerHeight="8" refX="7" refY="3" orient="auto">`,
    `<path d="M0,0 L7,3 L0,6 z" fill="#333"/></marker></defs>`,
    `<circle cx="60" cy="60" r="9" fill="#fff" stroke="#333"/>`,
    `<text x="60" y="64" text-anchor="middle" font-size="11">–</text>`,
    `<text x="20" y="55" font-size="11">r</text>`,
    arrow(15, 60, 51, 60),
    arrow(69, 60, 100, 60), `<text x="80" y="52" font-size="11">e</text>`,
    box(100, 47, "C1"),
    arrow(152, 60, 190, 60), `<text x="165" y="52" font-size="11">z</text>`,
    box(190, 47, "Cr", true),
    box(190, 8, "C2"),
    box(190, 120, "Cs", true),
    arrow(170, 60, 170, 21), arrow(170, 21, 190, 21),
    arrow(170, 60, 170, 133), arrow(170, 133, 190, 133),
    arrow(242, 133, 262, 133),
    `<text x="252" y="125" font-size="11">zs</text>`,
    `<line x1="262" y1="133" x2="262" y2="78" stroke="#1965b0" stroke-dasharray="4 2" marker-end="url(#arr)"/>`,
    `<text x="270" y="110" font-size="10" fill="#1965b0">trigger</text>`,
    arrow(242, 21, 300, 21), arrow(300, 21, 300, 51),
    arrow(242, 60, 291, 60),
    `<circle cx="300" cy="60" r="9" fill="#fff" stroke="#333"/>`,
    `<text x="300" y="64" text-anchor="middle" font-size="11">+</text>`,
    arrow(309, 60, 340, 60), `<text x="320" y="52" font-size="11">v</text>`,
    box(340, 47, "C3"),
    arrow(392, 60, 421, 60), `<text x="402" y="52" font-size="11">u</text>`,
    `<circle cx="430" cy="60" r="9" fill="#fff" stroke="#333"/>`,
    `<text x="430" y="64" text-anchor="middle" font-size="11">+</text>`,
    `<line x1="430" y1="25" x2="430" y2="51" stroke="#333" marker-end="url(#arr)"/>`,
    `<text x="436" y="35" font-size="11">d</text>`,
    arrow(439, 60, 470, 60),
    box(470, 47, "P"),
    arrow(522, 60, 590, 60), `<text x="585" y="52" font-size="11">y</text>`,
    `<line x1="560" y1="60" x2="560" y2="140" stroke="#333"/>`,
    arrow(560, 140, 322, 140),
    box(270, 127, "C4"),
    arrow(270, 140, 60, 140),
    `<line x1="60" y1="140" x2="60" y2="69" stroke="#333" marker-end="url(#arr)"/>`,
    `</svg>`,
  ].join("");
}
