// Five-panel layout: loop diagram, parameter entry, open-loop plots,
// multiple-reset scan, closed-loop plots. Edits stay local until a
// Plot/Test button submits; one in-flight request per panel; plots
// accumulate (for overlays) until Clear.

import { AnalysisClient, ApiError, GridPayload } from "./api.js";
import { bodeSvg, loopDiagramSvg, Series, seriesFromGrid } from "./bode.js";
import { download, gridToCsv } from "./csv.js";
import { renderScanReport, renderStability } from "./report.js";
import { DEFAULT_FORM, FormValues, PRESETS, validateForm } from "./schema.js";

const STORAGE_KEY = "resetfreq-form";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

class ParameterPanel {
  readonly root: HTMLElement;
  private inputs = new Map<keyof FormValues, HTMLInputElement | HTMLSelectElement>();
  private errors = new Map<string, HTMLElement>();

  constructor() {
    this.root = el("section", { class: "panel" });
    this.root.append(el("h2", {}, "2 - System parameters"));
    const stored = this.restore();

    const presetRow = el("div", { class: "row" });
    presetRow.append(el("label", {}, "preset"));
    const sel = el("select", { name: "preset" });
    sel.append(el("option", { value: "" }, "(explicit blocks)"));
    for (const p of PRESETS) sel.append(el("option", { value: p }, p));
    sel.value = stored.preset;
    presetRow.append(sel, this.errorSlot("preset"));
    this.inputs.set("preset", sel);
    this.root.append(presetRow);

    const blockHelp = el(
      "p",
      { class: "help" },
      "Blocks accept 'gain k' or 'num / den' with coefficients in " +
      "descending powers of s, e.g. '0.0021, 1 / 0.0001, 1'.",
    );
    this.root.append(blockHelp);

    const fields: [keyof FormValues, string][] = [
      ["c1", "series block C1"], ["c2", "parallel block C2"],
      ["c3", "post block C3"], ["c4", "feedback block C4"],
      ["cs", "trigger shaping Cs"],
      ["resetNum", "reset base numerator"], ["resetDen", "reset base denominator"],
      ["gamma", "reset value (-1, 1]"],
      ["plantNum", "plant numerator"], ["plantDen", "plant denominator"],
      ["fStart", "start [Hz]"], ["fEnd", "end [Hz]"],
      ["points", "points"], ["harmonics", "harmonic cap"],
    ];
    for (const [name, label] of fields) {
      const row = el("div", { class: "row" });
      row.append(el("label", {}, label));
      const input = el("input", { name, value: stored[name] });
      this.inputs.set(name, input);
      row.append(input, this.errorSlot(name));
      this.root.append(row);
    }
    sel.addEventListener("change", () => this.toggleExplicit());
    this.toggleExplicit();
  }

  private errorSlot(name: string): HTMLElement {
    const slot = el("span", { class: "error" });
    this.errors.set(name, slot);
    return slot;
  }

  private toggleExplicit(): void {
    const explicit = (this.inputs.get("preset") as HTMLSelectElement).value === "";
    for (const name of ["c1", "c2", "c3", "c4", "cs", "resetNum", "resetDen",
                        "gamma", "plantNum", "plantDen"] as const) {
      (this.inputs.get(name) as HTMLInputElement).disabled = !explicit;
    }
  }

  values(): FormValues {
    const out = { ...DEFAULT_FORM };
    for (const [name, input] of this.inputs) {
      (out as Record<string, string>)[name] = input.value;
    }
    return out;
  }

  // returns a validated config or null after flagging fields inline
  submit(): ReturnType<typeof validateForm>["config"] | null {
    const values = this.values();
    const { config, errors } = validateForm(values);
    for (const [name, slot] of this.errors) slot.textContent = errors[name] ?? "";
    if (config) {
      localStorage.setItem(STORAGE_KEY, JSON.stringify(values));
    }
    return config ?? null;
  }

  private restore(): FormValues {
    try {
      const raw = localStorage.getItem(STORAGE_KEY);
      if (raw) return { ...DEFAULT_FORM, ...JSON.parse(raw) };
    } catch {
      // fall through to defaults
    }
    return { ...DEFAULT_FORM };
  }
}

abstract class PlotPanel {
  readonly root: HTMLElement;
  protected status: HTMLElement;
  protected magBox: HTMLElement;
  protected phaseBox: HTMLElement;
  protected series: { mag: Series[]; phase: Series[] } = { mag: [], phase: [] };
  protected lastRows: GridPayload["rows"] = [];
  protected busy = false;
  protected runIndex = 0;
  protected unwrap = false;

  constructor(title: string, private withGamma: boolean) {
    this.root = el("section", { class: "panel" });
    this.root.append(el("h2", {}, title));
    this.status = el("p", { class: "status" });
    this.magBox = el("div", { class: "chart" });
    this.phaseBox = el("div", { class: "chart" });
  }

  protected controls(buttons: [string, () => void][]): HTMLElement {
    const bar = el("div", { class: "row" });
    for (const [label, handler] of buttons) {
      const btn = el("button", {}, label);
      btn.addEventListener("click", handler);
      bar.append(btn);
    }
    const unwrapToggle = el("label", { class: "toggle" }, " unwrapped phase");
    const box = el("input", { type: "checkbox" });
    box.addEventListener("change", () => {
      this.unwrap = box.checked;
      this.redraw();
    });
    unwrapToggle.prepend(box);
    bar.append(unwrapToggle);
    return bar;
  }

  protected async run(fn: string, fetcher: () => Promise<GridPayload>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.status.textContent = `computing ${fn} ...`;
    try {
      const payload = await fetcher();
      this.lastRows = payload.rows;
      this.series.mag.push(
        ...seriesFromGrid(payload, "mag_db", fn, this.runIndex),
      );
      this.series.phase.push(
        ...seriesFromGrid(payload, "phase_deg", fn, this.runIndex, this.unwrap),
      );
      this.runIndex += payload.harmonics.length;
      this.status.textContent = renderStability(payload.stability);
      this.redraw();
    } catch (err) {
      this.status.textContent =
        err instanceof ApiError ? `error ${err.status}: ${err.message}` : String(err);
    } finally {
      this.busy = false;
    }
  }

  protected redraw(): void {
    this.magBox.innerHTML = bodeSvg(this.series.mag, {
      title: "magnitude", yLabel: "magnitude [dB]",
    });
    const phase = this.series.phase.map((s) => ({
      ...s,
      values: this.unwrap ? s.values : s.values,
    }));
    this.phaseBox.innerHTML = bodeSvg(phase, {
      title: "phase", yLabel: "phase [deg]",
    });
  }

  protected clear(): void {
    this.series = { mag: [], phase: [] };
    this.lastRows = [];
    this.runIndex = 0;
    this.status.textContent = "";
    this.redraw();
  }

  protected export(name: string): void {
    if (this.lastRows.length === 0) {
      this.status.textContent = "nothing to export";
      return;
    }
    download(name, gridToCsv(this.lastRows, this.withGamma));
  }
}

class OpenLoopPanel extends PlotPanel {
  private fn: "cr" | "ln" = "ln";

  constructor(private client: AnalysisClient, private params: ParameterPanel) {
    super("3 - Open-loop describing functions", false);
    const selector = el("select", {});
    selector.append(el("option", { value: "ln" }, "Ln"));
    selector.append(el("option", { value: "cr" }, "Cr"));
    selector.addEventListener("change", () => {
      this.fn = selector.value as "cr" | "ln";
    });
    const bar = this.controls([
      ["Plot", () => void this.plot()],
      ["Clear", () => this.clear()],
      ["Export", () => this.export(`open_loop_${this.fn}.csv`)],
    ]);
    bar.prepend(selector);
    this.root.append(bar, this.status, this.magBox, this.phaseBox);
  }

  async plot(): Promise<void> {
    const config = this.params.submit();
    if (!config) return;
    await this.run(this.fn, () => this.client.openLoop(config, this.fn));
  }
}

class ClosedLoopPanel extends PlotPanel {
  private fn: "sn" | "tn" | "csn" | "psn" = "sn";

  constructor(private client: AnalysisClient, private params: ParameterPanel) {
    super("5 - Closed-loop sensitivity functions", true);
    const selector = el("select", {});
    for (const fn of ["sn", "tn", "csn", "psn"]) {
      selector.append(el("option", { value: fn }, fn.toUpperCase()));
    }
    selector.addEventListener("change", () => {
      this.fn = selector.value as typeof this.fn;
    });
    const bar = this.controls([
      ["Plot", () => void this.plot()],
      ["Clear", () => this.clear()],
      ["Export", () => this.export(`closed_loop_${this.fn}.csv`)],
    ]);
    bar.prepend(selector);
    this.root.append(bar, this.status, this.magBox, this.phaseBox);
  }

  async plot(): Promise<void> {
    const config = this.params.submit();
    if (!config) return;
    await this.run(this.fn, () => this.client.closedLoop(config, this.fn));
  }
}

class ScanPanel {
  readonly root: HTMLElement;
  private status: HTMLElement;
  private result: HTMLElement;
  private abort: AbortController | null = null;
  private startInput: HTMLInputElement;
  private endInput: HTMLInputElement;
  private stepInput: HTMLInputElement;

  constructor(private client: AnalysisClient, private params: ParameterPanel) {
    this.root = el("section", { class: "panel" });
    this.root.append(el("h2", {}, "4 - Multiple-reset scan"));
    const bar = el("div", { class: "row" });
    this.startInput = el("input", { value: "1" });
    this.endInput = el("input", { value: "1000" });
    this.stepInput = el("input", { value: "1" });
    bar.append(
      el("label", {}, "from [Hz]"), this.startInput,
      el("label", {}, "to [Hz]"), this.endInput,
      el("label", {}, "step [Hz]"), this.stepInput,
    );
    const testBtn = el("button", {}, "Test");
    testBtn.addEventListener("click", () => void this.test());
    const cancelBtn = el("button", {}, "Cancel");
    cancelBtn.addEventListener("click", () => this.abort?.abort());
    bar.append(testBtn, cancelBtn);
    this.status = el("p", { class: "status" });
    this.result = el("pre", { class: "report" });
    this.root.append(bar, this.status, this.result);
  }

  async test(): Promise<void> {
    if (this.abort) return; // one scan at a time
    const config = this.params.submit();
    if (!config) return;
    const band = {
      f_start_hz: Number(this.startInput.value),
      f_end_hz: Number(this.endInput.value),
      step_hz: Number(this.stepInput.value),
    };
    if (!(band.f_start_hz > 0) || !(band.f_end_hz >= band.f_start_hz)
        || !(band.step_hz > 0)) {
      this.status.textContent = "invalid band or step";
      return;
    }
    this.abort = new AbortController();
    this.status.textContent = "scanning ...";
    this.result.textContent = "";
    try {
      const { result, partial, seen } = await this.client.scanStream(
        config, band,
        (p) => {
          this.status.textContent =
            `tested ${p.freq_hz} Hz: ` +
            (p.error ? `failed (${p.error})` : `${p.count} resets/cycle`);
        },
        this.abort.signal,
      );
      this.result.textContent = renderScanReport(result, partial, seen);
      this.status.textContent = partial ? "cancelled" : "done";
    } catch (err) {
      this.status.textContent =
        err instanceof ApiError ? `error ${err.status}: ${err.message}` : String(err);
    } finally {
      this.abort = null;
    }
  }
}

export function mountApp(root: HTMLElement, client: AnalysisClient): void {
  const diagram = el("section", { class: "panel" });
  diagram.append(el("h2", {}, "1 - Loop structure"));
  const holder = el("div", { class: "diagram" });
  holder.innerHTML = loopDiagramSvg();
  diagram.append(holder);

  const params = new ParameterPanel();
  const openLoop = new OpenLoopPanel(client, params);
  const scan = new ScanPanel(client, params);
  const closedLoop = new ClosedLoopPanel(client, params);

  root.append(diagram, params.root, openLoop.root, scan.root, closedLoop.root);
}
