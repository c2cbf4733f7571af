// CSV export with the server's number formatting (12 significant digits,
// printf %g rules) so downloads match server-side CSVs byte for byte.

import type { GridRow } from "./api.js";

// printf "%.12g" for finite doubles: fixed notation for decimal exponents
// in [-4, 12), scientific otherwise, trailing zeros stripped, exponent
// sign + at least two digits.
export function fmtG12(x: number): string {
  if (Number.isNaN(x)) return "nan";
  if (!isFinite(x)) return x > 0 ? "inf" : "-inf";
  if (x === 0) return Object.is(x, -0) ? "-0" : "0";
  const neg = x < 0;
  const exp12 = Math.abs(x).toExponential(11); // "d.dddddddddddde±k", rounded
  const m = /^(\d)\.(\d{11})e([+-]\d+)$/.exec(exp12);
  if (!m) throw new Error(`unexpected exponential form: ${exp12}`);
  const digits = m[1] + m[2]; // 12 significant digits
  const e = parseInt(m[3], 10);
  let out: string;
  if (e >= -4 && e < 12) {
    if (e >= 0) {
      const head = digits.slice(0, e + 1);
      const tail = digits.slice(e + 1).replace(/0+$/, "");
      out = tail ? `${head}.${tail}` : head;
    } else {
      const tail = ("0".repeat(-e - 1) + digits).replace(/0+$/, "");
      out = `0.${tail}`;
    }
  } else {
    const frac = digits.slice(1).replace(/0+$/, "");
    const mant = frac ? `${digits[0]}.${frac}` : digits[0];
    const sign = e < 0 ? "-" : "+";
    const mag = Math.abs(e).toString().padStart(2, "0");
    out = `${mant}e${sign}${mag}`;
  }
  return neg ? `-${out}` : out;
}

export function gridToCsv(rows: GridRow[], withGamma: boolean): string {
  const fields = withGamma
    ? ["freq_hz", "n", "re", "im", "mag_db", "phase_deg", "gamma"]
    : ["freq_hz", "n", "re", "im", "mag_db", "phase_deg"];
  const lines = [fields.join(",")];
  for (const row of rows) {
    lines.push(
      fields
        .map((f) => {
          const v = row[f as keyof GridRow] as number;
          return f === "n" ? String(v) : fmtG12(v);
        })
        .join(","),
    );
  }
  return lines.join("\n") + "\n";
}

export function download(filename: string, text: string): void {
  const blob = new Blob([text], { type: "text/csv" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}
