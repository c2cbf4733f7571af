"""Row/CSV serialization shared by the CLI and the HTTP service.

Values are formatted with 12 significant digits so that exported files
re-parse to exactly the formatted values (round-trip stable).
"""

from __future__ import annotations

import csv
import io
import math

import numpy as np

from .closed_loop import ClosedLoopGrid
from .open_loop import HosidfGrid
from .simulation import SimTrace

__all__ = [
    "fmt",
    "open_loop_rows",
    "closed_loop_rows",
    "trace_rows",
    "rows_to_csv",
    "OPEN_LOOP_FIELDS",
    "CLOSED_LOOP_FIELDS",
    "TRACE_FIELDS",
]

TWO_PI = 2.0 * math.pi

OPEN_LOOP_FIELDS = ("freq_hz", "n", "re", "im", "mag_db", "phase_deg")
CLOSED_LOOP_FIELDS = OPEN_LOOP_FIELDS + ("gamma",)
TRACE_FIELDS = ("t", "e", "z", "zs", "v", "u", "y", "reset_flag")


def fmt(x) -> str:
    return f"{x:.12g}"


def _polar(v: complex) -> tuple[float, float]:
    mag = abs(v)
    mag_db = 20.0 * math.log10(mag) if mag > 0.0 else -math.inf
    return mag_db, math.degrees(np.angle(v))


def open_loop_rows(grid: HosidfGrid) -> list[dict]:
    rows = []
    for i, w in enumerate(grid.freqs):
        for j, n in enumerate(grid.harmonics):
            v = grid.values[i, j]
            if not np.isfinite(v.real) or not np.isfinite(v.imag):
                continue
            mag_db, phase_deg = _polar(complex(v))
            rows.append({
                "freq_hz": w / TWO_PI, "n": n, "re": v.real, "im": v.imag,
                "mag_db": mag_db, "phase_deg": phase_deg,
            })
    return rows


def closed_loop_rows(grid: ClosedLoopGrid, family: str) -> list[dict]:
    values = grid.families[family]
    rows = []
    for i, w in enumerate(grid.freqs):
        if not np.isfinite(grid.gamma[i]):
            continue
        for j, n in enumerate(grid.harmonics):
            v = values[i, j]
            mag_db, phase_deg = _polar(complex(v))
            rows.append({
                "freq_hz": w / TWO_PI, "n": n, "re": v.real, "im": v.imag,
                "mag_db": mag_db, "phase_deg": phase_deg,
                "gamma": grid.gamma[i],
            })
    return rows


def trace_rows(trace: SimTrace, decimate: int = 1) -> list[dict]:
    stride = max(1, decimate)
    idx = np.arange(0, trace.n_samples, stride)
    t = trace.t
    # a reset between emitted samples flags the first row at/after it
    flags = np.zeros(idx.size, dtype=int)
    if trace.reset_times.size:
        marks = np.searchsorted(t[idx], trace.reset_times)
        flags[np.minimum(marks, idx.size - 1)] = 1
    rows = []
    for j, k in enumerate(idx):
        rows.append({
            "t": t[k], "e": trace.e[k], "z": trace.z[k], "zs": trace.zs[k],
            "v": trace.v[k], "u": trace.u[k], "y": trace.y[k],
            "reset_flag": int(flags[j]),
        })
    return rows


def rows_to_csv(fields, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([
            fmt(row[f]) if isinstance(row[f], float) else str(row[f])
            for f in fields
        ])
    return buf.getvalue()
