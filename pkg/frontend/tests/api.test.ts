import { describe, expect, it } from "vitest";

import { consumeScanStream, ScanProgress } from "../src/api.js";

function streamOf(chunks: string[]): ReadableStream<Uint8Array> {
  const encoder = new TextEncoder();
  let i = 0;
  return new ReadableStream({
    pull(controller) {
      if (i < chunks.length) {
        controller.enqueue(encoder.encode(chunks[i]));
        i += 1;
      } else {
        controller.close();
      }
    },
  });
}

describe("consumeScanStream", () => {
  it("parses progress lines and the final result across chunk splits", async () => {
    const lines = [
      '{"type": "progress", "freq_hz": 1.0, "count": 2.0, "error": null}\n',
      '{"type": "progress", "freq_hz": 2.0, "count": null, "error": "boom"}\n',
      '{"type": "result", "intervals_hz": [], "frequencies_hz": [1.0, 2.0], ' +
      '"counts": [2.0, null], "failures": [{"freq_hz": 2.0, "message": "boom"}], ' +
      '"has_multiple_reset_region": false}\n',
    ];
    // split the payload awkwardly to exercise buffering
    const raw = lines.join("");
    const chunks = [raw.slice(0, 25), raw.slice(25, 90), raw.slice(90)];
    const seen: ScanProgress[] = [];
    const { progress, result } = await consumeScanStream(
      streamOf(chunks), (p) => seen.push(p),
    );
    expect(progress).toHaveLength(2);
    expect(seen[1]).toEqual({ freq_hz: 2.0, count: null, error: "boom" });
    expect(result?.has_multiple_reset_region).toBe(false);
    expect(result?.failures[0].message).toBe("boom");
  });

  it("reports a null result when the stream ends early", async () => {
    const { progress, result } = await consumeScanStream(
      streamOf(['{"type": "progress", "freq_hz": 1.0, "count": 2.0, "error": null}\n']),
      () => undefined,
    );
    expect(progress).toHaveLength(1);
    expect(result).toBeNull();
  });
});
