import { describe, expect, it } from "vitest";

import { MetricVector } from "../src/api.js";
import { HeatmapDataError, heatmapSpans, spanColor } from "../src/heatmap.js";

function vector(overrides: Partial<MetricVector> = {}): MetricVector {
  return {
    kind: "entropy",
    values: [1.0, 2.0, 3.0],
    intensities: [0.0, 0.5, 1.0],
    tokens: ["We", " hold", " these"],
    approximate: false,
    ...overrides,
  };
}

describe("heatmapSpans", () => {
  it("emits one span per token in source order", () => {
    const spans = heatmapSpans(vector());
    expect(spans.map((s) => s.text)).toEqual(["We", " hold", " these"]);
    expect(spans.map((s) => s.position)).toEqual([0, 1, 2]);
  });

  it("uses API-delivered intensities verbatim", () => {
    const spans = heatmapSpans(vector());
    expect(spans.map((s) => s.intensity)).toEqual([0.0, 0.5, 1.0]);
  });

  it("constant-metric sessions render at intensity 0", () => {
    const spans = heatmapSpans(
      vector({ values: [5, 5, 5], intensities: [0, 0, 0] }),
    );
    expect(spans.every((s) => s.intensity === 0)).toBe(true);
  });

  it("tooltips carry the metric value at 4 significant digits", () => {
    const spans = heatmapSpans(vector({ values: [1.23456, 2, 3] }));
    expect(spans[0].tooltip).toBe("entropy = 1.235");
  });

  it("rejects misaligned payloads instead of partially rendering", () => {
    expect(() => heatmapSpans(vector({ values: [1, 2] }))).toThrow(HeatmapDataError);
    expect(() => heatmapSpans(vector({ intensities: [0, 0.5] }))).toThrow(
      HeatmapDataError,
    );
  });

  it("rejects intensities outside [0, 1]", () => {
    expect(() => heatmapSpans(vector({ intensities: [0, 0.5, 1.2] }))).toThrow(
      HeatmapDataError,
    );
  });
});

describe("spanColor", () => {
  it("higher intensity means darker ink for every metric", () => {
    const light = spanColor("entropy", 0);
    const dark = spanColor("entropy", 1);
    expect(light).toContain("92%");
    expect(dark).toContain("42%");
  });

  it("probability keeps the direct scale", () => {
    // bright (low lightness delta) at low intensity; no inversion applied
    expect(spanColor("probability", 0)).toContain("92%");
    expect(spanColor("probability", 1)).toContain("42%");
  });
});
