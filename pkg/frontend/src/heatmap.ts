/**
 * Heatmap span model: one entry per token, in source order, carrying the
 * API-delivered intensity untouched. The client never recomputes the
 * scaling; the service's min-max normalization is the single source of
 * truth for color magnitudes.
 */

import { MetricKind, MetricVector } from "./api.js";
import { formatTooltip } from "./format.js";

export interface TokenSpan {
  position: number;
  text: string;
  value: number;
  intensity: number;
  tooltip: string;
}

export class HeatmapDataError extends Error {}

export function heatmapSpans(metric: MetricVector): TokenSpan[] {
  const { values, intensities, tokens, kind } = metric;
  if (values.length !== tokens.length || intensities.length !== tokens.length) {
    throw new HeatmapDataError(
      `metric ${kind}: ${values.length} values / ${intensities.length} intensities ` +
        `for ${tokens.length} tokens`,
    );
  }
  for (const intensity of intensities) {
    if (!(intensity >= 0 && intensity <= 1)) {
      throw new HeatmapDataError(`metric ${kind}: intensity ${intensity} outside [0, 1]`);
    }
  }
  return tokens.map((text, position) => ({
    position,
    text,
    value: values[position],
    intensity: intensities[position],
    tooltip: `${kind} = ${formatTooltip(values[position])}`,
  }));
}

// Single-hue ramp per metric; brightness follows intensity directly for
// every kind (probability included: bright = confident per its caption).
const HUES: Record<MetricKind, number> = {
  probability: 145,
  surprisal: 25,
  entropy: 210,
  varentropy: 280,
  skewentropy: 330,
  perplexity: 50,
};

export function spanColor(kind: MetricKind, intensity: number): string {
  const lightness = 92 - 50 * intensity;
  return `hsl(${HUES[kind]}, 85%, ${lightness}%)`;
}
