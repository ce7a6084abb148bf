/**
 * Sidebar statistics panel model. Values are rendered verbatim from the
 * session report; the only client-side operation is decimal formatting.
 */

import { METRIC_KINDS, MetricKind, SessionReport } from "./api.js";
import { formatSidebar } from "./format.js";

export interface SidebarRow {
  kind: MetricKind;
  mean: string;
  median: string;
  min: string;
  max: string;
  raw: { mean: number; median: number; min: number; max: number };
}

export interface SidebarModel {
  label: string;
  tokens: number;
  characters: number;
  perplexity: string;
  logProbability: string;
  approximate: boolean;
  rows: SidebarRow[];
}

export function sidebarModel(report: SessionReport): SidebarModel {
  const rows = METRIC_KINDS.map((kind) => {
    const summary = report.metrics[kind];
    return {
      kind,
      mean: formatSidebar(summary.mean),
      median: formatSidebar(summary.median),
      min: formatSidebar(summary.min),
      max: formatSidebar(summary.max),
      raw: summary,
    };
  });
  return {
    label: report.label,
    tokens: report.tokens,
    characters: report.characters,
    perplexity: formatSidebar(report.perplexity),
    logProbability: formatSidebar(report.log_probability),
    approximate: report.approximate,
    rows,
  };
}
