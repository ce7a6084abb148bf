/**
 * Sidebar statistics panel model. Values are rendered verbatim from the
 * session report; the only client-side operation is decimal formatting.
 */
import { METRIC_KINDS } from "./api.js";
import { formatSidebar } from "./format.js";
export function sidebarModel(report) {
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
