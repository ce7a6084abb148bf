/** Display formatting: 4 significant digits in tooltips, 2 decimals in the sidebar. */
export function formatTooltip(value) {
    if (!Number.isFinite(value))
        return String(value);
    if (value === 0)
        return "0.000";
    return value.toPrecision(4);
}
export function formatSidebar(value) {
    if (!Number.isFinite(value))
        return String(value);
    return value.toFixed(2);
}
