/**
 * View state and transitions: the active session, the metric being
 * displayed, and the selected token. Each user action bumps an epoch;
 * responses that come back for a superseded epoch are discarded, so at
 * most one request per action ever lands on the view.
 */
import { METRIC_KINDS } from "./api.js";
export function initialState() {
    return {
        sessionId: null,
        sessionTokens: 0,
        metric: "entropy",
        selectedPosition: null,
        epoch: 0,
    };
}
export function withSession(state, sessionId, tokens) {
    return {
        ...state,
        sessionId,
        sessionTokens: tokens,
        selectedPosition: null,
        epoch: state.epoch + 1,
    };
}
export function withMetric(state, metric) {
    if (!METRIC_KINDS.includes(metric)) {
        throw new Error(`unknown metric kind: ${metric}`);
    }
    return { ...state, metric, epoch: state.epoch + 1 };
}
export function withSelection(state, position) {
    if (position !== null && (position < 0 || position >= state.sessionTokens)) {
        throw new Error(`position ${position} outside session of ${state.sessionTokens} tokens`);
    }
    return { ...state, selectedPosition: position, epoch: state.epoch + 1 };
}
/** True when a response that started at `requestEpoch` is still current. */
export function isCurrent(state, requestEpoch) {
    return state.epoch === requestEpoch;
}
