/**
 * View state and transitions: the active session, the metric being
 * displayed, and the selected token. Each user action bumps an epoch;
 * responses that come back for a superseded epoch are discarded, so at
 * most one request per action ever lands on the view.
 */

import { METRIC_KINDS, MetricKind } from "./api.js";

export interface ViewState {
  sessionId: string | null;
  sessionTokens: number;
  metric: MetricKind;
  selectedPosition: number | null;
  epoch: number;
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    sessionTokens: 0,
    metric: "entropy",
    selectedPosition: null,
    epoch: 0,
  };
}

export function withSession(state: ViewState, sessionId: string, tokens: number): ViewState {
  return {
    ...state,
    sessionId,
    sessionTokens: tokens,
    selectedPosition: null,
    epoch: state.epoch + 1,
  };
}

export function withMetric(state: ViewState, metric: MetricKind): ViewState {
  if (!METRIC_KINDS.includes(metric)) {
    throw new Error(`unknown metric kind: ${metric}`);
  }
  return { ...state, metric, epoch: state.epoch + 1 };
}

export function withSelection(state: ViewState, position: number | null): ViewState {
  if (position !== null && (position < 0 || position >= state.sessionTokens)) {
    throw new Error(`position ${position} outside session of ${state.sessionTokens} tokens`);
  }
  return { ...state, selectedPosition: position, epoch: state.epoch + 1 };
}

/** True when a response that started at `requestEpoch` is still current. */
export function isCurrent(state: ViewState, requestEpoch: number): boolean {
  return state.epoch === requestEpoch;
}
