/**
 * Validation for the per-token top-k popup: rows must arrive sorted by
 * probability, non-increasing, and their mass must not exceed 1 beyond
 * float tolerance. Violations are surfaced, never silently reordered.
 */

import { TopkResponse, TopkRow } from "./api.js";

export const MASS_TOLERANCE = 1e-6;

export class TopkContractError extends Error {}

export interface ValidatedTopk {
  position: number;
  token: string;
  approximate: boolean;
  rows: TopkRow[];
  totalMass: number;
}

export function validateTopk(response: TopkResponse): ValidatedTopk {
  const rows = response.alternatives;
  let mass = 0;
  for (let i = 0; i < rows.length; i++) {
    if (i > 0 && rows[i].probability > rows[i - 1].probability) {
      throw new TopkContractError(
        `rows out of order at ${i}: ${rows[i].probability} > ${rows[i - 1].probability}`,
      );
    }
    mass += rows[i].probability;
  }
  if (mass > 1 + MASS_TOLERANCE) {
    throw new TopkContractError(`top-k mass ${mass} exceeds 1`);
  }
  return {
    position: response.position,
    token: response.token,
    approximate: response.approximate,
    rows,
    totalMass: mass,
  };
}
