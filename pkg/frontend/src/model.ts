/**
 * Local model evaluation: identical arithmetic to the backend, so the
 * serverless tag and the service agree bit for bit on the same inputs.
 */

import { Grade, ParsedArtifact } from "./artifact";

export const GRADES: Grade[] = ["A", "B", "C", "D", "E", "F", "G"];

export class MissingParameterError extends Error {
  field: string;
  constructor(field: string) {
    super(`parameter not present: ${field}`);
    this.field = field;
    this.name = "MissingParameterError";
  }
}

export function evaluateEstimate(
  artifact: ParsedArtifact,
  parameters: Record<string, number>
): number {
  let total = artifact.intercept;
  for (let i = 0; i < artifact.featureSpecs.length; i++) {
    let value = 1.0;
    for (const factor of artifact.featureSpecs[i]) {
      const v = parameters[factor];
      if (typeof v !== "number" || !Number.isFinite(v)) {
        throw new MissingParameterError(factor);
      }
      value *= v;
    }
    total += artifact.coefficients[i] * value;
  }
  return total;
}

/** Half-open bins: a value on a boundary belongs to the upper bin. */
export function labelFor(estimate: number, bins: number[]): Grade {
  if (!Number.isFinite(estimate)) {
    throw new RangeError(`estimate is not finite: ${estimate}`);
  }
  let index = 0;
  for (let i = 0; i < bins.length; i++) {
    if (estimate >= bins[i]) {
      index = i;
    }
  }
  return GRADES[index];
}

export interface LocalEstimate {
  nEadEstimate: number;
  label: Grade;
  modelVersion: string;
}

export function estimateLocal(
  artifact: ParsedArtifact,
  parameters: Record<string, number>
): LocalEstimate {
  const estimate = evaluateEstimate(artifact, parameters);
  return {
    nEadEstimate: estimate,
    label: labelFor(estimate, artifact.labelBins),
    modelVersion: artifact.modelVersion,
  };
}
