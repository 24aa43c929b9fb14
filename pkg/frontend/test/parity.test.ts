/**
 * Cross-component parity: the published vector file pins the backend's
 * estimates and labels; the tag's local evaluation must match within 1e-9
 * relative on the estimate and exactly on the label.
 */

import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";
import { describe, expect, it } from "vitest";

import { parseArtifact } from "../src/artifact";
import { estimateLocal } from "../src/model";

const here = dirname(fileURLToPath(import.meta.url));
const vectors = JSON.parse(
  readFileSync(join(here, "fixtures", "parity_vectors.json"), "utf-8")
) as {
  artifact_text: string;
  cases: {
    parameters: Record<string, number>;
    expected: { nEad_estimate: number; label: string };
  }[];
};

describe("parity vectors", () => {
  it("has at least 100 cases", () => {
    expect(vectors.cases.length).toBeGreaterThanOrEqual(100);
  });

  it("matches the backend on every published case", () => {
    const artifact = parseArtifact(vectors.artifact_text);
    let maxRelativeError = 0;
    for (const testCase of vectors.cases) {
      const result = estimateLocal(artifact, testCase.parameters);
      const expected = testCase.expected.nEad_estimate;
      const tolerance = 1e-9 * Math.max(1, Math.abs(expected));
      const error = Math.abs(result.nEadEstimate - expected);
      expect(error).toBeLessThanOrEqual(tolerance);
      expect(result.label).toBe(testCase.expected.label);
      maxRelativeError = Math.max(
        maxRelativeError,
        error / Math.max(1, Math.abs(expected))
      );
    }
    // evaluation order is identical on both sides, so this is usually 0
    expect(maxRelativeError).toBeLessThanOrEqual(1e-9);
  });
});
