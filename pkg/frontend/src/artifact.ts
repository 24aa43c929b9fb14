/**
 * Model artifact parsing and integrity verification.
 *
 * Artifacts are canonical JSON documents whose keys are sorted, which puts
 * the payload last; the checksum is therefore verified over the payload's
 * exact byte range in the received text, with no re-serialization needed.
 * The artifact must be supplied as its original string: re-serializing a
 * parsed object cannot reproduce the canonical float formatting.
 */

export type Grade = "A" | "B" | "C" | "D" | "E" | "F" | "G";

export interface ParsedArtifact {
  modelVersion: string;
  featureSpecs: string[][];
  coefficients: number[];
  intercept: number;
  labelBins: number[];
  checksum: string;
}

export type ArtifactErrorCode = "integrity" | "version" | "malformed";

export class ArtifactError extends Error {
  code: ArtifactErrorCode;
  constructor(code: ArtifactErrorCode, message: string) {
    super(message);
    this.code = code;
    this.name = "ArtifactError";
  }
}

const FNV_PRIME = 0x1000000000000000000013bn;
const FNV_OFFSET_BASIS = 0x6c62272e07bb014262b821756295c58dn;
const FNV_MASK = (1n << 128n) - 1n;

export function fnv1a128Hex(bytes: Uint8Array): string {
  let hash = FNV_OFFSET_BASIS;
  for (let i = 0; i < bytes.length; i++) {
    hash = ((hash ^ BigInt(bytes[i])) * FNV_PRIME) & FNV_MASK;
  }
  return hash.toString(16).padStart(32, "0");
}

const SUPPORTED_VERSIONS = ["1"];
const PAYLOAD_MARKER = '"payload":';

export function parseArtifact(source: string): ParsedArtifact {
  if (typeof source !== "string") {
    throw new ArtifactError(
      "malformed",
      "artifact must be the canonical document string"
    );
  }
  const text = source.trim();
  let document: any;
  try {
    document = JSON.parse(text);
  } catch (err) {
    throw new ArtifactError("integrity", `artifact is not valid JSON: ${err}`);
  }
  if (!document || document.format !== "carbontag-model") {
    throw new ArtifactError("integrity", "artifact is missing the format marker");
  }
  const payload = document.payload;
  const checksum = document.checksum;
  if (typeof payload !== "object" || payload === null || typeof checksum !== "string") {
    throw new ArtifactError("integrity", "artifact is missing payload or checksum");
  }
  const markerIndex = text.indexOf(PAYLOAD_MARKER);
  if (markerIndex < 0 || !text.endsWith("}")) {
    throw new ArtifactError("integrity", "artifact is not in canonical form");
  }
  const payloadText = text.slice(markerIndex + PAYLOAD_MARKER.length, text.length - 1);
  const digest = fnv1a128Hex(new TextEncoder().encode(payloadText));
  if (digest !== checksum.toLowerCase()) {
    throw new ArtifactError(
      "integrity",
      `checksum mismatch: expected ${checksum}, computed ${digest}`
    );
  }
  if (!SUPPORTED_VERSIONS.includes(payload.version)) {
    throw new ArtifactError("version", `unsupported artifact version: ${payload.version}`);
  }
  const featureSpecs = payload.feature_specs;
  const coefficients = payload.coefficients;
  const labelBins = payload.label_bins;
  if (
    !Array.isArray(featureSpecs) ||
    !Array.isArray(coefficients) ||
    !Array.isArray(labelBins) ||
    featureSpecs.length !== coefficients.length ||
    typeof payload.intercept !== "number" ||
    typeof payload.model_version !== "string"
  ) {
    throw new ArtifactError("malformed", "artifact payload is malformed");
  }
  return {
    modelVersion: payload.model_version,
    featureSpecs: featureSpecs.map((factors: unknown) => {
      if (!Array.isArray(factors) || factors.some((f) => typeof f !== "string")) {
        throw new ArtifactError("malformed", "feature spec factors must be strings");
      }
      return factors as string[];
    }),
    coefficients: coefficients.map(Number),
    intercept: payload.intercept,
    labelBins: labelBins.map(Number),
    checksum: checksum.toLowerCase(),
  };
}
