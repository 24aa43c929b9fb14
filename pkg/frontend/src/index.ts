/**
 * CarbonTag ad tag entry point.
 *
 * Embed one script element and call init once the tag is loaded:
 *
 *   CarbonTag.init({ mode: "server", endpoint: "https://.../v1/estimate" });
 *   CarbonTag.init({ mode: "serverless", artifact: "<canonical artifact text>",
 *                    onResult: (r) => ... });
 *
 * Parameters are snapshot once, at the page load event plus an optional
 * settle delay. All failure paths end in callbacks or silence; the tag
 * never throws into the host page.
 */

import { ArtifactError, parseArtifact } from "./artifact";
import { beacon, BeaconOptions, EstimateRequestBody } from "./beacon";
import { collectParameters, WindowLike } from "./collect";
import { estimateLocal, LocalEstimate } from "./model";

export const TAG_VERSION = "adtag-0.1.0";

export interface InitConfig {
  mode: "server" | "serverless";
  endpoint?: string;
  artifact?: string;
  adId?: string;
  deviceProfile?: string;
  settleDelayMs?: number;
  fireAndForget?: boolean;
  onResult?: (result: LocalEstimate | object) => void;
  onError?: (error: { error: string; field?: string; detail?: string }) => void;
  /** test hooks */
  windowRef?: WindowLike & {
    addEventListener?: (type: string, listener: () => void) => void;
    document?: { readyState?: string };
    setTimeout?: (fn: () => void, ms: number) => unknown;
  };
  fetchFn?: typeof fetch;
}

function safeError(config: InitConfig, error: { error: string; field?: string; detail?: string }) {
  if (!config.onError) return;
  try {
    config.onError(error);
  } catch {
    // never propagate integrator exceptions
  }
}

function run(config: InitConfig, win: WindowLike): void {
  const collected = collectParameters(win);
  if (config.mode === "serverless") {
    if (typeof config.artifact !== "string") {
      safeError(config, { error: "artifact_missing" });
      return;
    }
    try {
      const artifact = parseArtifact(config.artifact);
      const result = estimateLocal(artifact, collected.parameters);
      if (config.onResult) config.onResult(result);
    } catch (err) {
      if (err instanceof ArtifactError) {
        safeError(config, { error: `artifact_${err.code}`, detail: err.message });
      } else {
        safeError(config, { error: "estimate_failed", detail: String(err) });
      }
    }
    return;
  }
  if (!config.endpoint) {
    safeError(config, { error: "endpoint_missing" });
    return;
  }
  const body: EstimateRequestBody = {
    ad_id: config.adId ?? `ad-${Date.now().toString(36)}`,
    parameters: collected.parameters,
    tag_version: TAG_VERSION,
  };
  if (config.deviceProfile) {
    body.device_profile = config.deviceProfile;
  }
  const options: BeaconOptions = {
    fetchFn: config.fetchFn,
    fireAndForget: config.fireAndForget,
    onResult: config.onResult,
    onError: config.onError,
  };
  void beacon(config.endpoint, body, options);
}

export function init(config: InitConfig): void {
  try {
    const win = (config.windowRef ?? (globalThis as any).window ?? {}) as NonNullable<
      InitConfig["windowRef"]
    >;
    const delay = config.settleDelayMs ?? 0;
    const schedule = () => {
      const timer = win.setTimeout ?? globalThis.setTimeout;
      if (delay > 0 && typeof timer === "function") {
        timer(() => run(config, win), delay);
      } else {
        run(config, win);
      }
    };
    const readyState = win.document?.readyState;
    if (readyState === "complete" || typeof win.addEventListener !== "function") {
      schedule();
    } else {
      win.addEventListener("load", schedule);
    }
  } catch (err) {
    safeError(config, { error: "init_failed", detail: String(err) });
  }
}

export { parseArtifact, ArtifactError } from "./artifact";
export { evaluateEstimate, labelFor, estimateLocal, MissingParameterError } from "./model";
export { collectParameters, PARAMETER_NAMES } from "./collect";
export { beacon } from "./beacon";
export type { ParsedArtifact, Grade } from "./artifact";
export type { CollectedParameters, WindowLike, PerformanceEntryLike } from "./collect";
export type { EstimateRequestBody, EstimateResponseBody } from "./beacon";
export type { LocalEstimate } from "./model";
