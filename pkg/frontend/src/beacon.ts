/**
 * Server-mode transport: POST the collected parameters to the estimation
 * backend. One retry on network failure, then silence; the host page must
 * never see an exception from the tag.
 */

export interface EstimateRequestBody {
  ad_id: string;
  parameters: Record<string, number>;
  tag_version: string;
  device_profile?: string;
}

export interface EstimateResponseBody {
  nEad_estimate: number;
  label: string;
  model_version: string;
  processing_time: number;
}

export interface BeaconOptions {
  fetchFn?: typeof fetch;
  onResult?: (response: EstimateResponseBody) => void;
  onError?: (error: { error: string; field?: string }) => void;
  fireAndForget?: boolean;
}

export async function beacon(
  endpoint: string,
  body: EstimateRequestBody,
  options: BeaconOptions = {}
): Promise<void> {
  const fetchFn = options.fetchFn ?? globalThis.fetch;
  if (typeof fetchFn !== "function") {
    safeCall(options.onError, { error: "fetch_unavailable" });
    return;
  }
  const payload = JSON.stringify(body);
  for (let attempt = 0; attempt < 2; attempt++) {
    let response: Response;
    try {
      response = await fetchFn(endpoint, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: payload,
        keepalive: true,
      });
    } catch {
      continue; // network failure: one retry, then silent drop
    }
    if (options.fireAndForget) {
      return;
    }
    let parsed: any = null;
    try {
      parsed = await response.json();
    } catch {
      parsed = null;
    }
    if (response.ok && parsed) {
      safeCall(options.onResult, parsed as EstimateResponseBody);
    } else {
      safeCall(options.onError, parsed ?? { error: `http_${response.status}` });
    }
    return;
  }
  // both attempts failed at the network level: silent drop by contract
}

function safeCall<T>(callback: ((value: T) => void) | undefined, value: T): void {
  if (!callback) return;
  try {
    callback(value);
  } catch {
    // integrator callbacks must not break the tag either
  }
}
