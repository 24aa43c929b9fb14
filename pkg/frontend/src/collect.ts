/**
 * Parameter collection from the browser's performance facilities.
 *
 * Every registry field is always present in the result; anything the
 * browser cannot provide is reported as 0 and noted in the capability
 * flag list. Collection never throws.
 */

export interface PerformanceEntryLike {
  entryType?: string;
  duration?: number;
  initiatorType?: string;
  transferSize?: number;
  decodedBodySize?: number;
  redirectStart?: number;
  redirectEnd?: number;
  fetchStart?: number;
  domainLookupStart?: number;
  domainLookupEnd?: number;
  connectStart?: number;
  connectEnd?: number;
  requestStart?: number;
  responseStart?: number;
  responseEnd?: number;
  domComplete?: number;
  loadEventStart?: number;
  loadEventEnd?: number;
}

export interface WindowLike {
  performance?: {
    getEntries?: () => PerformanceEntryLike[];
    memory?: { usedJSHeapSize?: number; totalJSHeapSize?: number };
  };
  screen?: { width?: number; height?: number };
}

export interface CollectedParameters {
  parameters: Record<string, number>;
  missingCapabilities: string[];
}

const ENTRY_TYPES = [
  "element",
  "navigation",
  "resource",
  "mark",
  "measure",
  "paint",
  "longtask",
];

const INITIATOR_TYPES = [
  "element",
  "css",
  "embed",
  "img",
  "link",
  "object",
  "script",
  "subdocument",
  "svg",
  "xmlhttprequest",
  "navigation",
];

export const PARAMETER_NAMES = [
  "usedJSHeapSize",
  "totalJSHeapSize",
  "entries",
  "entries_requested",
  "screen_size",
  ...ENTRY_TYPES.map((t) => `et_${t}`),
  ...INITIATOR_TYPES.map((t) => `it_${t}`),
  "it_other",
  "duration_mean",
  "transferSize_mean",
  "dedodedBodySize_mean",
  "redirectTime_mean",
  "app_cache_mean",
  "dns_mean",
  "tcp_mean",
  "request_mean",
  "response_mean",
  "ad_navigation_duration",
  "ad_navigation_transferSize",
  "ad_navigation_decodedBodySize",
  "ad_navigation_app_cache",
  "ad_navigation_dns",
  "ad_navigation_tcp",
  "ad_navigation_request",
  "ad_navigation_response",
  "ad_navigation_processing",
  "ad_navigation_onLoad",
];

function clamp(value: unknown): number {
  return typeof value === "number" && Number.isFinite(value) && value > 0 ? value : 0;
}

function span(end: unknown, start: unknown): number | undefined {
  if (typeof end !== "number" || typeof start !== "number") return undefined;
  return clamp(end - start);
}

class Mean {
  private sum = 0;
  private count = 0;
  add(value: number | undefined) {
    if (value !== undefined) {
      this.sum += value;
      this.count += 1;
    }
  }
  value(): number {
    return this.count === 0 ? 0 : this.sum / this.count;
  }
}

export function collectParameters(win: WindowLike): CollectedParameters {
  const parameters: Record<string, number> = {};
  for (const name of PARAMETER_NAMES) {
    parameters[name] = 0;
  }
  const missing: string[] = [];

  const screen = win.screen;
  if (screen && typeof screen.width === "number" && typeof screen.height === "number") {
    parameters["screen_size"] = clamp(screen.width * screen.height);
  } else {
    missing.push("screen");
  }

  const performance = win.performance;
  const memory = performance && performance.memory;
  if (memory) {
    parameters["usedJSHeapSize"] = clamp(memory.usedJSHeapSize);
    parameters["totalJSHeapSize"] = clamp(memory.totalJSHeapSize);
  } else {
    missing.push("memory");
  }

  if (!performance || typeof performance.getEntries !== "function") {
    missing.push("performance");
    return { parameters, missingCapabilities: missing };
  }

  let entries: PerformanceEntryLike[];
  try {
    entries = performance.getEntries() || [];
  } catch {
    missing.push("performance");
    return { parameters, missingCapabilities: missing };
  }

  const duration = new Mean();
  const transferSize = new Mean();
  const decodedBodySize = new Mean();
  const redirect = new Mean();
  const appCache = new Mean();
  const dns = new Mean();
  const tcp = new Mean();
  const request = new Mean();
  const response = new Mean();
  let navigation: PerformanceEntryLike | undefined;

  for (const entry of entries) {
    parameters["entries"] += 1;
    if (typeof entry.duration === "number" && entry.duration > 0) {
      parameters["entries_requested"] += 1;
    }
    const entryType = entry.entryType;
    if (entryType && ENTRY_TYPES.includes(entryType)) {
      parameters[`et_${entryType}`] += 1;
    }
    const initiator = entry.initiatorType;
    if (initiator) {
      if (INITIATOR_TYPES.includes(initiator)) {
        parameters[`it_${initiator}`] += 1;
      } else {
        parameters["it_other"] += 1;
      }
    }
    if (typeof entry.duration === "number") duration.add(clamp(entry.duration));
    if (typeof entry.transferSize === "number") transferSize.add(clamp(entry.transferSize));
    if (typeof entry.decodedBodySize === "number") {
      decodedBodySize.add(clamp(entry.decodedBodySize));
    }
    redirect.add(span(entry.redirectEnd, entry.redirectStart));
    appCache.add(span(entry.domainLookupStart, entry.fetchStart));
    dns.add(span(entry.domainLookupEnd, entry.domainLookupStart));
    tcp.add(span(entry.connectEnd, entry.connectStart));
    request.add(span(entry.responseStart, entry.requestStart));
    response.add(span(entry.responseEnd, entry.responseStart));
    if (!navigation && entryType === "navigation") {
      navigation = entry;
    }
  }

  parameters["duration_mean"] = duration.value();
  parameters["transferSize_mean"] = transferSize.value();
  parameters["dedodedBodySize_mean"] = decodedBodySize.value();
  parameters["redirectTime_mean"] = redirect.value();
  parameters["app_cache_mean"] = appCache.value();
  parameters["dns_mean"] = dns.value();
  parameters["tcp_mean"] = tcp.value();
  parameters["request_mean"] = request.value();
  parameters["response_mean"] = response.value();

  if (navigation) {
    parameters["ad_navigation_duration"] = clamp(navigation.duration);
    parameters["ad_navigation_transferSize"] = clamp(navigation.transferSize);
    parameters["ad_navigation_decodedBodySize"] = clamp(navigation.decodedBodySize);
    parameters["ad_navigation_app_cache"] =
      span(navigation.domainLookupStart, navigation.fetchStart) ?? 0;
    parameters["ad_navigation_dns"] =
      span(navigation.domainLookupEnd, navigation.domainLookupStart) ?? 0;
    parameters["ad_navigation_tcp"] = span(navigation.connectEnd, navigation.connectStart) ?? 0;
    parameters["ad_navigation_request"] =
      span(navigation.responseStart, navigation.requestStart) ?? 0;
    parameters["ad_navigation_response"] =
      span(navigation.responseEnd, navigation.responseStart) ?? 0;
    parameters["ad_navigation_processing"] =
      span(navigation.domComplete, navigation.responseEnd) ?? 0;
    parameters["ad_navigation_onLoad"] =
      span(navigation.loadEventEnd, navigation.loadEventStart) ?? 0;
  } else {
    missing.push("navigation");
  }

  return { parameters, missingCapabilities: missing };
}
