import type { FetchLike } from "../src/api.js";
import type {
  PredictDecision,
  PredictResponse,
  SchemaResponse,
} from "../src/types.js";

/** Schema served by a bundle trained on the planted business-form fixture. */
export function plantedSchemaResponse(): SchemaResponse {
  return {
    bundle_version: "abc123",
    modeled_targets: ["tax_id"],
    schema: {
      fields: [
        { name: "company_name", kind: "textual", required: true, tab_index: 0 },
        { name: "monthly_revenue", kind: "numerical", required: true, tab_index: 1 },
        {
          name: "company_type",
          kind: "categorical",
          required: true,
          tab_index: 2,
          group: "business",
          categories: ["Large enterprise", "SME", "NPO"],
        },
        {
          name: "field_of_activity",
          kind: "categorical",
          required: true,
          tab_index: 3,
          group: "business",
          categories: ["Real estate", "Manufacturing", "Charity", "Education"],
        },
        { name: "tax_id", kind: "textual", required: true, tab_index: 4 },
      ],
      groups: [{ id: "business", members: ["company_type", "field_of_activity"] }],
    },
  };
}

function ruleDecision(filled: Record<string, string>): PredictDecision {
  const relaxed =
    filled["company_type"] === "NPO" &&
    ["Charity", "Education"].includes(filled["field_of_activity"] ?? "");
  return {
    target: "tax_id",
    class: relaxed ? "optional" : "required",
    probability: relaxed ? 0.95 : 0.9,
    endorsed: relaxed,
    final_required: !relaxed,
    latency_ms: 0.4,
  };
}

export interface FakeService {
  fetch: FetchLike;
  requests: { url: string; body?: unknown }[];
  down: boolean;
  /** queue of deferred responders, used to simulate slow answers */
  respondManually: boolean;
  pending: ((response: PredictResponse) => void)[];
}

/** In-memory stand-in for the prediction service, honoring its wire formats. */
export function fakeService(): FakeService {
  const service: FakeService = {
    requests: [],
    down: false,
    respondManually: false,
    pending: [],
    fetch: async (url: string, init?: RequestInit) => {
      if (service.down) throw new TypeError("fetch failed: connection refused");
      const body = init?.body ? JSON.parse(init.body as string) : undefined;
      service.requests.push({ url, body });
      if (url.endsWith("/schema")) {
        return jsonResponse(plantedSchemaResponse());
      }
      if (url.endsWith("/predict")) {
        const filled = (body as { filled: Record<string, string> }).filled;
        if (!service.respondManually) {
          return jsonResponse({
            bundle_version: "abc123",
            decisions: filled["tax_id"] ? [] : [ruleDecision(filled)],
          });
        }
        const deferred = new Promise<PredictResponse>((resolve) => {
          service.pending.push(resolve);
        });
        return jsonResponse(await deferred);
      }
      return new Response("not found", { status: 404 });
    },
  };
  return service;
}

function jsonResponse(payload: unknown): Response {
  return new Response(JSON.stringify(payload), {
    status: 200,
    headers: { "content-type": "application/json" },
  });
}
