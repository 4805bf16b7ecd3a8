import type { PredictResponse, SchemaResponse } from "./types.js";

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

/** Thin client over the prediction service endpoints. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  async getSchema(): Promise<SchemaResponse> {
    const res = await this.fetchImpl(`${this.baseUrl}/schema`);
    if (!res.ok) throw new Error(`schema request failed: ${res.status}`);
    return (await res.json()) as SchemaResponse;
  }

  async predict(filled: Record<string, string>): Promise<PredictResponse> {
    const res = await this.fetchImpl(`${this.baseUrl}/predict`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ filled }),
    });
    if (!res.ok) throw new Error(`predict request failed: ${res.status}`);
    return (await res.json()) as PredictResponse;
  }
}
