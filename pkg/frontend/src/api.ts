// Thin typed client for the evaluation service.  The UI performs no
// expected-utility arithmetic: every displayed number is a server response
// string shown byte for byte.

import type {
  EvaluateResponse,
  InlineSpec,
  ModelResponse,
  PolicyTableResponse,
  SweepResponse,
  AxisSpec,
} from "./types";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export class WorkbenchClient {
  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, body?: unknown): Promise<T> {
    const init: RequestInit = body === undefined
      ? {}
      : {
          method: "POST",
          headers: { "Content-Type": "application/json" },
          body: JSON.stringify(body),
        };
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!resp.ok) {
      let detail = `${resp.status}`;
      try {
        const payload = await resp.json();
        detail = payload.detail ?? detail;
      } catch {
        // keep the status text
      }
      throw new ServiceError(resp.status, detail);
    }
    return resp.json() as Promise<T>;
  }

  getModel(): Promise<ModelResponse> {
    return this.request<ModelResponse>("/model");
  }

  evaluate(req: {
    policy: string;
    spec?: string | InlineSpec;
    stage: number;
    asymmetries?: boolean;
  }): Promise<EvaluateResponse> {
    return this.request<EvaluateResponse>("/evaluate", req);
  }

  policyTable(req: {
    spec: string | InlineSpec;
    decision: number;
  }): Promise<PolicyTableResponse> {
    return this.request<PolicyTableResponse>("/policy-table", req);
  }

  sweep(req: {
    spec: string | InlineSpec;
    stage: number;
    decision: number;
    block: Record<string, number>;
    axes: AxisSpec[];
    fixed?: Record<string, string>;
  }): Promise<SweepResponse> {
    return this.request<SweepResponse>("/sweep", req);
  }
}
