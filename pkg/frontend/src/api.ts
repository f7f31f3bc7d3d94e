// Typed HTTP client for the control service. All writes go through the
// server, which owns clamping and unit conversion; the dashboard never
// converts units itself.

import type {
  GainsResponse,
  ReferenceResponse,
  StateSnapshot,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const body = await response.json();
      detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(response.status, detail);
  }
  return response.json() as Promise<T>;
}

export class ApiClient {
  constructor(readonly base: string = "") {}

  getState(): Promise<StateSnapshot> {
    return request<StateSnapshot>(`${this.base}/state`);
  }

  setReference(
    joint: number,
    body: { counts: number } | { si: number },
  ): Promise<ReferenceResponse> {
    return request<ReferenceResponse>(`${this.base}/joints/${joint}/reference`, {
      method: "POST",
      body: JSON.stringify(body),
    });
  }

  setGains(
    joint: number,
    gains: { kp: number; ki: number; kd: number },
  ): Promise<GainsResponse> {
    return request<GainsResponse>(`${this.base}/joints/${joint}/gains`, {
      method: "POST",
      body: JSON.stringify(gains),
    });
  }

  home(): Promise<unknown> {
    return request(`${this.base}/home`, { method: "POST", body: "{}" });
  }

  estop(): Promise<unknown> {
    return request(`${this.base}/estop`, { method: "POST", body: "{}" });
  }

  getRegisters(): Promise<{ base_address: number; words: number[]; dump: string[] }> {
    return request(`${this.base}/registers`);
  }
}
