// Thin typed client over the service JSON API. The UI talks to the
// backend exclusively through these calls.

import type {
  GenerateRequest,
  GenerateResponse,
  SampleListEntry,
  SamplePayload,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let code = "unknown_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(private baseUrl: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  async health(): Promise<{ status: string; splits: Record<string, number> }> {
    return this.get("/api/health");
  }

  async listSamples(split: string): Promise<SampleListEntry[]> {
    const body = await this.get<{ samples: SampleListEntry[] }>(
      `/api/samples?split=${encodeURIComponent(split)}`,
    );
    return body.samples;
  }

  async getSample(sampleId: string): Promise<SamplePayload> {
    return this.get(`/api/samples/${encodeURIComponent(sampleId)}`);
  }

  async generate(request: GenerateRequest): Promise<GenerateResponse> {
    const response = await fetch(`${this.baseUrl}/api/generate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as GenerateResponse;
  }
}
