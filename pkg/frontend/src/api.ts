// Typed client for the generation service. The console computes no model
// math of its own; everything comes from /labels and /generate.

import { GenerationRequest, GenerationResponse, Labels } from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly field?: string;

  constructor(status: number, code: string, message: string, field?: string) {
    super(message);
    this.status = status;
    this.code = code;
    this.field = field;
  }
}

async function throwFrom(response: Response): Promise<never> {
  let code = "HttpError";
  let message = `${response.status} ${response.statusText}`;
  let field: string | undefined;
  try {
    const body = await response.json();
    if (body && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
      field = body.error.field;
    }
  } catch {
    // non-JSON error body: keep the status line
  }
  throw new ApiError(response.status, code, message, field);
}

export async function fetchLabels(base: string): Promise<Labels> {
  const response = await fetch(`${base}/labels`);
  if (!response.ok) await throwFrom(response);
  return (await response.json()) as Labels;
}

export async function generate(
  base: string,
  request: GenerationRequest,
): Promise<GenerationResponse> {
  const response = await fetch(`${base}/generate`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(request),
  });
  if (!response.ok) await throwFrom(response);
  return (await response.json()) as GenerationResponse;
}
