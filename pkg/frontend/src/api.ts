/** Thin typed client over the service endpoints. Non-2xx responses throw
 * ApiError carrying the server's {code, message, detail} body. */

import type {
  ApiErrorBody,
  CorpusDetail,
  CorpusSummary,
  JobStatus,
  ModelInfo,
  PhraseResponse,
  PieceMeta,
  TrainedSummary,
} from "./types";

export class ApiError extends Error {
  readonly code: string;
  readonly detail: unknown;
  readonly status: number;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message || body.code);
    this.code = body.code;
    this.detail = body.detail;
    this.status = status;
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let body: ApiErrorBody = { code: "http_error", message: response.statusText, detail: {} };
  try {
    body = (await response.json()) as ApiErrorBody;
  } catch {
    // non-JSON error body: keep the fallback
  }
  return new ApiError(response.status, body);
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, init);
    if (!response.ok) throw await parseError(response);
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  private json(body: unknown): RequestInit {
    return {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    };
  }

  listCorpora(): Promise<CorpusSummary[]> {
    return this.request("/corpora");
  }

  createCorpus(name: string): Promise<CorpusDetail> {
    return this.request("/corpora", this.json({ name }));
  }

  corpusDetail(corpusId: string): Promise<CorpusDetail> {
    return this.request(`/corpora/${corpusId}`);
  }

  uploadPiece(corpusId: string, filename: string, data: ArrayBuffer | Uint8Array): Promise<PieceMeta> {
    return this.request(`/corpora/${corpusId}/pieces`, {
      method: "POST",
      headers: { "content-type": "audio/midi", "x-filename": filename },
      body: data as BodyInit,
    });
  }

  deletePiece(corpusId: string, pieceId: string): Promise<void> {
    return this.request(`/corpora/${corpusId}/pieces/${pieceId}`, { method: "DELETE" });
  }

  pieceMidiUrl(corpusId: string, pieceId: string): string {
    return `${this.baseUrl}/corpora/${corpusId}/pieces/${pieceId}.mid`;
  }

  async pieceMidiBytes(corpusId: string, pieceId: string): Promise<Uint8Array> {
    const response = await fetch(this.pieceMidiUrl(corpusId, pieceId));
    if (!response.ok) throw await parseError(response);
    return new Uint8Array(await response.arrayBuffer());
  }

  listModels(): Promise<ModelInfo[]> {
    return this.request("/models");
  }

  startTrain(modelName: string, corpusId: string, params: Record<string, number>, seed?: number): Promise<{ job_id: string }> {
    return this.request(`/models/${modelName}/train`, this.json({ corpus_id: corpusId, params, seed }));
  }

  jobStatus(jobId: string): Promise<JobStatus> {
    return this.request(`/jobs/${jobId}`);
  }

  listTrained(): Promise<TrainedSummary[]> {
    return this.request("/trained");
  }

  generate(modelId: string, params: Record<string, number>, seed?: number, parts?: string[]): Promise<PhraseResponse> {
    return this.request(`/trained/${modelId}/generate`, this.json({ params, seed, parts }));
  }

  phraseMidiUrl(phraseId: string): string {
    return `${this.baseUrl}/phrases/${phraseId}.mid`;
  }

  phraseMeta(phraseId: string): Promise<PhraseResponse> {
    return this.request(`/phrases/${phraseId}.json`);
  }
}
