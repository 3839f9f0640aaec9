/** API client: endpoint shapes, upload headers, typed errors. */

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api";
import { installMockApi } from "./mockApi";

let api: ApiClient;

beforeEach(() => {
  api = new ApiClient();
});

describe("ApiClient", () => {
  it("hits the documented endpoints", async () => {
    const log = installMockApi();
    await api.listModels();
    await api.listTrained();
    await api.generate("m-fixture", { num_measures: 2 }, 5);
    await api.startTrain("model1", "c1", { smoothing_alpha: 0.1 });
    expect(log.requests.map((r) => `${r.method} ${r.path}`)).toEqual([
      "GET /models",
      "GET /trained",
      "POST /trained/m-fixture/generate",
      "POST /models/model1/train",
    ]);
    expect(log.requests[2].body).toEqual({ params: { num_measures: 2 }, seed: 5 });
  });

  it("uploads binary pieces with the filename header", async () => {
    let seen: { headers: Record<string, string>; bodyLength: number } | null = null;
    globalThis.fetch = (async (_input: RequestInfo | URL, init?: RequestInit) => {
      const body = init?.body as Uint8Array;
      seen = { headers: init?.headers as Record<string, string>, bodyLength: body.byteLength };
      return new Response(JSON.stringify({ id: "p1", title: "x", tempo_bpm: 120, length_measures: 1, hash: "h" }), {
        status: 200, headers: { "content-type": "application/json" },
      });
    }) as typeof fetch;
    await api.uploadPiece("c1", "tune.mid", new Uint8Array([1, 2, 3]));
    expect(seen!.headers["x-filename"]).toBe("tune.mid");
    expect(seen!.headers["content-type"]).toBe("audio/midi");
    expect(seen!.bodyLength).toBe(3);
  });

  it("throws ApiError carrying the server's code", async () => {
    globalThis.fetch = (async () =>
      new Response(JSON.stringify({ code: "unknown_corpus", message: "no corpus", detail: {} }), {
        status: 404, headers: { "content-type": "application/json" },
      })) as typeof fetch;
    const failure = await api.corpusDetail("ghost").catch((error) => error);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.code).toBe("unknown_corpus");
    expect(failure.status).toBe(404);
  });

  it("builds stable media URLs", () => {
    expect(api.phraseMidiUrl("p9")).toBe("/phrases/p9.mid");
    expect(api.pieceMidiUrl("c1", "p2")).toBe("/corpora/c1/pieces/p2.mid");
  });
});
