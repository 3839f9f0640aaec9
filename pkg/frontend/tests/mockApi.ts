/** Deterministic in-memory stand-in for the service, installed as a fetch
 * stub. Generation is a pure function of (model, seed, params) so replay
 * tests can rely on the same determinism the real server guarantees. */

import type { ModelInfo, NoteJson, PhraseResponse } from "../src/types";

export const MODEL1_MANIFEST: ModelInfo = {
  model_name: "model1",
  kind: "builtin",
  train_params: [
    { default: 0.1, desc: "additive smoothing", display_name: "Smoothing", max: 10, min: 0, name: "smoothing_alpha", type: "float" },
  ],
  generate_params: [
    { default: 0.5, desc: "style vs uniform pitch mixture", display_name: "Melodic Typicality", max: 1, min: 0, name: "melodic_typicality", type: "float" },
    { default: 0.5, desc: "learned vs uniform chord mixture", display_name: "Harmonic Following", max: 1, min: 0, name: "harmonic_following", type: "float" },
    { default: 4, desc: "phrase length in measures", display_name: "Number of Measures", max: 64, min: 1, name: "num_measures", type: "int" },
    { default: 0.5, desc: "target notes per measure", display_name: "Note Density", max: 1, min: 0, name: "note_density", type: "float" },
  ],
};

export const MUSICVAE_MANIFEST: ModelInfo = {
  model_name: "musicvae",
  kind: "external",
  train_params: [],
  generate_params: [
    {
      default: 0,
      desc: "latent vector sampling: 0 random from the corpus set, 1 the mean vector, 2 random over all latent vectors",
      display_name: "Method",
      max: 2,
      min: 0,
      name: "method",
      type: "int",
    },
    {
      default: 0.001,
      desc: "amount of noise added to latent vector",
      display_name: "Noise Amount",
      max: 1,
      min: 0,
      name: "noise_amount",
      type: "float",
    },
    {
      default: 1.0,
      desc: "softmax temperature scaling the randomness of the output",
      display_name: "Temperature",
      max: 2,
      min: 0.01,
      name: "temperature",
      type: "float",
    },
  ],
};

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function deterministicPhrase(seed: number, params: Record<string, number>): PhraseResponse {
  const measures = Math.trunc(params.num_measures ?? 4);
  const rand = mulberry32(seed ^ Math.round((params.note_density ?? 0.5) * 1000));
  const notes: NoteJson[] = [];
  const chords: string[] = [];
  const symbols = ["C", "F", "G", "Am"];
  for (let m = 0; m < measures; m++) {
    chords.push(symbols[Math.floor(rand() * symbols.length)]);
    for (let k = 0; k < 3; k++) {
      notes.push({
        pitch: 60 + Math.floor(rand() * 12),
        onset_step: m * 16 + k * 4,
        duration_steps: 1 + Math.floor(rand() * 4),
        velocity: 96,
        part: "melody",
      });
    }
    notes.push({ pitch: 36 + Math.floor(rand() * 8), onset_step: m * 16, duration_steps: 8, velocity: 96, part: "bass" });
    notes.push({ pitch: 36, onset_step: m * 16, duration_steps: 1, velocity: 96, part: "drums" });
  }
  return {
    phrase_id: `p-${seed}-${measures}`,
    model_id: "m-fixture",
    model_name: "model1",
    seed,
    params,
    parts: ["melody", "bass", "drums"],
    score: -12.5,
    chords,
    warnings: [],
    tempo_bpm: 120,
    notes,
  };
}

export interface MockOptions {
  jobStates?: Array<{ state: string; progress: number; error?: unknown; result_model_id?: string }>;
}

export interface MockLog {
  requests: Array<{ method: string; path: string; body?: unknown }>;
}

export function installMockApi(options: MockOptions = {}): MockLog {
  const log: MockLog = { requests: [] };
  let jobPolls = 0;
  let randomSeedCounter = 1000;

  const handler = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = typeof input === "string" ? input : input.toString();
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    log.requests.push({ method, path, body });

    const json = (data: unknown, status = 200) =>
      new Response(JSON.stringify(data), { status, headers: { "content-type": "application/json" } });

    if (path === "/models") return json([MODEL1_MANIFEST, MUSICVAE_MANIFEST]);
    if (path === "/trained")
      return json([
        { model_id: "m-fixture", model_name: "model1", kind: "builtin", corpus_id: "c1", trained_at: "t0", stale: false },
      ]);
    if (path === "/corpora" && method === "GET") return json([]);
    if (/^\/trained\/[^/]+\/generate$/.test(path) && method === "POST") {
      const seed = body.seed ?? randomSeedCounter++;
      return json(deterministicPhrase(seed, body.params ?? {}));
    }
    if (/^\/models\/[^/]+\/train$/.test(path) && method === "POST") {
      jobPolls = 0;
      return json({ job_id: "j-fixture" });
    }
    if (path.startsWith("/jobs/")) {
      const states = options.jobStates ?? [
        { state: "Running", progress: 0.5 },
        { state: "Done", progress: 1.0, result_model_id: "m-fixture" },
      ];
      const state = states[Math.min(jobPolls, states.length - 1)];
      jobPolls += 1;
      return json({ job_id: "j-fixture", kind: "train", model_name: "model1", ...state });
    }
    return json({ code: "unknown_route", message: `no mock for ${method} ${path}`, detail: {} }, 404);
  };

  globalThis.fetch = handler as typeof fetch;
  return log;
}
