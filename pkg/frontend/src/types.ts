/** Wire types mirroring the service API exactly. The UI renders these
 * verbatim and holds no domain logic of its own. */

export interface ParamSpec {
  default: number;
  desc: string;
  display_name: string;
  max: number;
  min: number;
  name: string;
  type: "float" | "int";
}

export interface ModelInfo {
  model_name: string;
  kind: "builtin" | "external";
  train_params: ParamSpec[];
  generate_params: ParamSpec[];
}

export interface CorpusSummary {
  id: string;
  name: string;
  created_at: string;
  modified_at: string;
  piece_count: number;
}

export interface PieceMeta {
  id: string;
  title: string;
  tempo_bpm: number;
  length_measures: number;
  hash: string;
}

export interface CorpusDetail {
  id: string;
  name: string;
  created_at: string;
  modified_at: string;
  pieces: PieceMeta[];
}

export interface JobStatus {
  job_id: string;
  kind: string;
  model_name: string;
  state: "Queued" | "Running" | "Done" | "Failed";
  progress: number;
  error?: ApiErrorBody;
  result_model_id?: string;
}

export interface TrainedSummary {
  model_id: string;
  model_name: string;
  kind: string;
  corpus_id: string;
  trained_at: string;
  stale: boolean | null;
}

export type PartName = "melody" | "bass" | "drums";

export interface NoteJson {
  pitch: number;
  onset_step: number;
  duration_steps: number;
  velocity: number;
  part: PartName;
}

export interface PhraseResponse {
  phrase_id: string;
  model_id: string;
  model_name: string;
  seed: number;
  params: Record<string, number>;
  parts: string[];
  score: number;
  chords: string[];
  warnings: string[];
  tempo_bpm: number;
  notes: NoteJson[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail: unknown;
}
