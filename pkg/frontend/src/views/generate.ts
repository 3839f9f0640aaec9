/** Generation view: spec-driven controls, one in-flight generate at a time,
 * piano roll + chord labels of exactly what the API returned, playback,
 * download, and a history panel whose entries replay their stored seed and
 * parameter snapshot (the server's determinism makes replays identical). */

import { ApiClient, ApiError } from "../api";
import { controlValues, renderControls, type RenderedControl } from "../controls";
import { renderPianoRoll } from "../pianoRoll";
import { Player } from "../player";
import type { ModelInfo, PhraseResponse, TrainedSummary } from "../types";

interface HistoryEntry {
  phrase: PhraseResponse;
  params: Record<string, number>;
}

export class GenerateView {
  readonly element: HTMLElement;
  private trainedSelect: HTMLSelectElement;
  private controlsBox: HTMLElement;
  private generateButton: HTMLButtonElement;
  private seedBox: HTMLInputElement;
  private reuseSeed: HTMLInputElement;
  private rollBox: HTMLElement;
  private warningsBox: HTMLElement;
  private historyBox: HTMLElement;
  private downloadLink: HTMLAnchorElement;
  private statusBox: HTMLElement;
  private controls: RenderedControl[] = [];
  private trained: TrainedSummary[] = [];
  private models: ModelInfo[] = [];
  private player = new Player();
  private busy = false;
  history: HistoryEntry[] = [];
  current: PhraseResponse | null = null;

  constructor(private api: ApiClient) {
    this.element = document.createElement("section");
    this.element.className = "view view-generate";
    this.element.innerHTML = `
      <h2>Generation</h2>
      <div class="row">
        <label>trained model <select class="trained-pick"></select></label>
        <label class="seed-row">seed <input class="seed" type="text" inputmode="numeric" placeholder="random"></label>
        <label><input type="checkbox" class="reuse-seed"> reuse seed</label>
        <button class="new-seed" type="button">new seed</button>
      </div>
      <div class="controls generate-controls"></div>
      <div class="row">
        <button class="generate">Generate</button>
        <button class="play" disabled>play</button>
        <button class="stop" disabled>stop</button>
        <a class="download" hidden download>download .mid</a>
      </div>
      <div class="status" role="status"></div>
      <div class="warnings" role="alert" hidden></div>
      <div class="roll-box"></div>
      <div class="history-pane">
        <h3>History</h3>
        <ol class="history"></ol>
      </div>`;
    this.trainedSelect = this.element.querySelector(".trained-pick")!;
    this.controlsBox = this.element.querySelector(".generate-controls")!;
    this.generateButton = this.element.querySelector(".generate")!;
    this.seedBox = this.element.querySelector(".seed")!;
    this.reuseSeed = this.element.querySelector(".reuse-seed")!;
    this.rollBox = this.element.querySelector(".roll-box")!;
    this.warningsBox = this.element.querySelector(".warnings")!;
    this.historyBox = this.element.querySelector(".history")!;
    this.downloadLink = this.element.querySelector(".download")!;
    this.statusBox = this.element.querySelector(".status")!;

    this.trainedSelect.addEventListener("change", () => this.renderParamControls());
    this.generateButton.addEventListener("click", () => void this.generate());
    this.element.querySelector(".new-seed")!.addEventListener("click", () => {
      this.seedBox.value = "";
      this.reuseSeed.checked = false;
    });
    this.element.querySelector(".play")!.addEventListener("click", () => {
      if (this.current) {
        this.player.playPhrase(this.current.notes, this.current.tempo_bpm);
        (this.element.querySelector(".stop") as HTMLButtonElement).disabled = false;
      }
    });
    this.element.querySelector(".stop")!.addEventListener("click", () => this.player.stop());
  }

  async refresh(): Promise<void> {
    [this.trained, this.models] = await Promise.all([
      this.api.listTrained(),
      this.api.listModels(),
    ]);
    this.trainedSelect.textContent = "";
    for (const entry of this.trained) {
      const option = document.createElement("option");
      option.value = entry.model_id;
      option.textContent = `${entry.model_name} · ${entry.model_id}` +
        (entry.stale ? " (stale)" : "");
      this.trainedSelect.appendChild(option);
    }
    this.renderParamControls();
  }

  selectTrained(modelId: string): void {
    this.trainedSelect.value = modelId;
    this.renderParamControls();
  }

  renderParamControls(): void {
    const entry = this.trained.find((t) => t.model_id === this.trainedSelect.value);
    const manifest = this.models.find((m) => m.model_name === entry?.model_name);
    this.controls = renderControls(manifest?.generate_params ?? [], this.controlsBox);
  }

  private parseSeed(): number | undefined {
    const text = this.seedBox.value.trim();
    if (!text) return undefined;
    const value = Number(text);
    return Number.isFinite(value) && value >= 0 ? Math.floor(value) : undefined;
  }

  /** All phrase state changes flow through a server call; the client never
   * mutates notes locally. */
  async generate(paramsOverride?: Record<string, number>, seedOverride?: number): Promise<void> {
    if (this.busy) return;
    const modelId = this.trainedSelect.value;
    if (!modelId) {
      this.report("train a model first", true);
      return;
    }
    this.busy = true;
    this.generateButton.disabled = true;
    this.report("generating…", false);
    try {
      const params = paramsOverride ?? controlValues(this.controls);
      const seed = seedOverride ?? (this.reuseSeed.checked ? this.parseSeed() : undefined);
      const phrase = await this.api.generate(modelId, params, seed);
      this.showPhrase(phrase);
      this.history.unshift({ phrase, params: { ...params } });
      this.renderHistory();
      this.report(`score ${phrase.score.toFixed(3)} · seed ${phrase.seed}`, false);
    } catch (error) {
      this.report(error instanceof ApiError ? `${error.code}: ${error.message}` : String(error), true);
    } finally {
      this.busy = false;
      this.generateButton.disabled = false;
    }
  }

  showPhrase(phrase: PhraseResponse): void {
    this.current = phrase;
    this.seedBox.value = String(phrase.seed); // echoed seed is reusable as-is
    this.rollBox.textContent = "";
    this.rollBox.appendChild(renderPianoRoll(phrase.notes, {
      chords: phrase.chords,
      measures: phrase.chords.length,
    }));
    this.warningsBox.hidden = phrase.warnings.length === 0;
    this.warningsBox.textContent = phrase.warnings.join("; ");
    this.downloadLink.hidden = false;
    this.downloadLink.href = this.api.phraseMidiUrl(phrase.phrase_id);
    this.downloadLink.setAttribute("download", `${phrase.phrase_id}.mid`);
    (this.element.querySelector(".play") as HTMLButtonElement).disabled = false;
  }

  private renderHistory(): void {
    this.historyBox.textContent = "";
    for (const entry of this.history) {
      const item = document.createElement("li");
      item.dataset.phraseId = entry.phrase.phrase_id;
      const paramText = Object.entries(entry.params)
        .map(([k, v]) => `${k}=${v}`)
        .join(" ");
      item.innerHTML = `<button class="replay"></button><span class="snapshot"></span>`;
      item.querySelector(".replay")!.textContent = `replay seed ${entry.phrase.seed}`;
      item.querySelector(".snapshot")!.textContent = paramText;
      item.querySelector(".replay")!.addEventListener("click", () =>
        void this.generate({ ...entry.params }, entry.phrase.seed),
      );
      this.historyBox.appendChild(item);
    }
  }

  private report(text: string, isError: boolean): void {
    this.statusBox.textContent = text;
    this.statusBox.classList.toggle("error", isError);
  }
}
