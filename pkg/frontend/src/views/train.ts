/** Training view: model picker, auto-rendered training controls, job
 * submission with 1 s polling, progress bar and terminal-state reporting. */

import { ApiClient, ApiError } from "../api";
import { controlValues, renderControls, type RenderedControl } from "../controls";
import type { ModelInfo } from "../types";

const POLL_MS = 1000;

export class TrainView {
  readonly element: HTMLElement;
  private modelSelect: HTMLSelectElement;
  private controlsBox: HTMLElement;
  private trainButton: HTMLButtonElement;
  private progress: HTMLProgressElement;
  private status: HTMLElement;
  private controls: RenderedControl[] = [];
  private models: ModelInfo[] = [];
  private pollTimer: ReturnType<typeof setTimeout> | null = null;
  corpusId: string | null = null;
  onTrained?: (modelId: string) => void;

  constructor(private api: ApiClient) {
    this.element = document.createElement("section");
    this.element.className = "view view-train";
    this.element.innerHTML = `
      <h2>Training</h2>
      <div class="row">
        <label>model <select class="model-pick"></select></label>
        <span class="corpus-label"></span>
      </div>
      <div class="controls train-controls"></div>
      <div class="row">
        <button class="train">Train</button>
        <progress max="1" value="0" hidden></progress>
      </div>
      <div class="status" role="status"></div>`;
    this.modelSelect = this.element.querySelector(".model-pick")!;
    this.controlsBox = this.element.querySelector(".train-controls")!;
    this.trainButton = this.element.querySelector(".train")!;
    this.progress = this.element.querySelector("progress")!;
    this.status = this.element.querySelector(".status")!;

    this.modelSelect.addEventListener("change", () => this.renderParamControls());
    this.trainButton.addEventListener("click", () => void this.startTraining());
  }

  async refresh(): Promise<void> {
    this.models = await this.api.listModels();
    this.modelSelect.textContent = "";
    for (const model of this.models) {
      const option = document.createElement("option");
      option.value = model.model_name;
      option.textContent = `${model.model_name} (${model.kind})`;
      this.modelSelect.appendChild(option);
    }
    this.renderParamControls();
    const label = this.element.querySelector(".corpus-label")!;
    label.textContent = this.corpusId ? `corpus: ${this.corpusId}` : "no corpus selected";
  }

  selectedModel(): ModelInfo | undefined {
    return this.models.find((m) => m.model_name === this.modelSelect.value);
  }

  renderParamControls(): void {
    const model = this.selectedModel();
    this.controls = renderControls(model?.train_params ?? [], this.controlsBox);
  }

  private async startTraining(): Promise<void> {
    const model = this.selectedModel();
    if (!model || !this.corpusId) {
      this.report("select a corpus in the Browse tab first", true);
      return;
    }
    this.trainButton.disabled = true; // mirrors the server's one-job rule
    this.progress.hidden = false;
    this.progress.value = 0;
    this.report("submitting…", false);
    try {
      const { job_id } = await this.api.startTrain(
        model.model_name,
        this.corpusId,
        controlValues(this.controls),
      );
      this.poll(job_id);
    } catch (error) {
      this.finish(error instanceof ApiError ? `${error.code}: ${error.message}` : String(error), true);
    }
  }

  private poll(jobId: string): void {
    const tick = async () => {
      try {
        const job = await this.api.jobStatus(jobId);
        this.progress.value = job.progress;
        if (job.state === "Done") {
          this.finish(`trained: ${job.result_model_id}`, false);
          this.onTrained?.(job.result_model_id!);
          return;
        }
        if (job.state === "Failed") {
          this.finish(`failed: ${job.error?.code ?? "unknown"}`, true);
          return;
        }
        this.report(`${job.state.toLowerCase()}… ${(job.progress * 100).toFixed(0)}%`, false);
        this.pollTimer = setTimeout(() => void tick(), POLL_MS);
      } catch (error) {
        this.finish(String(error), true);
      }
    };
    void tick();
  }

  private report(text: string, isError: boolean): void {
    this.status.textContent = text;
    this.status.classList.toggle("error", isError);
  }

  private finish(text: string, isError: boolean): void {
    this.report(text, isError);
    this.trainButton.disabled = false;
    this.progress.hidden = true;
    if (this.pollTimer !== null) clearTimeout(this.pollTimer);
    this.pollTimer = null;
  }
}
