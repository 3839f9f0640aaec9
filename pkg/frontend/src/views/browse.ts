/** Browsing view: corpora list/create, MIDI upload (picker or drag-drop),
 * piece table with play/loop via client-side synthesis. */

import { ApiClient, ApiError } from "../api";
import { extractNotes } from "../midi";
import { Player } from "../player";
import type { CorpusDetail } from "../types";

export class BrowseView {
  readonly element: HTMLElement;
  private corpora: HTMLElement;
  private pieces: HTMLElement;
  private errorBox: HTMLElement;
  private player = new Player();
  private loopingPiece: string | null = null;
  selectedCorpus: string | null = null;
  onCorpusChange?: (corpusId: string | null) => void;

  constructor(private api: ApiClient) {
    this.element = document.createElement("section");
    this.element.className = "view view-browse";
    this.element.innerHTML = `
      <div class="pane pane-corpora">
        <h2>Corpora</h2>
        <form class="create-corpus">
          <input name="name" placeholder="new corpus name" required>
          <button type="submit">Create</button>
        </form>
        <ul class="corpus-list"></ul>
      </div>
      <div class="pane pane-pieces">
        <h2>Pieces</h2>
        <div class="dropzone">drop .mid files here or
          <label class="picker">browse<input type="file" accept=".mid,.midi" multiple hidden></label>
        </div>
        <div class="error-box" role="alert" hidden></div>
        <table class="piece-table">
          <thead><tr><th>title</th><th>tempo</th><th>measures</th><th></th></tr></thead>
          <tbody></tbody>
        </table>
      </div>`;
    this.corpora = this.element.querySelector(".corpus-list")!;
    this.pieces = this.element.querySelector(".piece-table tbody")!;
    this.errorBox = this.element.querySelector(".error-box")!;

    const form = this.element.querySelector<HTMLFormElement>(".create-corpus")!;
    form.addEventListener("submit", async (event) => {
      event.preventDefault();
      const input = form.elements.namedItem("name") as HTMLInputElement;
      await this.guard(async () => {
        const corpus = await this.api.createCorpus(input.value);
        input.value = "";
        this.selectedCorpus = corpus.id;
        this.onCorpusChange?.(corpus.id);
        await this.refresh();
      });
    });

    const fileInput = this.element.querySelector<HTMLInputElement>("input[type=file]")!;
    fileInput.addEventListener("change", () => {
      if (fileInput.files) void this.uploadFiles(fileInput.files);
      fileInput.value = "";
    });
    const dropzone = this.element.querySelector<HTMLElement>(".dropzone")!;
    dropzone.addEventListener("dragover", (event) => {
      event.preventDefault();
      dropzone.classList.add("armed");
    });
    dropzone.addEventListener("dragleave", () => dropzone.classList.remove("armed"));
    dropzone.addEventListener("drop", (event) => {
      event.preventDefault();
      dropzone.classList.remove("armed");
      if (event.dataTransfer?.files) void this.uploadFiles(event.dataTransfer.files);
    });
  }

  private async guard(work: () => Promise<void>): Promise<void> {
    this.errorBox.hidden = true;
    try {
      await work();
    } catch (error) {
      this.errorBox.hidden = false;
      this.errorBox.textContent =
        error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
    }
  }

  private async uploadFiles(files: FileList): Promise<void> {
    if (!this.selectedCorpus) {
      this.errorBox.hidden = false;
      this.errorBox.textContent = "create or select a corpus first";
      return;
    }
    for (const file of Array.from(files)) {
      await this.guard(async () => {
        await this.api.uploadPiece(this.selectedCorpus!, file.name, await file.arrayBuffer());
      });
    }
    await this.refresh();
  }

  async refresh(): Promise<void> {
    const summaries = await this.api.listCorpora();
    this.corpora.textContent = "";
    for (const summary of summaries) {
      const item = document.createElement("li");
      item.dataset.id = summary.id;
      item.classList.toggle("selected", summary.id === this.selectedCorpus);
      item.innerHTML = `<span class="name"></span> <span class="count"></span>`;
      item.querySelector(".name")!.textContent = summary.name;
      item.querySelector(".count")!.textContent = `${summary.piece_count} pieces`;
      item.addEventListener("click", () => {
        this.selectedCorpus = summary.id;
        this.onCorpusChange?.(summary.id);
        void this.refresh();
      });
      this.corpora.appendChild(item);
    }
    if (!this.selectedCorpus && summaries.length) {
      this.selectedCorpus = summaries[0].id;
      this.onCorpusChange?.(this.selectedCorpus);
    }
    await this.renderPieces();
  }

  private async renderPieces(): Promise<void> {
    this.pieces.textContent = "";
    if (!this.selectedCorpus) return;
    let detail: CorpusDetail;
    try {
      detail = await this.api.corpusDetail(this.selectedCorpus);
    } catch {
      this.selectedCorpus = null;
      return;
    }
    for (const piece of detail.pieces) {
      const row = document.createElement("tr");
      row.dataset.id = piece.id;
      row.innerHTML = `
        <td class="title"></td><td class="tempo"></td><td class="measures"></td>
        <td class="actions">
          <button class="play">play</button>
          <button class="loop">loop</button>
          <button class="remove">remove</button>
        </td>`;
      row.querySelector(".title")!.textContent = piece.title;
      row.querySelector(".tempo")!.textContent = piece.tempo_bpm.toFixed(0);
      row.querySelector(".measures")!.textContent = String(piece.length_measures);
      row.querySelector(".play")!.addEventListener("click", () => void this.play(piece.id, false));
      row.querySelector(".loop")!.addEventListener("click", (event) => {
        const button = event.currentTarget as HTMLButtonElement;
        if (this.loopingPiece === piece.id) {
          this.player.stop();
          this.loopingPiece = null;
          button.classList.remove("active");
        } else {
          void this.play(piece.id, true);
          this.loopingPiece = piece.id;
          button.classList.add("active");
        }
      });
      row.querySelector(".remove")!.addEventListener("click", () =>
        this.guard(async () => {
          await this.api.deletePiece(this.selectedCorpus!, piece.id);
          await this.refresh();
        }),
      );
      this.pieces.appendChild(row);
    }
  }

  private async play(pieceId: string, loop: boolean): Promise<void> {
    await this.guard(async () => {
      const bytes = await this.api.pieceMidiBytes(this.selectedCorpus!, pieceId);
      this.player.playNotes(extractNotes(bytes), loop);
    });
  }
}
