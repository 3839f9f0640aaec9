/** Three-phase single-page shell: Browse, Train, Generate tabs. */

import { ApiClient } from "./api";
import { BrowseView } from "./views/browse";
import { GenerateView } from "./views/generate";
import { TrainView } from "./views/train";

export class App {
  readonly element: HTMLElement;
  readonly browse: BrowseView;
  readonly train: TrainView;
  readonly generate: GenerateView;

  constructor(api: ApiClient = new ApiClient()) {
    this.browse = new BrowseView(api);
    this.train = new TrainView(api);
    this.generate = new GenerateView(api);

    this.element = document.createElement("div");
    this.element.className = "app";
    this.element.innerHTML = `
      <header>
        <h1>phrasegen</h1>
        <nav>
          <button data-tab="browse" class="active">Browse</button>
          <button data-tab="train">Train</button>
          <button data-tab="generate">Generate</button>
        </nav>
      </header>
      <main></main>`;
    const main = this.element.querySelector("main")!;
    main.append(this.browse.element, this.train.element, this.generate.element);

    this.browse.onCorpusChange = (corpusId) => {
      this.train.corpusId = corpusId;
    };
    this.train.onTrained = (modelId) => {
      void this.generate.refresh().then(() => this.generate.selectTrained(modelId));
    };

    this.element.querySelectorAll<HTMLButtonElement>("nav button").forEach((button) => {
      button.addEventListener("click", () => void this.showTab(button.dataset.tab!));
    });
    this.showTab("browse");
  }

  async showTab(tab: string): Promise<void> {
    this.element.querySelectorAll<HTMLButtonElement>("nav button").forEach((button) => {
      button.classList.toggle("active", button.dataset.tab === tab);
    });
    this.browse.element.hidden = tab !== "browse";
    this.train.element.hidden = tab !== "train";
    this.generate.element.hidden = tab !== "generate";
    try {
      if (tab === "browse") await this.browse.refresh();
      if (tab === "train") await this.train.refresh();
      if (tab === "generate") await this.generate.refresh();
    } catch (error) {
      console.error("refresh failed", error);
    }
  }
}
