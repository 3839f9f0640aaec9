/** SVG piano roll: exactly one rect per note from the API's note list,
 * measure gridlines and a chord label per measure. Purely presentational;
 * the input is rendered as received. */

import type { NoteJson } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";
const STEPS_PER_MEASURE = 16;
const CELL_W = 9;
const CELL_H = 7;
const LABEL_H = 16;

export interface PianoRollOptions {
  measures?: number;
  chords?: string[];
}

export function renderPianoRoll(
  notes: NoteJson[],
  options: PianoRollOptions = {},
): SVGSVGElement {
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.classList.add("piano-roll");

  const lastStep = notes.reduce((end, n) => Math.max(end, n.onset_step + n.duration_steps), 0);
  const measures = options.measures ?? Math.max(1, Math.ceil(lastStep / STEPS_PER_MEASURE));
  const pitches = notes.map((n) => n.pitch);
  const high = pitches.length ? Math.max(...pitches) + 2 : 72;
  const low = pitches.length ? Math.min(...pitches) - 2 : 48;
  const width = measures * STEPS_PER_MEASURE * CELL_W;
  const height = (high - low + 1) * CELL_H + LABEL_H;
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));

  for (let m = 0; m <= measures; m++) {
    const line = document.createElementNS(SVG_NS, "line");
    const x = m * STEPS_PER_MEASURE * CELL_W;
    line.setAttribute("x1", String(x));
    line.setAttribute("x2", String(x));
    line.setAttribute("y1", String(LABEL_H));
    line.setAttribute("y2", String(height));
    line.setAttribute("class", "barline");
    svg.appendChild(line);
  }

  (options.chords ?? []).slice(0, measures).forEach((chord, m) => {
    const text = document.createElementNS(SVG_NS, "text");
    text.setAttribute("x", String(m * STEPS_PER_MEASURE * CELL_W + 3));
    text.setAttribute("y", String(LABEL_H - 4));
    text.setAttribute("class", "chord-label");
    text.textContent = chord;
    svg.appendChild(text);
  });

  for (const note of notes) {
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(note.onset_step * CELL_W));
    rect.setAttribute("y", String(LABEL_H + (high - note.pitch) * CELL_H));
    rect.setAttribute("width", String(Math.max(1, note.duration_steps * CELL_W - 1)));
    rect.setAttribute("height", String(CELL_H - 1));
    rect.setAttribute("class", `note part-${note.part}`);
    rect.dataset.pitch = String(note.pitch);
    rect.dataset.onset = String(note.onset_step);
    rect.dataset.duration = String(note.duration_steps);
    rect.dataset.part = note.part;
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `${note.part} ${note.pitch} @ ${note.onset_step} (+${note.duration_steps})`;
    rect.appendChild(title);
    svg.appendChild(rect);
  }
  return svg;
}
