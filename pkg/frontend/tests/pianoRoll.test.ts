/** Piano roll fidelity: the SVG shows exactly the API's note list. */

import { describe, expect, it } from "vitest";

import { renderPianoRoll } from "../src/pianoRoll";
import type { NoteJson } from "../src/types";
import { deterministicPhrase } from "./mockApi";

const NOTES: NoteJson[] = [
  { pitch: 64, onset_step: 0, duration_steps: 4, velocity: 96, part: "melody" },
  { pitch: 60, onset_step: 4, duration_steps: 2, velocity: 96, part: "melody" },
  { pitch: 40, onset_step: 0, duration_steps: 8, velocity: 96, part: "bass" },
  { pitch: 36, onset_step: 0, duration_steps: 1, velocity: 96, part: "drums" },
  { pitch: 42, onset_step: 8, duration_steps: 1, velocity: 96, part: "drums" },
];

describe("renderPianoRoll", () => {
  it("draws exactly one rect per note with matching attributes", () => {
    const svg = renderPianoRoll(NOTES, { chords: ["C"], measures: 1 });
    const rects = Array.from(svg.querySelectorAll("rect"));
    expect(rects).toHaveLength(NOTES.length);
    const shown = rects.map((rect) => ({
      pitch: Number(rect.getAttribute("data-pitch")),
      onset_step: Number(rect.getAttribute("data-onset")),
      duration_steps: Number(rect.getAttribute("data-duration")),
      velocity: 96,
      part: rect.getAttribute("data-part") as NoteJson["part"],
    }));
    expect(shown).toEqual(NOTES);
  });

  it("labels each measure with its chord", () => {
    const phrase = deterministicPhrase(7, { num_measures: 4 });
    const svg = renderPianoRoll(phrase.notes, { chords: phrase.chords, measures: 4 });
    const labels = Array.from(svg.querySelectorAll("text.chord-label")).map((t) => t.textContent);
    expect(labels).toEqual(phrase.chords);
  });

  it("identical phrases render identical markup (snapshot)", () => {
    const phrase = deterministicPhrase(42, { num_measures: 2 });
    const a = renderPianoRoll(phrase.notes, { chords: phrase.chords, measures: 2 });
    const b = renderPianoRoll(phrase.notes, { chords: phrase.chords, measures: 2 });
    expect(a.outerHTML).toBe(b.outerHTML);
    expect(a.outerHTML).toMatchSnapshot();
  });

  it("copes with an empty note list", () => {
    const svg = renderPianoRoll([], { measures: 2 });
    expect(svg.querySelectorAll("rect")).toHaveLength(0);
    expect(svg.querySelectorAll("line").length).toBeGreaterThan(0);
  });
});
