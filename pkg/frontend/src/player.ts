/** WebAudio synthesis of note lists: oscillators for pitched parts, filtered
 * noise bursts for drums. Avoids any browser MIDI dependency. */

import type { PlayableNote } from "./midi";
import type { NoteJson } from "./types";

export class Player {
  private context: AudioContext | null = null;
  private stopFns: (() => void)[] = [];
  private loopTimer: ReturnType<typeof setTimeout> | null = null;
  playing = false;

  private ensureContext(): AudioContext {
    if (!this.context) {
      const Ctor = window.AudioContext ?? (window as unknown as { webkitAudioContext: typeof AudioContext }).webkitAudioContext;
      this.context = new Ctor();
    }
    return this.context;
  }

  /** Phrase notes from the API, on the sixteenth grid. */
  playPhrase(notes: NoteJson[], tempoBpm: number, loop = false): void {
    const secondsPerStep = 60 / tempoBpm / 4;
    const playable: PlayableNote[] = notes.map((n) => ({
      pitch: n.pitch,
      channel: n.part === "drums" ? 9 : n.part === "bass" ? 1 : 0,
      velocity: n.velocity,
      startSeconds: n.onset_step * secondsPerStep,
      durationSeconds: Math.max(0.05, n.duration_steps * secondsPerStep),
    }));
    this.playNotes(playable, loop);
  }

  playNotes(notes: PlayableNote[], loop = false): void {
    this.stop();
    if (!notes.length) return;
    const context = this.ensureContext();
    void context.resume();
    const t0 = context.currentTime + 0.05;
    let span = 0;
    for (const note of notes) {
      span = Math.max(span, note.startSeconds + note.durationSeconds);
      if (note.channel === 9) this.scheduleDrum(context, t0 + note.startSeconds, note);
      else this.scheduleTone(context, t0 + note.startSeconds, note);
    }
    this.playing = true;
    if (loop) {
      this.loopTimer = setTimeout(() => this.playNotes(notes, true), (span + 0.2) * 1000);
    } else {
      this.loopTimer = setTimeout(() => {
        this.playing = false;
      }, (span + 0.2) * 1000);
    }
  }

  private scheduleTone(context: AudioContext, at: number, note: PlayableNote): void {
    const osc = context.createOscillator();
    osc.type = note.channel === 1 ? "triangle" : "square";
    osc.frequency.value = 440 * Math.pow(2, (note.pitch - 69) / 12);
    const gain = context.createGain();
    const level = 0.12 * (note.velocity / 127);
    gain.gain.setValueAtTime(0, at);
    gain.gain.linearRampToValueAtTime(level, at + 0.01);
    gain.gain.setTargetAtTime(0, at + note.durationSeconds - 0.02, 0.02);
    osc.connect(gain).connect(context.destination);
    osc.start(at);
    osc.stop(at + note.durationSeconds + 0.1);
    this.stopFns.push(() => {
      try {
        osc.stop();
      } catch {
        /* already stopped */
      }
    });
  }

  private scheduleDrum(context: AudioContext, at: number, note: PlayableNote): void {
    const length = Math.floor(context.sampleRate * 0.08);
    const buffer = context.createBuffer(1, length, context.sampleRate);
    const channel = buffer.getChannelData(0);
    for (let i = 0; i < length; i++) channel[i] = (Math.random() * 2 - 1) * (1 - i / length);
    const source = context.createBufferSource();
    source.buffer = buffer;
    const filter = context.createBiquadFilter();
    // crude kit: low pitches thump, high pitches hiss
    filter.type = note.pitch < 40 ? "lowpass" : "highpass";
    filter.frequency.value = note.pitch < 40 ? 220 : 5000;
    const gain = context.createGain();
    gain.gain.value = 0.25 * (note.velocity / 127);
    source.connect(filter).connect(gain).connect(context.destination);
    source.start(at);
    this.stopFns.push(() => {
      try {
        source.stop();
      } catch {
        /* already stopped */
      }
    });
  }

  stop(): void {
    if (this.loopTimer !== null) clearTimeout(this.loopTimer);
    this.loopTimer = null;
    for (const fn of this.stopFns.splice(0)) fn();
    this.playing = false;
  }
}
