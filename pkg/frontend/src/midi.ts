/** Minimal MIDI file reader for client-side playback of downloaded pieces.
 * Extracts note on/off pairs and the first tempo; everything else is
 * skipped. Only used to feed the synthesizer; nothing displayed in the UI
 * comes through this path. */

export interface PlayableNote {
  pitch: number;
  channel: number;
  velocity: number;
  startSeconds: number;
  durationSeconds: number;
}

export function extractNotes(data: Uint8Array): PlayableNote[] {
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  let pos = 0;

  const u32 = () => {
    const v = view.getUint32(pos);
    pos += 4;
    return v;
  };
  const u16 = () => {
    const v = view.getUint16(pos);
    pos += 2;
    return v;
  };
  const u8 = () => data[pos++];

  if (u32() !== 0x4d546864) throw new Error("not a MIDI file");
  const headerLength = u32();
  const format = u16();
  const trackCount = u16();
  const tpq = u16();
  pos += headerLength - 6;
  if (format === 2 || tpq & 0x8000) throw new Error("unsupported MIDI flavor");

  let usPerQuarter = 500000;
  const notes: PlayableNote[] = [];

  for (let t = 0; t < trackCount && pos + 8 <= data.length; ) {
    const chunkType = u32();
    const chunkLength = u32();
    const end = pos + chunkLength;
    if (chunkType !== 0x4d54726b) {
      pos = end;
      continue;
    }
    t += 1;
    let tick = 0;
    let running = 0;
    const open = new Map<string, { tick: number; velocity: number }[]>();

    const vlq = () => {
      let value = 0;
      for (let i = 0; i < 4; i++) {
        const b = u8();
        value = (value << 7) | (b & 0x7f);
        if (!(b & 0x80)) return value;
      }
      throw new Error("bad delta time");
    };

    while (pos < end) {
      tick += vlq();
      let status = data[pos];
      if (status === 0xff) {
        pos++;
        const metaType = u8();
        const length = vlq();
        if (metaType === 0x51 && length === 3) {
          usPerQuarter = (data[pos] << 16) | (data[pos + 1] << 8) | data[pos + 2];
        }
        pos += length;
        if (metaType === 0x2f) break;
        running = 0;
        continue;
      }
      if (status === 0xf0 || status === 0xf7) {
        pos++;
        pos += vlq();
        running = 0;
        continue;
      }
      if (status & 0x80) {
        pos++;
        running = status;
      } else {
        status = running;
        if (!status) throw new Error("dangling data byte");
      }
      const kind = status & 0xf0;
      const channel = status & 0x0f;
      if (kind === 0xc0 || kind === 0xd0) {
        pos++;
        continue;
      }
      const d1 = u8();
      const d2 = u8();
      const key = `${channel}:${d1}`;
      if (kind === 0x90 && d2 > 0) {
        const queue = open.get(key) ?? [];
        queue.push({ tick, velocity: d2 });
        open.set(key, queue);
      } else if (kind === 0x80 || (kind === 0x90 && d2 === 0)) {
        const started = open.get(key)?.shift();
        if (started) {
          notes.push({
            pitch: d1,
            channel,
            velocity: started.velocity,
            startSeconds: 0, // tick fields resolved below
            durationSeconds: 0,
          });
          // stash ticks on the object; converted after the tempo is known
          (notes[notes.length - 1] as unknown as { _on: number; _off: number })._on = started.tick;
          (notes[notes.length - 1] as unknown as { _on: number; _off: number })._off = tick;
        }
      }
    }
    pos = end;
  }

  const secondsPerTick = usPerQuarter / 1e6 / tpq;
  for (const note of notes) {
    const raw = note as unknown as { _on: number; _off: number };
    note.startSeconds = raw._on * secondsPerTick;
    note.durationSeconds = Math.max(0.05, (raw._off - raw._on) * secondsPerTick);
    delete (note as unknown as Record<string, unknown>)._on;
    delete (note as unknown as Record<string, unknown>)._off;
  }
  notes.sort((a, b) => a.startSeconds - b.startSeconds);
  return notes;
}
