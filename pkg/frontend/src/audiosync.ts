/** Keeps a local phrase player aligned with the streamed playhead.

The server's playhead is authoritative. The local player free-runs at
the streamed articulation rate and is snapped back whenever drift
exceeds the resync threshold, so brief network gaps do not cause a
seek storm.
*/

import type { SnapshotFrame } from "./protocol.js";

export const RESYNC_THRESHOLD_S = 0.25;

export interface PhrasePlayer {
  /** Seconds into the currently loaded phrase. */
  position(): number;
  /** Jump to a phrase at an offset within it. */
  seek(vertex: number, offsetS: number): void;
  /** Playback rate multiplier. */
  setRate(rate: number): void;
}

export class PhraseAudioSync {
  private vertex: number | null = null;
  private resyncs = 0;

  constructor(private readonly player: PhrasePlayer) {}

  get resyncCount(): number {
    return this.resyncs;
  }

  apply(frame: SnapshotFrame): void {
    this.player.setRate(frame.a);
    if (frame.audio_done) return;
    if (frame.vertex !== this.vertex) {
      this.vertex = frame.vertex;
      this.player.seek(frame.vertex, frame.playhead);
      this.resyncs += 1;
      return;
    }
    const drift = Math.abs(this.player.position() - frame.playhead);
    if (drift > RESYNC_THRESHOLD_S) {
      this.player.seek(frame.vertex, frame.playhead);
      this.resyncs += 1;
    }
  }
}
