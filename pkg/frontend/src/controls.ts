/** Resistance input: slider, optional spring return, keyboard hold.

All paths funnel through a single emit so the caller can throttle and
gate in one place. While disabled (socket closed) every input is
swallowed and the slider springs home.
*/

export interface ControlsOptions {
  /** Per-second rate the level ramps at while a key is held. */
  keyRampPerSec?: number;
  /** Per-second rate the level relaxes at when sprung. */
  springPerSec?: number;
}

export class ResistanceInput {
  springReturn = false;
  private level = 0;
  private enabledValue = true;
  private keyHeld = false;
  private readonly keyRamp: number;
  private readonly spring: number;

  constructor(
    private readonly emit: (r: number) => void,
    opts: ControlsOptions = {},
  ) {
    this.keyRamp = opts.keyRampPerSec ?? 2.0;
    this.spring = opts.springPerSec ?? 4.0;
  }

  get value(): number {
    return this.level;
  }

  get enabled(): boolean {
    return this.enabledValue;
  }

  setEnabled(on: boolean): void {
    this.enabledValue = on;
    if (!on) {
      this.keyHeld = false;
      if (this.level !== 0) {
        this.level = 0;
        // no emit: the socket is gone; the server zeroes input on its own
      }
    }
  }

  /** Direct slider movement. */
  setSlider(r: number): void {
    if (!this.enabledValue) return;
    this.setLevel(Math.min(1, Math.max(0, r)));
  }

  keyPress(): void {
    if (!this.enabledValue) return;
    this.keyHeld = true;
  }

  keyRelease(): void {
    this.keyHeld = false;
  }

  /** Advance ramps; call once per animation frame. */
  tick(dtS: number): void {
    if (!this.enabledValue) return;
    if (this.keyHeld) {
      this.setLevel(Math.min(1, this.level + this.keyRamp * dtS));
    } else if (this.springReturn && this.level > 0) {
      this.setLevel(Math.max(0, this.level - this.spring * dtS));
    }
  }

  private setLevel(r: number): void {
    if (r === this.level) return;
    this.level = r;
    this.emit(r);
  }
}
