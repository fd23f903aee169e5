/** Reconnect backoff: doubling delays from half a second, capped. */

export class Backoff {
  private readonly baseMs: number;
  private readonly capMs: number;
  private attempt = 0;

  constructor(baseMs = 500, capMs = 8000) {
    this.baseMs = baseMs;
    this.capMs = capMs;
  }

  /** Delay before the next attempt, advancing the schedule. */
  nextDelayMs(): number {
    const delay = Math.min(this.baseMs * 2 ** this.attempt, this.capMs);
    this.attempt += 1;
    return delay;
  }

  /** Call on a successful connection. */
  reset(): void {
    this.attempt = 0;
  }

  get attempts(): number {
    return this.attempt;
  }
}
