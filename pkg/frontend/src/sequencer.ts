/** Monotone request sequencing.
 *
 * Every outbound request takes a ticket; a response may render only if its
 * ticket is still the newest one issued, so a slow early response can never
 * overwrite the result of a later request.  Issuing a ticket also aborts the
 * previous in-flight request (at most one outstanding per sequencer).
 */

export class Sequencer {
  private counter = 0;
  private controller: AbortController | null = null;

  next(): { seq: number; signal: AbortSignal } {
    this.controller?.abort();
    this.controller = new AbortController();
    this.counter += 1;
    return { seq: this.counter, signal: this.controller.signal };
  }

  isCurrent(seq: number): boolean {
    return seq === this.counter;
  }

  get issued(): number {
    return this.counter;
  }
}
