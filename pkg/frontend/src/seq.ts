/**
 * Guard against out-of-order async responses. Each fetch takes a ticket;
 * only the holder of the newest ticket may apply its result.
 */
export class LatestGate {
  private seq = 0;

  next(): number {
    this.seq += 1;
    return this.seq;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.seq;
  }
}
