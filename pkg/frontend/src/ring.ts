// Fixed-capacity ring buffer for the sliding telemetry window.

export class RingBuffer<T> {
  private buf: (T | undefined)[];
  private head = 0; // next write slot
  private count = 0;

  constructor(readonly capacity: number) {
    if (capacity <= 0) throw new Error("capacity must be positive");
    this.buf = new Array(capacity);
  }

  get length(): number {
    return this.count;
  }

  push(item: T): void {
    this.buf[this.head] = item;
    this.head = (this.head + 1) % this.capacity;
    if (this.count < this.capacity) this.count++;
  }

  /** Oldest-to-newest snapshot. */
  toArray(): T[] {
    const out: T[] = [];
    const start = (this.head - this.count + this.capacity) % this.capacity;
    for (let i = 0; i < this.count; i++) {
      out.push(this.buf[(start + i) % this.capacity] as T);
    }
    return out;
  }

  last(): T | undefined {
    if (this.count === 0) return undefined;
    return this.buf[(this.head - 1 + this.capacity) % this.capacity] as T;
  }

  clear(): void {
    this.head = 0;
    this.count = 0;
    this.buf = new Array(this.capacity);
  }
}
