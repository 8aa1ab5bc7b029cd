/** Rolling trace storage for chart series. */

export interface TracePoint {
  t: number;
  v: number;
}

/**
 * Fixed-capacity series of (t, v) points with strictly increasing t.
 *
 * Storage is exact: every accepted point is kept until it falls out of the
 * window, and nothing is interpolated. Decimation for drawing happens in
 * `sampled`, which never touches the stored points.
 */
export class RollingSeries {
  private points: TracePoint[] = [];

  constructor(readonly capacity: number = 2000) {
    if (!Number.isInteger(capacity) || capacity < 1) {
      throw new RangeError("capacity must be a positive integer");
    }
  }

  get length(): number {
    return this.points.length;
  }

  get latest(): TracePoint | undefined {
    return this.points[this.points.length - 1];
  }

  push(t: number, v: number): void {
    const last = this.latest;
    if (last !== undefined && t <= last.t) {
      throw new RangeError(`t must increase: got ${t} after ${last.t}`);
    }
    this.points.push({ t, v });
    if (this.points.length > this.capacity) {
      this.points.splice(0, this.points.length - this.capacity);
    }
  }

  at(index: number): TracePoint {
    const p = this.points[index];
    if (p === undefined) {
      throw new RangeError(`index ${index} out of range (length ${this.points.length})`);
    }
    return p;
  }

  toArray(): TracePoint[] {
    return this.points.map((p) => ({ ...p }));
  }

  clear(): void {
    this.points = [];
  }

  /**
   * Evenly strided subset for display, at most `maxPoints` long. The first
   * and the most recent stored points are always included so the visible
   * range and the live value stay truthful.
   */
  sampled(maxPoints: number): TracePoint[] {
    if (!Number.isInteger(maxPoints) || maxPoints < 2) {
      throw new RangeError("maxPoints must be an integer >= 2");
    }
    const n = this.points.length;
    if (n <= maxPoints) {
      return this.toArray();
    }
    const stride = Math.ceil((n - 1) / (maxPoints - 1));
    const out: TracePoint[] = [];
    for (let i = 0; i < n - 1; i += stride) {
      out.push({ ...this.points[i]! });
    }
    out.push({ ...this.points[n - 1]! });
    return out;
  }
}
