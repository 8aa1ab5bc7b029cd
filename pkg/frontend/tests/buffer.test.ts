import { describe, expect, it } from "vitest";

import { RollingSeries } from "../src/buffer.js";

describe("RollingSeries", () => {
  it("stores points in push order", () => {
    const s = new RollingSeries();
    s.push(0, 5);
    s.push(1, 6);
    s.push(2.5, 4);
    expect(s.length).toBe(3);
    expect(s.toArray()).toEqual([
      { t: 0, v: 5 },
      { t: 1, v: 6 },
      { t: 2.5, v: 4 },
    ]);
    expect(s.latest).toEqual({ t: 2.5, v: 4 });
    expect(s.at(1)).toEqual({ t: 1, v: 6 });
  });

  it("rejects non-increasing t", () => {
    const s = new RollingSeries();
    s.push(1, 0);
    expect(() => s.push(1, 1)).toThrow(RangeError);
    expect(() => s.push(0.5, 1)).toThrow(RangeError);
    expect(s.length).toBe(1);
  });

  it("drops the oldest points past capacity", () => {
    const s = new RollingSeries(5);
    for (let i = 0; i < 8; i++) s.push(i, i * 10);
    expect(s.length).toBe(5);
    expect(s.at(0)).toEqual({ t: 3, v: 30 });
    expect(s.latest).toEqual({ t: 7, v: 70 });
  });

  it("validates constructor and accessor arguments", () => {
    expect(() => new RollingSeries(0)).toThrow(RangeError);
    expect(() => new RollingSeries(2.5)).toThrow(RangeError);
    const s = new RollingSeries(3);
    expect(() => s.at(0)).toThrow(RangeError);
  });

  describe("sampled", () => {
    it("returns everything when under the budget", () => {
      const s = new RollingSeries();
      for (let i = 0; i < 10; i++) s.push(i, i);
      expect(s.sampled(10)).toHaveLength(10);
      expect(s.sampled(50)).toHaveLength(10);
    });

    it("decimates to at most maxPoints keeping both endpoints", () => {
      const s = new RollingSeries(5000);
      for (let i = 0; i < 1001; i++) s.push(i * 0.5, Math.sin(i));
      const out = s.sampled(100);
      expect(out.length).toBeLessThanOrEqual(100);
      expect(out.length).toBeGreaterThan(50);
      expect(out[0]).toEqual(s.at(0));
      expect(out[out.length - 1]).toEqual(s.latest);
      for (let i = 1; i < out.length; i++) {
        expect(out[i]!.t).toBeGreaterThan(out[i - 1]!.t);
      }
    });

    it("never touches the stored points", () => {
      const s = new RollingSeries();
      for (let i = 0; i < 500; i++) s.push(i, i * i);
      const before = s.toArray();
      const view = s.sampled(20);
      view[0]!.v = -999;
      expect(s.toArray()).toEqual(before);
      expect(s.length).toBe(500);
    });

    it("every sampled point is a stored point, never an interpolation", () => {
      const s = new RollingSeries();
      for (let i = 0; i < 333; i++) s.push(i, Math.cos(i) * 7);
      const stored = new Set(s.toArray().map((p) => `${p.t}:${p.v}`));
      for (const p of s.sampled(40)) {
        expect(stored.has(`${p.t}:${p.v}`)).toBe(true);
      }
    });

    it("rejects budgets that cannot hold both endpoints", () => {
      const s = new RollingSeries();
      s.push(0, 0);
      expect(() => s.sampled(1)).toThrow(RangeError);
    });
  });
});
