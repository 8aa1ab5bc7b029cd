import { describe, expect, it } from "vitest";

import {
  isControlEcho,
  isErrorMessage,
  isProbeMessage,
  isScoreMessage,
  isServerDocument,
  isStateSnapshot,
  isTickMessage,
  parseServerDocument,
} from "../src/protocol.js";

// Shapes copied verbatim from what the service sends.
const TICK = {
  type: "tick",
  tick: 3,
  t_min: 3.0,
  phase: "lesson",
  U: 6.0,
  S: 0.2,
  learners: [{ Z: [0.41, 0.02], Z_total: 0.43, r: 0.93, F: 5.57 }],
};

const ECHO = { type: "set_requirement", U: 8.0, effective_tick: 4 };

const PROBE = {
  type: "probe",
  tick: 5,
  t_min: 5.0,
  learners: [{ Z_total: 0.4, Z_n: 0.02 }],
};

const SCORE = {
  type: "score",
  per_learner_final: [0.8, 0.75],
  class_mean: 0.775,
  reference_objective: 0.9,
  grade: 0.861,
};

const ERROR = { type: "error", message: "unknown control 'zap'" };

const SNAPSHOT = {
  status: "paused",
  tick: 0,
  t_min: 0.0,
  phase: "lesson",
  U: 6.0,
  S: 0.2,
  duration_min: 25.0,
  tick_min: 1.0,
  dt_min: 0.1,
  clamp_count: 0,
  learners: [
    { Z: [0.0], Z_total: 0.0, r: 1.0, P: 0.0, r_lesson_start: 1.0, t_day: 0.0 },
  ],
};

describe("document guards", () => {
  it("accept the documents the service emits", () => {
    expect(isTickMessage(TICK)).toBe(true);
    expect(isControlEcho(ECHO)).toBe(true);
    expect(isProbeMessage(PROBE)).toBe(true);
    expect(isScoreMessage(SCORE)).toBe(true);
    expect(isErrorMessage(ERROR)).toBe(true);
    for (const doc of [TICK, ECHO, PROBE, SCORE, ERROR]) {
      expect(isServerDocument(doc)).toBe(true);
    }
  });

  it("do not cross-match", () => {
    expect(isTickMessage(PROBE)).toBe(false);
    expect(isProbeMessage(TICK)).toBe(false);
    expect(isScoreMessage(ERROR)).toBe(false);
    expect(isControlEcho(TICK)).toBe(false);
    expect(isErrorMessage(SCORE)).toBe(false);
  });

  it("reject structural damage", () => {
    expect(isTickMessage({ ...TICK, U: "6" })).toBe(false);
    expect(isTickMessage({ ...TICK, phase: "nap" })).toBe(false);
    expect(isTickMessage({ ...TICK, learners: [{ Z: [0.1], r: 1.0 }] })).toBe(false);
    expect(isControlEcho({ type: "set_requirement", U: 8.0 })).toBe(false);
    expect(isControlEcho({ type: "give_test", effective_tick: 2 })).toBe(false);
    expect(isScoreMessage({ ...SCORE, per_learner_final: [0.8, null] })).toBe(false);
    expect(isServerDocument({ type: "telemetry" })).toBe(false);
    expect(isServerDocument(null)).toBe(false);
    expect(isServerDocument([TICK])).toBe(false);
  });

  it("every control echo type the server can broadcast is accepted", () => {
    const types = [
      "set_requirement", "set_complexity", "start_break", "end_break",
      "pause", "resume", "finish",
    ];
    for (const type of types) {
      expect(isControlEcho({ type, effective_tick: 7 })).toBe(true);
    }
  });
});

describe("parseServerDocument", () => {
  it("round-trips each document kind", () => {
    for (const doc of [TICK, ECHO, PROBE, SCORE, ERROR]) {
      expect(parseServerDocument(JSON.stringify(doc))).toEqual(doc);
    }
  });

  it("throws on non-JSON frames", () => {
    expect(() => parseServerDocument("not json at all")).toThrow(/not JSON/);
  });

  it("throws on JSON that is no known document", () => {
    expect(() => parseServerDocument('{"type":"mystery"}')).toThrow(/unrecognized/);
    expect(() => parseServerDocument("42")).toThrow(/unrecognized/);
  });
});

describe("state snapshot guard", () => {
  it("accepts the GET state shape", () => {
    expect(isStateSnapshot(SNAPSHOT)).toBe(true);
  });

  it("rejects wrong status or missing numerics", () => {
    expect(isStateSnapshot({ ...SNAPSHOT, status: "idle" })).toBe(false);
    const { clamp_count: _dropped, ...withoutClamp } = SNAPSHOT;
    expect(isStateSnapshot(withoutClamp)).toBe(false);
    expect(
      isStateSnapshot({
        ...SNAPSHOT,
        learners: [{ Z: [0.0], Z_total: 0.0, r: 1.0 }],
      }),
    ).toBe(false);
  });
});
