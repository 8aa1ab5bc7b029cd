/** Wire documents exchanged with the session service.
 *
 * Every shape here mirrors what the server actually sends; the console never
 * computes simulation quantities itself, it only displays numbers that arrive
 * in these documents.
 */

export type Phase = "lesson" | "break";
export type SessionStatus = "paused" | "running" | "finished";

export interface TickLearner {
  Z: number[];
  Z_total: number;
  r: number;
  F: number;
}

export interface TickMessage {
  type: "tick";
  tick: number;
  t_min: number;
  phase: Phase;
  U: number;
  S: number;
  learners: TickLearner[];
}

export type ControlType =
  | "set_requirement"
  | "set_complexity"
  | "start_break"
  | "end_break"
  | "pause"
  | "resume"
  | "give_test"
  | "finish";

/** Control as the console sends it. */
export interface ControlMessage {
  type: ControlType;
  U?: number;
  S?: number;
}

/** Control acknowledgment as the server broadcasts it back. */
export interface ControlEcho {
  type: Exclude<ControlType, "give_test">;
  U?: number;
  S?: number;
  effective_tick: number;
}

export interface ProbeLearner {
  Z_total: number;
  Z_n: number;
}

export interface ProbeMessage {
  type: "probe";
  tick: number;
  t_min: number;
  learners: ProbeLearner[];
}

export interface ScoreMessage {
  type: "score";
  per_learner_final: number[];
  class_mean: number;
  reference_objective: number;
  grade: number;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerDocument =
  | TickMessage
  | ControlEcho
  | ProbeMessage
  | ScoreMessage
  | ErrorMessage;

export interface StateLearner {
  Z: number[];
  Z_total: number;
  r: number;
  P: number;
  r_lesson_start: number;
  t_day: number;
}

/** Response of GET /sessions/{id}. */
export interface StateSnapshot {
  status: SessionStatus;
  tick: number;
  t_min: number;
  phase: Phase;
  U: number;
  S: number;
  duration_min: number;
  tick_min: number;
  dt_min: number;
  clamp_count: number;
  learners: StateLearner[];
}

const CONTROL_TYPES: ReadonlySet<string> = new Set([
  "set_requirement",
  "set_complexity",
  "start_break",
  "end_break",
  "pause",
  "resume",
  "finish",
]);

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

function isFiniteNumber(value: unknown): value is number {
  return typeof value === "number" && Number.isFinite(value);
}

function isNumberArray(value: unknown): value is number[] {
  return Array.isArray(value) && value.every(isFiniteNumber);
}

export function isTickMessage(doc: unknown): doc is TickMessage {
  if (!isRecord(doc) || doc.type !== "tick") return false;
  if (!isFiniteNumber(doc.tick) || !isFiniteNumber(doc.t_min)) return false;
  if (doc.phase !== "lesson" && doc.phase !== "break") return false;
  if (!isFiniteNumber(doc.U) || !isFiniteNumber(doc.S)) return false;
  if (!Array.isArray(doc.learners)) return false;
  return doc.learners.every(
    (l) =>
      isRecord(l) &&
      isNumberArray(l.Z) &&
      isFiniteNumber(l.Z_total) &&
      isFiniteNumber(l.r) &&
      isFiniteNumber(l.F),
  );
}

export function isControlEcho(doc: unknown): doc is ControlEcho {
  if (!isRecord(doc) || typeof doc.type !== "string") return false;
  if (!CONTROL_TYPES.has(doc.type)) return false;
  return isFiniteNumber(doc.effective_tick);
}

export function isProbeMessage(doc: unknown): doc is ProbeMessage {
  if (!isRecord(doc) || doc.type !== "probe") return false;
  if (!isFiniteNumber(doc.tick) || !isFiniteNumber(doc.t_min)) return false;
  if (!Array.isArray(doc.learners)) return false;
  return doc.learners.every(
    (l) => isRecord(l) && isFiniteNumber(l.Z_total) && isFiniteNumber(l.Z_n),
  );
}

export function isScoreMessage(doc: unknown): doc is ScoreMessage {
  if (!isRecord(doc) || doc.type !== "score") return false;
  return (
    isNumberArray(doc.per_learner_final) &&
    isFiniteNumber(doc.class_mean) &&
    isFiniteNumber(doc.reference_objective) &&
    isFiniteNumber(doc.grade)
  );
}

export function isErrorMessage(doc: unknown): doc is ErrorMessage {
  return isRecord(doc) && doc.type === "error" && typeof doc.message === "string";
}

export function isServerDocument(doc: unknown): doc is ServerDocument {
  return (
    isTickMessage(doc) ||
    isControlEcho(doc) ||
    isProbeMessage(doc) ||
    isScoreMessage(doc) ||
    isErrorMessage(doc)
  );
}

/** Parse one websocket frame; throws on anything that is not a known document. */
export function parseServerDocument(raw: string): ServerDocument {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    throw new Error(`not JSON: ${raw.slice(0, 80)}`);
  }
  if (!isServerDocument(doc)) {
    throw new Error(`unrecognized document: ${raw.slice(0, 80)}`);
  }
  return doc;
}

export function isStateSnapshot(doc: unknown): doc is StateSnapshot {
  if (!isRecord(doc)) return false;
  if (doc.status !== "paused" && doc.status !== "running" && doc.status !== "finished") {
    return false;
  }
  if (doc.phase !== "lesson" && doc.phase !== "break") return false;
  for (const key of ["tick", "t_min", "U", "S", "duration_min", "tick_min", "dt_min", "clamp_count"]) {
    if (!isFiniteNumber(doc[key])) return false;
  }
  if (!Array.isArray(doc.learners)) return false;
  return doc.learners.every(
    (l) =>
      isRecord(l) &&
      isNumberArray(l.Z) &&
      isFiniteNumber(l.Z_total) &&
      isFiniteNumber(l.r) &&
      isFiniteNumber(l.P) &&
      isFiniteNumber(l.r_lesson_start) &&
      isFiniteNumber(l.t_day),
  );
}
