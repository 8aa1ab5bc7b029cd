/** Console state derived purely from server documents.
 *
 * The viewmodel is a reducer: snapshots and stream documents go in, chart
 * buffers and widget state come out. Every number it holds was received from
 * the service; nothing is simulated or extrapolated on this side.
 */

import { RollingSeries } from "./buffer.js";
import {
  ControlEcho,
  ControlMessage,
  ControlType,
  Phase,
  ProbeMessage,
  ScoreMessage,
  ServerDocument,
  SessionStatus,
  StateSnapshot,
  isControlEcho,
  isErrorMessage,
  isProbeMessage,
  isScoreMessage,
  isTickMessage,
} from "./protocol.js";

export type ConnectionStatus = "idle" | "connecting" | "live" | "reconnecting" | "closed";

export interface LearnerTraces {
  total: RollingSeries;
  strong: RollingSeries;
  workability: RollingSeries;
  effort: RollingSeries;
}

/** A control that was sent but has not taken effect on the trace yet. */
export interface PendingControl {
  control: ControlMessage;
  /** Tick it becomes effective at, once the server has echoed it. */
  effectiveTick: number | null;
}

export interface FeedEntry {
  tick: number;
  text: string;
}

const QUEUED_CONTROLS: ReadonlySet<ControlType> = new Set([
  "set_requirement",
  "set_complexity",
  "start_break",
  "end_break",
]);

const FEED_LIMIT = 200;

export class ConsoleViewModel {
  connection: ConnectionStatus = "idle";
  sessionStatus: SessionStatus = "paused";
  phase: Phase = "lesson";
  tick = 0;
  tMin = 0;
  requirement = 0;
  complexity = 0;

  learners: LearnerTraces[] = [];
  requirementTrace: RollingSeries;

  pending = new Map<ControlType, PendingControl>();
  probe: ProbeMessage | null = null;
  score: ScoreMessage | null = null;
  feed: FeedEntry[] = [];
  lastError: string | null = null;

  private lastTraceTick = -1;

  constructor(readonly windowSize: number = 2000) {
    this.requirementTrace = new RollingSeries(windowSize);
  }

  /** Initialize header fields from GET /sessions/{id}. Chart history comes
   * from the stream catch-up, so no points are pushed here. */
  applySnapshot(snapshot: StateSnapshot): void {
    this.sessionStatus = snapshot.status;
    this.phase = snapshot.phase;
    this.tick = snapshot.tick;
    this.tMin = snapshot.t_min;
    this.requirement = snapshot.U;
    this.complexity = snapshot.S;
    this.allocateTraces(snapshot.learners.length);
  }

  setConnection(status: ConnectionStatus): void {
    this.connection = status;
  }

  /** Record a control the UI just sent, so widgets can show it as pending
   * until the echoed effective tick arrives in the trace. */
  noteSent(control: ControlMessage): void {
    if (QUEUED_CONTROLS.has(control.type)) {
      this.pending.set(control.type, { control: { ...control }, effectiveTick: null });
    }
  }

  apply(doc: ServerDocument): void {
    if (isTickMessage(doc)) {
      this.applyTick(doc);
    } else if (isProbeMessage(doc)) {
      this.probe = doc;
      this.pushFeed(doc.tick, `test probe at t=${doc.t_min.toFixed(1)} min`);
    } else if (isScoreMessage(doc)) {
      this.score = doc;
      this.sessionStatus = "finished";
      this.pending.clear();
      this.pushFeed(this.tick, `score: grade ${doc.grade.toFixed(3)}`);
    } else if (isErrorMessage(doc)) {
      this.lastError = doc.message;
      this.pushFeed(this.tick, `error: ${doc.message}`);
    } else if (isControlEcho(doc)) {
      this.applyEcho(doc);
    }
  }

  controlsEnabled(): boolean {
    return this.connection === "live" && this.sessionStatus !== "finished";
  }

  isPending(type: ControlType): boolean {
    return this.pending.has(type);
  }

  private allocateTraces(count: number): void {
    if (this.learners.length === count) return;
    this.learners = Array.from({ length: count }, () => ({
      total: new RollingSeries(this.windowSize),
      strong: new RollingSeries(this.windowSize),
      workability: new RollingSeries(this.windowSize),
      effort: new RollingSeries(this.windowSize),
    }));
    this.requirementTrace = new RollingSeries(this.windowSize);
    this.lastTraceTick = -1;
  }

  private applyTick(doc: { tick: number } & ServerDocument): void {
    if (!isTickMessage(doc)) return;
    if (doc.tick <= this.lastTraceTick) {
      return; // replay overlap after a reconnect; already charted
    }
    if (this.learners.length !== doc.learners.length) {
      this.allocateTraces(doc.learners.length);
    }
    for (let i = 0; i < doc.learners.length; i++) {
      const learner = doc.learners[i]!;
      const traces = this.learners[i]!;
      traces.total.push(doc.t_min, learner.Z_total);
      traces.strong.push(doc.t_min, learner.Z[learner.Z.length - 1] ?? 0);
      traces.workability.push(doc.t_min, learner.r);
      traces.effort.push(doc.t_min, learner.F);
    }
    this.requirementTrace.push(doc.t_min, doc.U);

    this.lastTraceTick = doc.tick;
    this.tick = doc.tick;
    this.tMin = doc.t_min;
    this.phase = doc.phase;
    this.requirement = doc.U;
    this.complexity = doc.S;

    for (const [type, entry] of this.pending) {
      if (entry.effectiveTick !== null && doc.tick >= entry.effectiveTick) {
        this.pending.delete(type);
      }
    }
  }

  private applyEcho(echo: ControlEcho): void {
    switch (echo.type) {
      case "pause":
        this.sessionStatus = "paused";
        break;
      case "resume":
        this.sessionStatus = "running";
        break;
      case "finish":
        this.sessionStatus = "finished";
        this.pending.clear();
        break;
      default: {
        const entry = this.pending.get(echo.type);
        if (entry !== undefined) {
          entry.effectiveTick = echo.effective_tick;
        } else {
          // Echo from another console on the same session; show it as
          // pending so this view also reflects the incoming change.
          this.pending.set(echo.type, {
            control: { type: echo.type, U: echo.U, S: echo.S },
            effectiveTick: echo.effective_tick,
          });
        }
      }
    }
    this.pushFeed(echo.effective_tick, describeEcho(echo));
  }

  private pushFeed(tick: number, text: string): void {
    this.feed.push({ tick, text });
    if (this.feed.length > FEED_LIMIT) {
      this.feed.splice(0, this.feed.length - FEED_LIMIT);
    }
  }
}

function describeEcho(echo: ControlEcho): string {
  switch (echo.type) {
    case "set_requirement":
      return `requirement -> ${echo.U} from tick ${echo.effective_tick}`;
    case "set_complexity":
      return `complexity -> ${echo.S} from tick ${echo.effective_tick}`;
    case "start_break":
      return `break from tick ${echo.effective_tick}`;
    case "end_break":
      return `lesson resumes from tick ${echo.effective_tick}`;
    case "pause":
      return "session paused";
    case "resume":
      return "session resumed";
    case "finish":
      return "session finished";
  }
}
