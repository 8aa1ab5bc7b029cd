/** HTTP and WebSocket access to the session service.
 *
 * Both transports are injectable so tests can drive the console with fakes.
 * The stream tracks the last tick it has seen and reconnects with
 * ?from_tick=last+1, so the server replays exactly the gap and the chart
 * buffers never miss or repeat a tick.
 */

import {
  ControlMessage,
  ScoreMessage,
  ServerDocument,
  StateSnapshot,
  TickMessage,
  isTickMessage,
  parseServerDocument,
} from "./protocol.js";

export interface HttpResponse {
  status: number;
  text(): Promise<string>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<HttpResponse>;

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

function detailOf(text: string): string {
  try {
    const doc = JSON.parse(text);
    if (doc && typeof doc.detail === "string") return doc.detail;
    if (doc && Array.isArray(doc.detail)) return doc.detail.join("; ");
  } catch {
    // fall through to the raw body
  }
  return text;
}

export class SessionApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike,
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<string> {
    const init: Parameters<FetchLike>[1] = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchImpl(this.baseUrl + path, init);
    const text = await res.text();
    if (res.status >= 400) {
      throw new ApiError(res.status, detailOf(text));
    }
    return text;
  }

  async create(config: unknown): Promise<string> {
    const text = await this.request("POST", "/sessions", config);
    const doc = JSON.parse(text);
    if (typeof doc?.id !== "string") {
      throw new Error("create response had no session id");
    }
    return doc.id;
  }

  async state(id: string): Promise<StateSnapshot> {
    const text = await this.request("GET", `/sessions/${id}/state`);
    return JSON.parse(text) as StateSnapshot;
  }

  async control(id: string, msg: ControlMessage): Promise<unknown> {
    const text = await this.request("POST", `/sessions/${id}/control`, msg);
    return JSON.parse(text);
  }

  async advance(id: string, ticks: number): Promise<TickMessage[]> {
    const text = await this.request("POST", `/sessions/${id}/advance`, { ticks });
    return (JSON.parse(text) as { ticks: TickMessage[] }).ticks;
  }

  async finish(id: string): Promise<ScoreMessage> {
    const text = await this.request("POST", `/sessions/${id}/finish`);
    return JSON.parse(text) as ScoreMessage;
  }

  async log(id: string): Promise<string> {
    return this.request("GET", `/sessions/${id}/log`);
  }
}

export interface SocketLike {
  onopen: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onclose: (() => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export type StreamStatus = "connecting" | "live" | "reconnecting" | "closed";

export interface StreamHandlers {
  onDocument(doc: ServerDocument): void;
  onStatus?(status: StreamStatus): void;
  /** A frame arrived that is not a known document. */
  onProtocolError?(error: Error): void;
}

export interface StreamOptions {
  /** Wall milliseconds between reconnect attempts; 0 reconnects synchronously. */
  reconnectDelayMs?: number;
  /** Consecutive failed attempts tolerated before the stream gives up. */
  maxRetries?: number;
}

export class SessionStream {
  status: StreamStatus = "connecting";
  /** Highest tick seen on this stream; -1 before the first one. */
  lastTick = -1;

  private socket: SocketLike | null = null;
  private closedByUser = false;
  private retries = 0;

  constructor(
    private readonly urlFor: (fromTick: number) => string,
    private readonly factory: SocketFactory,
    private readonly handlers: StreamHandlers,
    private readonly options: StreamOptions = {},
  ) {}

  /** Open the socket, replaying history from `fromTick` (0 = everything). */
  connect(fromTick = 0): void {
    this.setStatus(this.lastTick >= 0 ? "reconnecting" : "connecting");
    const socket = this.factory(this.urlFor(fromTick));
    this.socket = socket;
    socket.onopen = () => {
      this.retries = 0;
      this.setStatus("live");
    };
    socket.onmessage = (event) => this.handleFrame(String(event.data));
    socket.onclose = () => {
      if (socket !== this.socket) return; // superseded by a reconnect
      if (this.closedByUser) {
        this.setStatus("closed");
        return;
      }
      this.scheduleReconnect();
    };
  }

  send(control: ControlMessage): void {
    if (this.socket === null || this.status !== "live") {
      throw new Error("stream is not live");
    }
    this.socket.send(JSON.stringify(control));
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
  }

  private handleFrame(raw: string): void {
    let doc: ServerDocument;
    try {
      doc = parseServerDocument(raw);
    } catch (error) {
      this.handlers.onProtocolError?.(error as Error);
      return;
    }
    if (isTickMessage(doc) && doc.tick > this.lastTick) {
      this.lastTick = doc.tick;
    }
    this.handlers.onDocument(doc);
  }

  private scheduleReconnect(): void {
    const maxRetries = this.options.maxRetries ?? 10;
    if (this.retries >= maxRetries) {
      this.setStatus("closed");
      return;
    }
    this.retries += 1;
    this.setStatus("reconnecting");
    const attempt = () => this.connect(this.lastTick + 1);
    const delay = this.options.reconnectDelayMs ?? 1000;
    if (delay <= 0) {
      attempt();
    } else {
      setTimeout(attempt, delay);
    }
  }

  private setStatus(status: StreamStatus): void {
    if (status === this.status) return;
    this.status = status;
    this.handlers.onStatus?.(status);
  }
}

/** Stream URL next to an http(s) base, e.g. ws://host/sessions/ID/stream?from_tick=N. */
export function streamUrl(baseUrl: string, sessionId: string, fromTick: number): string {
  const wsBase = baseUrl.replace(/^http/, "ws");
  return `${wsBase}/sessions/${sessionId}/stream?from_tick=${fromTick}`;
}
