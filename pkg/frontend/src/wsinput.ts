// WebSocket input source: consumes the driver's event stream and feeds the
// active session.  On socket loss the UI pauses (trial timers suspend) and a
// reconnect loop runs with a visible banner until the bridge is back.

import { DriverEvent } from "./types.js";

export function parseDriverEvent(data: string): DriverEvent | null {
  let rec: unknown;
  try {
    rec = JSON.parse(data);
  } catch {
    return null;
  }
  if (typeof rec !== "object" || rec === null) {
    return null;
  }
  const r = rec as Record<string, unknown>;
  if (typeof r.t !== "number") {
    return null;
  }
  switch (r.kind) {
    case "move":
      return typeof r.x === "number" && typeof r.y === "number"
        ? { t: r.t, kind: "move", x: r.x, y: r.y }
        : null;
    case "down":
    case "up":
      return r.btn === "L" || r.btn === "R"
        ? { t: r.t, kind: r.kind, btn: r.btn }
        : null;
    case "mode":
      return r.mode === "on" || r.mode === "off"
        ? { t: r.t, kind: "mode", mode: r.mode }
        : null;
    default:
      return null;
  }
}

export type ConnectionState = "connecting" | "connected" | "reconnecting" | "closed";

export interface InputSink {
  onEvent(event: DriverEvent): void;
  onConnection(state: ConnectionState): void;
}

export interface SocketLike {
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  close(): void;
}

export class DriverSocket {
  private socket: SocketLike | null = null;
  private closed = false;
  private retryTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly sink: InputSink,
    private readonly makeSocket: (url: string) => SocketLike =
      (u) => new WebSocket(u) as unknown as SocketLike,
    private readonly retryMs = 1000,
  ) {}

  connect(): void {
    this.closed = false;
    this.open("connecting");
  }

  close(): void {
    this.closed = true;
    if (this.retryTimer !== null) {
      clearTimeout(this.retryTimer);
      this.retryTimer = null;
    }
    this.socket?.close();
    this.sink.onConnection("closed");
  }

  private open(state: ConnectionState): void {
    this.sink.onConnection(state);
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => this.sink.onConnection("connected");
    socket.onmessage = (ev) => {
      const event = parseDriverEvent(String(ev.data));
      if (event) {
        this.sink.onEvent(event);
      }
    };
    socket.onclose = () => {
      if (this.closed) {
        return;
      }
      // Pause + banner, then retry until the bridge is back.
      this.retryTimer = setTimeout(() => this.open("reconnecting"), this.retryMs);
      this.sink.onConnection("reconnecting");
    };
  }
}
