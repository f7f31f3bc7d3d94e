// Telemetry WebSocket with automatic reconnect and exponential backoff.
// The WebSocket constructor is injectable so the policy is testable without
// a browser.

import type { TelemetryFrame } from "./types.js";

export type ConnectionState = "connecting" | "open" | "closed";

export interface SocketLike {
  onopen: (() => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface TelemetrySocketOptions {
  factory?: SocketFactory;
  scheduleReconnect?: (fn: () => void, delayMs: number) => void;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
}

export class TelemetrySocket {
  onframe: ((frame: TelemetryFrame) => void) | null = null;
  onstate: ((state: ConnectionState) => void) | null = null;

  private socket: SocketLike | null = null;
  private backoffMs: number;
  private stopped = false;
  private readonly factory: SocketFactory;
  private readonly schedule: (fn: () => void, delayMs: number) => void;
  private readonly initialBackoffMs: number;
  private readonly maxBackoffMs: number;

  constructor(readonly url: string, options: TelemetrySocketOptions = {}) {
    this.factory =
      options.factory ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    this.schedule =
      options.scheduleReconnect ?? ((fn, delay) => setTimeout(fn, delay));
    this.initialBackoffMs = options.initialBackoffMs ?? 500;
    this.maxBackoffMs = options.maxBackoffMs ?? 8000;
    this.backoffMs = this.initialBackoffMs;
  }

  connect(): void {
    if (this.stopped) return;
    this.onstate?.("connecting");
    const socket = this.factory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.backoffMs = this.initialBackoffMs; // healthy again
      this.onstate?.("open");
    };
    socket.onmessage = (event) => {
      try {
        this.onframe?.(JSON.parse(event.data) as TelemetryFrame);
      } catch {
        /* ignore malformed frames */
      }
    };
    socket.onerror = () => {
      /* the close handler drives reconnection */
    };
    socket.onclose = () => {
      if (this.socket !== socket) return; // superseded
      this.socket = null;
      this.onstate?.("closed");
      if (!this.stopped) {
        const delay = this.backoffMs;
        this.backoffMs = Math.min(this.backoffMs * 2, this.maxBackoffMs);
        this.schedule(() => this.connect(), delay);
      }
    };
  }

  get currentBackoffMs(): number {
    return this.backoffMs;
  }

  close(): void {
    this.stopped = true;
    this.socket?.close();
    this.socket = null;
  }
}
