/** Session stream subscription with reconnect and resync. */

import type { ConnectionStatus, StreamEnvelope } from "./types.js";

export interface StreamHandlers {
  onEnvelope: (env: StreamEnvelope) => void;
  onStatus: (status: ConnectionStatus) => void;
  /** Fired when the stream reopens after a drop. Turns published while
   *  we were away are gone, so the caller should refetch the session. */
  onResync: () => void;
}

/** Minimal slice of EventSource the wrapper relies on. */
export interface EventSourceLike {
  addEventListener(type: string, listener: (ev: MessageEvent) => void): void;
  onopen: ((ev: Event) => void) | null;
  onerror: ((ev: Event) => void) | null;
  close(): void;
}

export interface StreamOptions {
  initialDelayMs?: number;
  maxDelayMs?: number;
  makeSource?: (url: string) => EventSourceLike;
  schedule?: (fn: () => void, ms: number) => number;
  cancel?: (handle: number) => void;
}

const EVENT_TYPES = ["frame", "mini_turn", "turn_done"] as const;

/**
 * Subscribe to `/api/sessions/{id}/stream`.
 *
 * Retries with exponential backoff after an error, doubling from
 * `initialDelayMs` up to `maxDelayMs`; a successful open resets the
 * delay. Returns a function that closes the stream for good.
 */
export function connectStream(
  sessionId: string,
  handlers: StreamHandlers,
  opts: StreamOptions = {},
): () => void {
  const initial = opts.initialDelayMs ?? 1000;
  const max = opts.maxDelayMs ?? 30000;
  const makeSource = opts.makeSource ?? ((url: string) => new EventSource(url));
  const schedule = opts.schedule ?? ((fn, ms) => window.setTimeout(fn, ms));
  const cancel = opts.cancel ?? ((handle) => window.clearTimeout(handle));
  const url = `/api/sessions/${sessionId}/stream`;

  let delay = initial;
  let source: EventSourceLike | null = null;
  let timer: number | null = null;
  let closed = false;
  let hadDrop = false;

  const open = () => {
    if (closed) return;
    handlers.onStatus("connecting");
    source = makeSource(url);
    for (const type of EVENT_TYPES) {
      source.addEventListener(type, (ev) => {
        handlers.onEnvelope(JSON.parse(ev.data) as StreamEnvelope);
      });
    }
    source.onopen = () => {
      delay = initial;
      handlers.onStatus("open");
      if (hadDrop) {
        hadDrop = false;
        handlers.onResync();
      }
    };
    source.onerror = () => {
      if (closed) return;
      source?.close();
      source = null;
      hadDrop = true;
      handlers.onStatus("retrying");
      timer = schedule(open, delay);
      delay = Math.min(delay * 2, max);
    };
  };

  open();

  return () => {
    closed = true;
    if (timer !== null) cancel(timer);
    source?.close();
    source = null;
    handlers.onStatus("closed");
  };
}
