import { EventEnvelope } from "./types.js";

export type EnvelopeHandler = (envelope: EventEnvelope) => void;

export interface EventFeed {
  /** Deliver events with seq > fromSeq, in order, until close() is called. */
  connect(fromSeq: number, handler: EnvelopeHandler): void;
  close(): void;
}

/**
 * Server-sent-events feed with resume. Reconnects after an error and picks
 * up from the last delivered sequence number, so a subscriber never skips
 * an event (the server replays everything past `from`).
 */
export class SseFeed implements EventFeed {
  private source: EventSource | null = null;
  private lastSeq = 0;
  private closed = false;

  constructor(
    private readonly base: string,
    private readonly project: string,
    private readonly token: string,
  ) {}

  connect(fromSeq: number, handler: EnvelopeHandler): void {
    this.lastSeq = fromSeq;
    this.open(handler);
  }

  private open(handler: EnvelopeHandler): void {
    if (this.closed) return;
    // EventSource cannot set headers; the API accepts ?token= for streams
    const url =
      `${this.base}/p/${this.project}/events` +
      `?from=${this.lastSeq}&token=${encodeURIComponent(this.token)}`;
    this.source = new EventSource(url);
    const deliver = (raw: MessageEvent) => {
      const envelope = JSON.parse(raw.data) as EventEnvelope;
      if (envelope.seq <= this.lastSeq) return; // duplicate after reconnect
      this.lastSeq = envelope.seq;
      handler(envelope);
    };
    for (const kind of [
      "RevisionCommitted",
      "CommentPosted",
      "TagsChanged",
      "SettingsChanged",
    ]) {
      this.source.addEventListener(kind, deliver as EventListener);
    }
    this.source.onerror = () => {
      this.source?.close();
      if (!this.closed) {
        setTimeout(() => this.open(handler), 1000);
      }
    };
  }

  close(): void {
    this.closed = true;
    this.source?.close();
  }
}

/** In-process feed for tests: events are pushed by the fake server. */
export class ManualFeed implements EventFeed {
  private handler: EnvelopeHandler | null = null;
  private lastSeq = 0;
  private backlog: EventEnvelope[] = [];

  connect(fromSeq: number, handler: EnvelopeHandler): void {
    this.lastSeq = fromSeq;
    this.handler = handler;
    for (const envelope of this.backlog) {
      if (envelope.seq > this.lastSeq) {
        this.lastSeq = envelope.seq;
        handler(envelope);
      }
    }
  }

  push(envelope: EventEnvelope): void {
    this.backlog.push(envelope);
    if (this.handler && envelope.seq > this.lastSeq) {
      this.lastSeq = envelope.seq;
      this.handler(envelope);
    }
  }

  close(): void {
    this.handler = null;
  }
}
