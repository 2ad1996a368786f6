import { parseWireMessage, type WireMessage } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

// Thin WebSocket wrapper: reconnects with backoff, queues sends while the
// socket is down, and hands every inbound frame to one callback.
export class SocketLink {
  private ws: WebSocket | null = null;
  private attempts = 0;
  private queue: string[] = [];
  private closedByUs = false;

  onMessage: (message: WireMessage) => void = () => {};
  onStatus: (status: ConnectionStatus) => void = () => {};

  constructor(private url: string) {}

  connect(): void {
    this.closedByUs = false;
    this.onStatus("connecting");
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => {
      this.attempts = 0;
      this.onStatus("open");
      for (const frame of this.queue.splice(0)) {
        this.ws?.send(frame);
      }
    };
    this.ws.onmessage = (event) => {
      let message: WireMessage;
      try {
        message = parseWireMessage(String(event.data));
      } catch {
        return;
      }
      this.onMessage(message);
    };
    this.ws.onclose = () => {
      this.onStatus("closed");
      if (!this.closedByUs) {
        this.reconnect();
      }
    };
  }

  send(message: WireMessage): void {
    const frame = JSON.stringify(message);
    if (this.ws !== null && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(frame);
    } else {
      this.queue.push(frame);
    }
  }

  close(): void {
    this.closedByUs = true;
    this.ws?.close();
  }

  private reconnect(): void {
    const delay = Math.min(500 * 2 ** this.attempts, 15000);
    this.attempts += 1;
    setTimeout(() => {
      this.connect();
    }, delay);
  }
}
