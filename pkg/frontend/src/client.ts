/**
 * Session client: wraps a socket-like transport, feeds inbound messages to
 * the view state, and enforces the submission invariants (every submit
 * echoes the pending prompt's step; nothing is sent once a prompt is stale).
 */

import {
  ControlPayload,
  encodeFrame,
  parseEnvelope,
  SubmitKind,
  SubmitPayload,
} from "./protocol.js";
import { ViewState } from "./viewState.js";

export interface SocketLike {
  send(data: string): void;
  close?(): void;
}

export class SessionClient {
  readonly state = new ViewState();
  readonly sent: string[] = []; // outbound frames, for tests and debugging
  private seq = 0;

  constructor(private socket: SocketLike) {}

  receive(raw: string): void {
    this.state.handle(parseEnvelope(raw));
  }

  connected(): void {
    this.state.setConnected(true);
  }

  disconnected(): void {
    this.state.setConnected(false);
  }

  control(payload: ControlPayload): void {
    this.send("control", payload);
  }

  step(): void {
    this.control({ mode: "step" });
  }

  pause(): void {
    this.control({ mode: "paused" });
  }

  run(rate: number): void {
    this.control({ mode: "running", rate });
  }

  /** True when a prompt is open and submissions are allowed. */
  canSubmit(): boolean {
    return this.state.pendingPrompt !== null && !this.state.promptStale;
  }

  approve(): void {
    this.submit({ kind: "approve" });
  }

  recommendAction(action: string): void {
    this.submit({ kind: "action", action });
  }

  recommendRule(ruleText: string, action: string): void {
    this.submit({ kind: "rule", rule_text: ruleText, action });
  }

  evaluate(sign: 1 | -1): void {
    this.submit({ kind: "evaluate", sign });
  }

  private submit(partial: { kind: SubmitKind } & Partial<SubmitPayload>): void {
    const prompt = this.state.pendingPrompt;
    if (prompt === null || this.state.promptStale) {
      throw new Error("no live prompt to answer");
    }
    const payload: SubmitPayload = { ...partial, step: prompt.step } as SubmitPayload;
    this.send("submit", payload);
    this.state.clearPrompt();
  }

  private send(type: "control" | "submit", payload: ControlPayload | SubmitPayload): void {
    this.seq += 1;
    const frame = encodeFrame(type, this.seq, payload);
    this.sent.push(frame);
    this.socket.send(frame);
  }
}

export function connectWebSocket(url: string): SessionClient {
  const ws = new WebSocket(url);
  const client = new SessionClient({
    send: (data) => ws.send(data),
    close: () => ws.close(),
  });
  ws.onopen = () => client.connected();
  ws.onclose = () => client.disconnected();
  ws.onerror = () => client.disconnected();
  ws.onmessage = (event) => client.receive(String(event.data));
  return client;
}
