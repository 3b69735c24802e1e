/**
 * Wire protocol spoken with the advising service.
 *
 * Every frame is one JSON envelope {type, session, seq, payload}. The server
 * sends session_info, state_update, prompt, ack, and error; the client sends
 * control and submit. A submission must echo the step index of the prompt it
 * answers; anything else is rejected server-side as a stale prompt.
 */

export type Case = Record<string, number | boolean>;

export interface Envelope<T = unknown> {
  type: string;
  session: string;
  seq: number;
  payload: T;
}

export interface SessionInfo {
  session: string;
  environment: string;
  features: [string, string][];
  actions: string[];
  mode: string;
  step: number;
  episode: number;
}

export interface StateUpdate {
  step: number;
  case: Case;
  reward: number;
  episode: number;
  action: string;
  source: string;
  terminal: boolean;
  q_snapshot?: [number, number, number][];
}

export interface DiffEntry {
  feature: string;
  current: number | boolean;
  cornerstone: number | boolean;
}

export interface PromptMessage {
  step: number;
  case: Case;
  intended_action: string;
  source: string;
  cornerstone?: Case;
  diff?: DiffEntry[];
}

export interface ErrorMessage {
  code: string;
  message: string;
}

export type SubmitKind = "approve" | "action" | "rule" | "evaluate";

export interface SubmitPayload {
  step: number;
  kind: SubmitKind;
  action?: string;
  rule_text?: string;
  sign?: 1 | -1;
}

export interface ControlPayload {
  mode: "paused" | "step" | "running" | "stepping";
  rate?: number;
}

export function parseEnvelope(raw: string): Envelope {
  const parsed = JSON.parse(raw);
  if (
    typeof parsed !== "object" ||
    parsed === null ||
    typeof parsed.type !== "string"
  ) {
    throw new Error(`malformed envelope: ${raw}`);
  }
  return parsed as Envelope;
}

/** Stable serialization (sorted keys) so tests can compare frames byte-wise. */
export function encodeFrame(
  type: "control" | "submit",
  seq: number,
  payload: ControlPayload | SubmitPayload,
): string {
  const raw = payload as unknown as Record<string, unknown>;
  const ordered: Record<string, unknown> = {};
  for (const key of Object.keys(raw).sort()) {
    ordered[key] = raw[key];
  }
  return JSON.stringify({ payload: ordered, seq, type });
}
