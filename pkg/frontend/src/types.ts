/** Wire types for the dialogue manager HTTP and stream API. */

export type Policy = "rules" | "model" | "hybrid";

export interface FramePayload {
  intent: string;
  informed: Record<string, string>;
  requested: string[];
}

/**
 * One mini-turn of the trace. `probabilities` is null when a rule
 * fired; `event` is null for model-driven steps, which are not
 * triggered by a named event.
 */
export interface MiniTurnPayload {
  mini_turn_index: number;
  event: string | null;
  activated: string[] | null;
  probabilities: number[] | null;
  action_id: number;
  state_feature: number[];
  response_fragment: string;
}

export interface TurnResultPayload {
  sequence: number[];
  response: string;
  trace: MiniTurnPayload[];
  truncated: boolean;
  context_feature: number[];
}

export interface TurnPayload {
  turn_index: number;
  utterance: string;
  frame: FramePayload;
  result: TurnResultPayload;
}

export interface SessionCreated {
  session_id: string;
  policy: Policy;
  action_names: string[];
  greeting: string;
  turn: TurnPayload;
}

export interface TranscriptEntry {
  speaker: "usr" | "sys";
  text: string;
}

export interface SessionDoc {
  session_id: string;
  policy: Policy;
  transcript: TranscriptEntry[];
  turns: TurnPayload[];
}

export interface ModelInfo {
  loaded: boolean;
  action_names: string[];
  backend: string;
  dims?: { d_ctx: number; d_hidden: number; n_actions: number };
  encoder?: Record<string, unknown>;
}

// Stream messages. The server tags each SSE event with its type and
// repeats the type inside the JSON body, so a consumer can dispatch on
// either one.

export interface FrameEventPayload {
  utterance: string;
  frame: FramePayload;
  context_feature: number[];
}

export interface TurnDonePayload {
  sequence: number[];
  response: string;
  truncated: boolean;
}

export type StreamEnvelope =
  | { session_id: string; turn_index: number; type: "frame"; payload: FrameEventPayload }
  | { session_id: string; turn_index: number; type: "mini_turn"; payload: MiniTurnPayload }
  | { session_id: string; turn_index: number; type: "turn_done"; payload: TurnDonePayload };

export type ConnectionStatus = "connecting" | "open" | "retrying" | "closed";
