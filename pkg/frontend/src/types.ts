// Shared record shapes. Trial and typing records serialize to the exact
// JSONL field names the evaluation CLI ingests.

export type Ability = "normal" | "special";
export type Device = "pointer" | "auxilio";

export interface TrialRecord {
  trial: number;
  w: number;
  cx: number;
  cy: number;
  path: [number, number][];
  t_start: number;
  t_end: number;
  miss_clicks: number;
}

export interface TypingRecord {
  target: string;
  typed: string;
  keystrokes: number;
  t_appear: number;
  t_first_key: number;
  t_enter: number;
}

export interface LevelSpec {
  level: number;
  kind: "homogeneous" | "heterogeneous";
  widths: number[];
  count: number;
}

export interface SessionLog {
  player: string;
  ability: Ability;
  device: Device;
  trials: TrialRecord[];
  typing: TypingRecord[];
}

// Driver output events as streamed over the WebSocket bridge.
export type DriverEvent =
  | { t: number; kind: "move"; x: number; y: number }
  | { t: number; kind: "down" | "up"; btn: "L" | "R" }
  | { t: number; kind: "mode"; mode: "on" | "off" };
