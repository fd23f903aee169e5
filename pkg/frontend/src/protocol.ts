/** JSON frame types for the websocket protocol (docs/protocol.md). */

export const PROTOCOL_VERSION = 1;

export interface GraphVertex {
  id: number;
  text: string;
  duration_s: number;
}

export interface GraphPayload {
  start: number;
  vertices: GraphVertex[];
  edges: Array<[number, number]>;
  natural_path: number[];
}

export interface HelloFrame {
  type: "hello";
  v: number;
  role: "controller" | "observer";
  config_id: string;
  dt: number;
  scheme: string;
  f_max: number;
  graph: GraphPayload;
  running: boolean;
}

export interface SnapshotFrame {
  type: "snapshot";
  v: number;
  t: number;
  x: number[];
  x_dot: number[];
  f_ext: number[];
  p: number;
  a: number;
  c: number;
  t_hat_x: number;
  t_hat_a: number;
  em: number;
  vertex: number;
  phrase: string;
  playhead: number;
  progress: number;
  motion_done: boolean;
  audio_done: boolean;
  committed_path: number[];
  clamp: { p: boolean; a: boolean };
}

export interface FinalFrame {
  type: "final";
  v: number;
  am: number | null;
  motion_end_t: number | null;
  audio_end_t: number | null;
  cap_hit: boolean;
  committed_path: number[];
}

export interface ErrorFrame {
  type: "error";
  v: number;
  message: string;
}

export interface ResetDoneFrame {
  type: "reset_done";
  v: number;
}

export type ServerFrame =
  | HelloFrame
  | SnapshotFrame
  | FinalFrame
  | ErrorFrame
  | ResetDoneFrame;

export type ControlFrame =
  | { type: "start"; config?: string }
  | { type: "reset" }
  | { type: "set_resistance"; r: number }
  | { type: "push"; direction: number[]; magnitude: number; duration: number };

const SERVER_TYPES = new Set(["hello", "snapshot", "final", "error", "reset_done"]);

/** Parse one incoming message; null for anything that is not a known frame. */
export function parseServerFrame(raw: string): ServerFrame | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const frame = data as { type?: unknown; v?: unknown };
  if (typeof frame.type !== "string" || !SERVER_TYPES.has(frame.type)) return null;
  if (frame.v !== PROTOCOL_VERSION) return null;
  return data as ServerFrame;
}
