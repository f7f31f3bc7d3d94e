// Wire types of the edspid control service.

export interface JointFrame {
  ref: number;
  pos: number;
  deg: number | null; // null for joints without a calibration row (5..6)
  rate: number;
  flags: number;
}

export interface TelemetryFrame {
  t_ms: number;
  joints: Record<string, JointFrame>;
}

export interface JointSnapshot {
  reference: number;
  position: number;
  degrees: number | null;
  error: number;
  gains: { kp: number; ki: number; kd: number };
  enabled: boolean;
  estopped: boolean;
  homed: boolean;
  home_switch: boolean;
  limit_hit: boolean;
}

export interface StateSnapshot {
  sim_time_ms: number;
  homing: boolean;
  joints: Record<string, JointSnapshot>;
}

export interface ReferenceResponse {
  joint: number;
  requested: number;
  applied_counts: number;
  applied_si: number | null;
  clamped: boolean;
  sim_time_ms: number;
}

export interface GainsResponse {
  joint: number;
  kp: number;
  ki: number;
  kd: number;
  sim_time_ms: number;
}

// telemetry flag bits (mirror the service)
export const FLAG_LIMIT = 1 << 0;
export const FLAG_HOME_SWITCH = 1 << 1;
export const FLAG_ESTOPPED = 1 << 2;
export const FLAG_HOMED = 1 << 3;

export const JOINTS = [1, 2, 3, 4, 5, 6] as const;
export const CALIBRATED_JOINTS = [1, 2, 3, 4] as const;
