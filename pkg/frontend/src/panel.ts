// Per-joint panel state, kept free of DOM concerns so it is testable.
// Rendering (render.ts) projects this model onto elements; telemetry frames
// and operator submissions mutate it.

import { ApiClient, ApiError } from "./api.js";
import { RingBuffer } from "./ring.js";
import {
  FLAG_ESTOPPED,
  FLAG_HOMED,
  FLAG_HOME_SWITCH,
  FLAG_LIMIT,
  type JointSnapshot,
  type TelemetryFrame,
} from "./types.js";
import { parseCounts, parseGainWord, parseSi } from "./validate.js";

export interface SeriesPoint {
  t_ms: number;
  ref: number;
  pos: number;
  deg: number | null;
  rate: number;
}

export interface Lamps {
  homed: boolean;
  homeSwitch: boolean;
  limit: boolean;
  estopped: boolean;
}

export interface SubmitResult {
  ok: boolean;
  message: string | null; // inline warning or error text
}

const WINDOW_SECONDS = 10;
const WORST_CASE_PERIOD_MS = 5; // capacity headroom for fast telemetry

export class JointPanelModel {
  readonly series = new RingBuffer<SeriesPoint>(
    (WINDOW_SECONDS * 1000) / WORST_CASE_PERIOD_MS,
  );
  gains = { kp: 0, ki: 0, kd: 0 };
  calibrated: boolean;
  warning: string | null = null;
  private flags = 0;

  constructor(
    readonly joint: number,
    private readonly api: ApiClient,
  ) {
    this.calibrated = joint >= 1 && joint <= 4;
  }

  /** Rebuild panel state from a full snapshot (page load / reload). */
  restore(snapshot: JointSnapshot): void {
    this.gains = { ...snapshot.gains };
    this.calibrated = snapshot.degrees !== null || this.calibrated;
    this.flags =
      (snapshot.limit_hit ? FLAG_LIMIT : 0) |
      (snapshot.home_switch ? FLAG_HOME_SWITCH : 0) |
      (snapshot.estopped ? FLAG_ESTOPPED : 0) |
      (snapshot.homed ? FLAG_HOMED : 0);
  }

  ingest(frame: TelemetryFrame): void {
    const j = frame.joints[String(this.joint)];
    if (!j) return;
    this.series.push({
      t_ms: frame.t_ms,
      ref: j.ref,
      pos: j.pos,
      deg: j.deg,
      rate: j.rate,
    });
    this.flags = j.flags;
  }

  get lamps(): Lamps {
    return {
      homed: (this.flags & FLAG_HOMED) !== 0,
      homeSwitch: (this.flags & FLAG_HOME_SWITCH) !== 0,
      limit: (this.flags & FLAG_LIMIT) !== 0,
      estopped: (this.flags & FLAG_ESTOPPED) !== 0,
    };
  }

  /** Points inside the sliding window, oldest first. */
  windowedSeries(): SeriesPoint[] {
    const all = this.series.toArray();
    const latest = all[all.length - 1];
    if (!latest) return all;
    const cutoff = latest.t_ms - WINDOW_SECONDS * 1000;
    return all.filter((p) => p.t_ms >= cutoff);
  }

  async submitGains(
    kpRaw: string,
    kiRaw: string,
    kdRaw: string,
  ): Promise<SubmitResult> {
    const parsed = {
      kp: parseGainWord(kpRaw),
      ki: parseGainWord(kiRaw),
      kd: parseGainWord(kdRaw),
    };
    for (const [name, p] of Object.entries(parsed)) {
      if (!p.ok) return { ok: false, message: `${name}: ${p.error}` };
    }
    const words = {
      kp: (parsed.kp as { ok: true; value: number }).value,
      ki: (parsed.ki as { ok: true; value: number }).value,
      kd: (parsed.kd as { ok: true; value: number }).value,
    };
    try {
      const applied = await this.api.setGains(this.joint, words);
      this.gains = { kp: applied.kp, ki: applied.ki, kd: applied.kd };
      return { ok: true, message: null };
    } catch (err) {
      return { ok: false, message: describe(err) };
    }
  }

  async submitReference(
    raw: string,
    unit: "counts" | "si",
  ): Promise<SubmitResult> {
    const parsed = unit === "counts" ? parseCounts(raw) : parseSi(raw);
    if (!parsed.ok) return { ok: false, message: parsed.error };
    if (unit === "si" && !this.calibrated) {
      return {
        ok: false,
        message: `joint ${this.joint} has no SI calibration; use counts`,
      };
    }
    try {
      const body =
        unit === "counts" ? { counts: parsed.value } : { si: parsed.value };
      const applied = await this.api.setReference(this.joint, body);
      this.warning = applied.clamped
        ? `clamped to ${unit === "si" ? applied.applied_si : applied.applied_counts}`
        : null;
      return { ok: true, message: this.warning };
    } catch (err) {
      return { ok: false, message: describe(err) };
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.status}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
