// Client-side input validation. The server re-validates everything; this
// layer only exists to reject obviously bad input before a round trip.

export const GAIN_WORD_MAX = 65535;
export const COUNT_MAX = 65535;

export type Parsed<T> = { ok: true; value: T } | { ok: false; error: string };

export function parseGainWord(raw: string): Parsed<number> {
  const value = Number(raw.trim());
  if (!Number.isFinite(value) || !Number.isInteger(value)) {
    return { ok: false, error: "gain must be an integer" };
  }
  if (value < 0 || value > GAIN_WORD_MAX) {
    return { ok: false, error: `gain word must be 0..${GAIN_WORD_MAX}` };
  }
  return { ok: true, value };
}

export function parseCounts(raw: string): Parsed<number> {
  const value = Number(raw.trim());
  if (!Number.isFinite(value) || !Number.isInteger(value)) {
    return { ok: false, error: "counts must be an integer" };
  }
  if (value < 0 || value > COUNT_MAX) {
    return { ok: false, error: `counts must be 0..${COUNT_MAX}` };
  }
  return { ok: true, value };
}

export function parseSi(raw: string): Parsed<number> {
  const value = Number(raw.trim());
  if (!Number.isFinite(value)) {
    return { ok: false, error: "SI reference must be a finite number" };
  }
  return { ok: true, value };
}
