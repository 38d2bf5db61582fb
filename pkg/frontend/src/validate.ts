/** Structural validation of a loaded document against the
 * `serpaoi.trial_result@1` contract. Returns a list of problems; an
 * empty list means the document is renderable. The viewer refuses to
 * partially render invalid documents. */

import type { TrialDoc } from "./types.js";

const SCHEMA_TAG = "serpaoi.trial_result@1";
const KNOWN_FLAVORS = new Set(["typed", "typed_gapfill", "organic_hybrid"]);

function isRecord(v: unknown): v is Record<string, unknown> {
  return typeof v === "object" && v !== null && !Array.isArray(v);
}

function isNum(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

export function validateTrialDoc(raw: unknown): string[] {
  const errors: string[] = [];
  if (!isRecord(raw)) {
    return ["document is not a JSON object"];
  }
  if (raw.schema !== SCHEMA_TAG) {
    errors.push(`schema must be "${SCHEMA_TAG}", got ${JSON.stringify(raw.schema)}`);
  }
  if (typeof raw.trial_id !== "string" || raw.trial_id.length === 0) {
    errors.push("trial_id must be a non-empty string");
  }

  const aois = raw.aois;
  if (!isRecord(aois)) {
    errors.push("aois must be an object keyed by flavor");
  } else {
    for (const [flavor, list] of Object.entries(aois)) {
      if (!KNOWN_FLAVORS.has(flavor)) {
        errors.push(`unknown flavor key "${flavor}"`);
        continue;
      }
      if (!Array.isArray(list)) {
        errors.push(`aois.${flavor} must be an array`);
        continue;
      }
      list.forEach((a, i) => {
        if (!isRecord(a)) {
          errors.push(`aois.${flavor}[${i}] is not an object`);
          return;
        }
        for (const key of ["x", "y", "w", "h", "position"]) {
          if (!isNum(a[key])) {
            errors.push(`aois.${flavor}[${i}].${key} must be a finite number`);
          }
        }
        if (typeof a.etype !== "string") {
          errors.push(`aois.${flavor}[${i}].etype must be a string`);
        }
        if (typeof a.aoi_id !== "string") {
          errors.push(`aois.${flavor}[${i}].aoi_id must be a string`);
        }
      });
    }
  }

  const replay = raw.replay;
  if (!isRecord(replay)) {
    errors.push("replay section missing");
    return errors;
  }
  for (const key of ["fixations", "cursor", "clicks"] as const) {
    if (!Array.isArray(replay[key])) {
      errors.push(`replay.${key} must be an array`);
    }
  }
  if (Array.isArray(replay.fixations)) {
    replay.fixations.forEach((f, i) => {
      if (!isRecord(f) || !isNum(f.x) || !isNum(f.y) || !isNum(f.start) || !isNum(f.end)) {
        errors.push(`replay.fixations[${i}] needs numeric x, y, start, end`);
      }
    });
  }
  if (Array.isArray(replay.cursor)) {
    replay.cursor.forEach((c, i) => {
      if (!isRecord(c) || !isNum(c.t) || !isNum(c.x) || !isNum(c.y)) {
        errors.push(`replay.cursor[${i}] needs numeric t, x, y`);
      }
    });
  }
  if (replay.channels !== undefined) {
    if (!isRecord(replay.channels)) {
      errors.push("replay.channels must map names to number arrays");
    } else {
      for (const [name, values] of Object.entries(replay.channels)) {
        if (!Array.isArray(values) || values.some((v) => !isNum(v))) {
          errors.push(`replay.channels.${name} must be an array of numbers`);
        }
      }
    }
  }

  const meta = raw.meta;
  if (meta !== null && meta !== undefined) {
    if (!isRecord(meta) || !isNum(meta.screenshot_width) || !isNum(meta.screenshot_height)) {
      errors.push("meta must carry numeric screenshot dimensions (or be null)");
    }
  }
  return errors;
}

/** Narrow after validation; throws if the document is invalid. */
export function asTrialDoc(raw: unknown): TrialDoc {
  const errors = validateTrialDoc(raw);
  if (errors.length > 0) {
    throw new Error(`invalid trial document: ${errors.join("; ")}`);
  }
  return raw as unknown as TrialDoc;
}
