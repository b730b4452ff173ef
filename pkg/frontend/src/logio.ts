// Log export in the JSONL formats the evaluation CLI reads unmodified.

import { SessionLog, TrialRecord, TypingRecord } from "./types.js";

export function trialsToJsonl(trials: TrialRecord[]): string {
  return trials
    .map((t) =>
      JSON.stringify({
        trial: t.trial,
        w: t.w,
        cx: t.cx,
        cy: t.cy,
        path: t.path,
        t_start: t.t_start,
        t_end: t.t_end,
        miss_clicks: t.miss_clicks,
      }),
    )
    .join("\n") + (trials.length ? "\n" : "");
}

export function typingToJsonl(records: TypingRecord[]): string {
  return records
    .map((r) =>
      JSON.stringify({
        target: r.target,
        typed: r.typed,
        keystrokes: r.keystrokes,
        t_appear: r.t_appear,
        t_first_key: r.t_first_key,
        t_enter: r.t_enter,
      }),
    )
    .join("\n") + (records.length ? "\n" : "");
}

export function logFilename(log: SessionLog, kind: "trials" | "typing"): string {
  const safe = log.player.replace(/[^a-z0-9_-]/gi, "_").toLowerCase() || "player";
  return `${safe}_${log.device}_${kind}.jsonl`;
}

/** Trigger a client-side download; logs never leave the machine. */
export function downloadText(filename: string, text: string): void {
  const blob = new Blob([text], { type: "application/x-ndjson" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}
