// Log export format, including end-to-end ingestion by the evaluation CLI.

import { execFileSync } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { logFilename, trialsToJsonl, typingToJsonl } from "../src/logio.js";
import { PopperSession } from "../src/popper.js";
import { SENTENCES, TypeWriterSession } from "../src/typewriter.js";

function playFullPopper(): PopperSession {
  const session = new PopperSession({
    ability: "special", viewW: 1920, viewH: 1080, seed: 21, player: "R1", device: "auxilio",
  });
  session.start(0);
  let t = 0;
  while (session.phase !== "done") {
    if (session.phase === "reward") {
      session.continueFromReward(++t);
      continue;
    }
    const b = session.currentBalloon()!;
    session.cursorMove(b.cx - 20, b.cy + 10);
    session.cursorMove(b.cx, b.cy);
    session.click(b.cx, b.cy, (t += 0.8));
  }
  return session;
}

function playFullTypeWriter(): TypeWriterSession {
  const session = new TypeWriterSession(SENTENCES, "R1", "auxilio");
  session.start(0);
  let t = 0;
  for (const sentence of SENTENCES) {
    for (const ch of sentence) {
      session.keyPress(ch, (t += 0.4));
    }
    session.keyPress("Enter", (t += 0.4));
  }
  return session;
}

describe("log serialization", () => {
  it("emits one JSON object per line with the trial schema", () => {
    const session = playFullPopper();
    const lines = trialsToJsonl(session.records()).trim().split("\n");
    expect(lines).toHaveLength(48);
    const first = JSON.parse(lines[0]);
    expect(Object.keys(first).sort()).toEqual(
      ["cx", "cy", "miss_clicks", "path", "t_end", "t_start", "trial", "w"]);
  });

  it("emits the typing schema", () => {
    const session = playFullTypeWriter();
    const lines = typingToJsonl(session.records()).trim().split("\n");
    expect(lines).toHaveLength(5);
    const rec = JSON.parse(lines[2]);
    expect(rec.target).toBe("Be honest.");
    expect(rec.keystrokes).toBe("Be honest.".length + 1);
  });

  it("derives a filesystem-safe filename", () => {
    const log = playFullPopper().sessionLog();
    expect(logFilename(log, "trials")).toBe("r1_auxilio_trials.jsonl");
  });
});

describe("evaluation CLI ingestion", () => {
  const workdir = mkdtempSync(join(tmpdir(), "taskboard-"));

  function cli(args: string[]): string {
    return execFileSync("python3", ["-m", "auxilio.cli", ...args], {
      encoding: "utf-8",
    });
  }

  it("eval-pointing reads an exported trial log unmodified", () => {
    const path = join(workdir, "trials.jsonl");
    writeFileSync(path, trialsToJsonl(playFullPopper().records()));
    const out = cli(["eval-pointing", path]);
    for (const column of ["Mean", "SD", "Min", "25th Percentile", "Max"]) {
      expect(out).toContain(column);
    }
    expect(out).toContain("W=32px");
    expect(out).toContain("W=128px");
  });

  it("eval-typing reads an exported typing log unmodified", () => {
    const path = join(workdir, "typing.jsonl");
    writeFileSync(path, typingToJsonl(playFullTypeWriter().records()));
    const out = cli(["eval-typing", path]);
    expect(out).toContain("Be honest.");
    expect(out).toContain("Mean WPM");
    expect(out).toContain("100.00%"); // perfect transcription
  });
});
