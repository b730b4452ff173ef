// Sentence-typing session on the virtual keyboard.  Backspace is
// intentionally disabled so the error count downstream is well-posed; every
// accepted key press (characters and the final Enter) counts as a player
// keystroke.

import { Device, SessionLog, TypingRecord } from "./types.js";

export const SENTENCES = [
  "Rise and shine.",
  "Nothing lasts forever.",
  "Be honest.",
  "Respect the elders.",
  "Follow your heart.",
];

export type TypeWriterPhase = "typing" | "done";

export class TypeWriterSession {
  phase: TypeWriterPhase = "typing";
  typed = "";

  private idx = 0;
  private keystrokes = 0;
  private tAppear = 0;
  private tFirst: number | null = null;
  private completed: TypingRecord[] = [];

  constructor(
    readonly sentences: string[] = SENTENCES,
    private readonly player: string = "anonymous",
    private readonly device: Device = "pointer",
  ) {}

  start(t: number): void {
    this.tAppear = t;
  }

  target(): string | null {
    return this.phase === "done" ? null : this.sentences[this.idx];
  }

  level(): number {
    return this.idx + 1;
  }

  keyPress(key: string, t: number): boolean {
    if (this.phase === "done") {
      return false;
    }
    if (key === "Backspace") {
      return false; // disabled by design
    }
    if (key === "Enter") {
      if (this.tFirst === null) {
        return false; // nothing typed yet
      }
      this.keystrokes++;
      this.completed.push({
        target: this.sentences[this.idx],
        typed: this.typed,
        keystrokes: this.keystrokes,
        t_appear: this.tAppear,
        t_first_key: this.tFirst,
        t_enter: t,
      });
      this.idx++;
      this.typed = "";
      this.keystrokes = 0;
      this.tFirst = null;
      this.tAppear = t;
      if (this.idx >= this.sentences.length) {
        this.phase = "done";
      }
      return true;
    }
    if (key.length !== 1) {
      return false;
    }
    this.typed += key;
    this.keystrokes++;
    if (this.tFirst === null) {
      this.tFirst = t;
    }
    return true;
  }

  records(): TypingRecord[] {
    return this.completed;
  }

  sessionLog(): SessionLog {
    return {
      player: this.player,
      ability: "special",
      device: this.device,
      trials: [],
      typing: this.completed,
    };
  }
}
