// Balloon-popping pointing session.  One balloon at a time at a random
// location; a trial runs from balloon appearance to the click inside it.
// Clicks on or outside the boundary count as miss-clicks (inside means the
// strict interior); trials with miss-clicks are kept, not rejected.

import { levelPlan } from "./levels.js";
import { mulberry32 } from "./rng.js";
import { Ability, Device, LevelSpec, SessionLog, TrialRecord } from "./types.js";

export interface Balloon {
  cx: number;
  cy: number;
  w: number;
}

export interface PopperOptions {
  ability: Ability;
  viewW: number;
  viewH: number;
  seed?: number;
  player?: string;
  device?: Device;
}

export interface RewardStats {
  level: number;
  levelTime: number;
  missClicks: number;
}

export type PopperPhase = "playing" | "reward" | "done";

export class PopperSession {
  readonly plan: LevelSpec[];
  phase: PopperPhase = "playing";

  private readonly rng: () => number;
  private readonly opts: Required<PopperOptions>;
  private levelIdx = 0;
  private targetIdx = 0;
  private balloon: Balloon | null = null;
  private trials: TrialRecord[] = [];
  private trialNo = 0;
  private path: [number, number][] = [];
  private cursor: [number, number];
  private missClicks = 0;
  private tStart = 0;
  private levelStart = 0;
  private levelMissClicks = 0;
  private lastReward: RewardStats | null = null;

  constructor(opts: PopperOptions) {
    this.opts = {
      seed: 1,
      player: "anonymous",
      device: "pointer",
      ...opts,
    };
    this.plan = levelPlan(opts.ability);
    this.rng = mulberry32(this.opts.seed);
    this.cursor = [opts.viewW / 2, opts.viewH / 2];
  }

  start(t: number): void {
    this.tStart = t;
    this.levelStart = t;
    this.spawn();
  }

  currentBalloon(): Balloon | null {
    return this.balloon;
  }

  currentLevel(): LevelSpec {
    return this.plan[Math.min(this.levelIdx, this.plan.length - 1)];
  }

  poppedCount(): number {
    return this.trials.length;
  }

  rewardStats(): RewardStats | null {
    return this.lastReward;
  }

  cursorMove(x: number, y: number): void {
    this.cursor = [x, y];
    if (this.phase === "playing" && this.balloon) {
      this.path.push([x, y]);
    }
  }

  click(x: number, y: number, t: number): "hit" | "miss" | "ignored" {
    if (this.phase !== "playing" || !this.balloon) {
      return "ignored";
    }
    this.cursor = [x, y];
    this.path.push([x, y]);
    const b = this.balloon;
    const inside = Math.hypot(x - b.cx, y - b.cy) < b.w / 2;
    if (!inside) {
      this.missClicks++;
      this.levelMissClicks++;
      return "miss";
    }
    this.trials.push({
      trial: this.trialNo++,
      w: b.w,
      cx: b.cx,
      cy: b.cy,
      path: this.path,
      t_start: this.tStart,
      t_end: t,
      miss_clicks: this.missClicks,
    });
    this.targetIdx++;
    this.missClicks = 0;
    this.tStart = t;
    if (this.targetIdx >= this.currentLevel().count) {
      this.lastReward = {
        level: this.currentLevel().level,
        levelTime: t - this.levelStart,
        missClicks: this.levelMissClicks,
      };
      this.balloon = null;
      this.phase = this.levelIdx + 1 >= this.plan.length ? "done" : "reward";
    } else {
      this.spawn();
    }
    return "hit";
  }

  continueFromReward(t: number): void {
    if (this.phase !== "reward") {
      return;
    }
    this.levelIdx++;
    this.targetIdx = 0;
    this.levelMissClicks = 0;
    this.levelStart = t;
    this.tStart = t;
    this.phase = "playing";
    this.spawn();
  }

  records(): TrialRecord[] {
    return this.trials;
  }

  sessionLog(): SessionLog {
    return {
      player: this.opts.player,
      ability: this.opts.ability,
      device: this.opts.device,
      trials: this.trials,
      typing: [],
    };
  }

  private spawn(): void {
    const level = this.currentLevel();
    const w =
      level.kind === "homogeneous"
        ? level.widths[0]
        : level.widths[Math.floor(this.rng() * level.widths.length)];
    // Keep the full balloon inside the viewport.
    const margin = w / 2;
    this.balloon = {
      cx: margin + this.rng() * (this.opts.viewW - 2 * margin),
      cy: margin + this.rng() * (this.opts.viewH - 2 * margin),
      w,
    };
    // The new trial's path starts wherever the cursor currently is.
    this.path = [[...this.cursor] as [number, number]];
  }
}
