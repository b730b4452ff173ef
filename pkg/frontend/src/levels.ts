import { Ability, LevelSpec } from "./types.js";

export const BALLOON_WIDTHS = [32, 64, 96, 128] as const;

// Session structure: four homogeneous levels (one width each, largest first)
// then one heterogeneous level.  Healthy players get 15 targets per
// homogeneous level and 30 heterogeneous; players with upper limb disability
// get 9 and 12 (48 targets total).
export function levelPlan(ability: Ability): LevelSpec[] {
  const perLevel = ability === "normal" ? 15 : 9;
  const hetero = ability === "normal" ? 30 : 12;
  const homogeneous = [128, 96, 64, 32].map((w, i): LevelSpec => ({
    level: i + 1,
    kind: "homogeneous",
    widths: [w],
    count: perLevel,
  }));
  return [
    ...homogeneous,
    { level: 5, kind: "heterogeneous", widths: [...BALLOON_WIDTHS], count: hetero },
  ];
}

export function totalTargets(plan: LevelSpec[]): number {
  return plan.reduce((sum, level) => sum + level.count, 0);
}
