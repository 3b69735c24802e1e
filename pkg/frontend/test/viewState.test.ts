import { describe, expect, it } from "vitest";

import { carFramePoint, valleyHeight } from "../src/render.js";
import { buildRuleText, emptyRow, formIsComplete } from "../src/ruleBuilder.js";
import { CHART_WINDOW, ViewState } from "../src/viewState.js";

function update(state: ViewState, payload: Record<string, unknown>): void {
  state.handle({ type: "state_update", session: "s", seq: 1, payload });
}

const baseUpdate = {
  step: 0,
  case: { position: -0.5, velocity: 0 },
  reward: -1,
  episode: 0,
  action: "LEFT",
  source: "greedy",
  terminal: false,
};

describe("view state", () => {
  it("keeps a rolling window of at most 200 episodes", () => {
    const state = new ViewState();
    for (let ep = 0; ep < CHART_WINDOW + 40; ep += 1) {
      update(state, { ...baseUpdate, episode: ep, terminal: true });
    }
    expect(state.episodes).toHaveLength(CHART_WINDOW);
    expect(state.episodes[0].episode).toBe(40);
  });

  it("flags a crash step and rolls the episode on terminal", () => {
    const state = new ViewState();
    update(state, { ...baseUpdate, reward: 3.5 });
    expect(state.crashFlash).toBe(false);
    update(state, { ...baseUpdate, step: 1, reward: -100, terminal: true });
    expect(state.crashFlash).toBe(true);
    expect(state.episodes).toHaveLength(1);
    expect(state.episodes[0].steps).toBe(2);
    expect(state.episodes[0].reward).toBeCloseTo(-96.5);
  });

  it("counts only fresh advice as interactions", () => {
    const state = new ViewState();
    update(state, { ...baseUpdate, source: "fresh_advice" });
    update(state, { ...baseUpdate, step: 1, source: "retained_advice" });
    update(state, { ...baseUpdate, step: 2, source: "greedy", terminal: true });
    expect(state.episodes[0].interactions).toBe(1);
  });

  it("marks the prompt stale once the server moves past it", () => {
    const state = new ViewState();
    state.handle({
      type: "prompt",
      session: "s",
      seq: 1,
      payload: { step: 4, case: {}, intended_action: "LEFT", source: "greedy" },
    });
    expect(state.pendingPrompt?.step).toBe(4);
    update(state, { ...baseUpdate, step: 4 });
    expect(state.pendingPrompt).toBeNull();
    expect(state.promptStale).toBe(true);
  });
});

describe("render geometry helpers", () => {
  it("rotates car-frame offsets with the heading", () => {
    const east = carFramePoint({ x: 10, y: 10, heading: 0 }, -2, 0);
    expect(east.x).toBeCloseTo(10); // car-left points north when facing east
    expect(east.y).toBeCloseTo(12);
    const north = carFramePoint({ x: 10, y: 10, heading: 90 }, 0, 2);
    expect(north.x).toBeCloseTo(10);
    expect(north.y).toBeCloseTo(12);
  });

  it("valley has its goal hill on the right", () => {
    expect(valleyHeight(0.6)).toBeGreaterThan(valleyHeight(-0.5));
  });
});

describe("rule builder form", () => {
  const features = [
    { name: "left", kind: "bool" as const },
    { name: "velocity", kind: "real" as const },
  ];

  it("composes DSL text from rows", () => {
    const rows = [
      { feature: "velocity", op: "<" as const, value: "-0.53", joiner: "AND" as const },
      { feature: "left", op: "==" as const, value: "true", joiner: "AND" as const },
    ];
    expect(buildRuleText(rows, features)).toBe("velocity < -0.53 AND left");
  });

  it("supports OR joiners", () => {
    const rows = [
      { feature: "left", op: "==" as const, value: "true", joiner: "AND" as const },
      { feature: "velocity", op: ">=" as const, value: "2", joiner: "OR" as const },
    ];
    expect(buildRuleText(rows, features)).toBe("left OR velocity >= 2");
  });

  it("an empty or incomplete form cannot submit", () => {
    expect(formIsComplete([], features)).toBe(false);
    const incomplete = [emptyRow(features)];
    incomplete[0].feature = "velocity";
    incomplete[0].value = "";
    expect(formIsComplete(incomplete, features)).toBe(false);
  });

  it("rejects mismatched value types", () => {
    const rows = [
      { feature: "left", op: "<" as const, value: "true", joiner: "AND" as const },
    ];
    expect(() => buildRuleText(rows, features)).toThrow(/not valid for booleans/);
  });
});
