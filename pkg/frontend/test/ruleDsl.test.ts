import { describe, expect, it } from "vitest";

import { evaluateRule, parseRule, printRule, RuleParseError } from "../src/ruleDsl.js";
import fixture from "./fixtures/session.json";

describe("rule grammar mirror", () => {
  it("canonicalizes every shared fixture case exactly like the server", () => {
    for (const { text, canonical } of fixture.rule_cases) {
      expect(printRule(parseRule(text))).toBe(canonical);
    }
  });

  it("print/parse is a fixed point", () => {
    for (const { canonical } of fixture.rule_cases) {
      const once = printRule(parseRule(canonical));
      expect(printRule(parseRule(once))).toBe(once);
    }
  });

  it("parses OR of AND groups with correct precedence", () => {
    const rule = parseRule("left AND velocity > 2 OR right");
    expect(rule.groups).toHaveLength(2);
    expect(evaluateRule(rule, { left: true, right: false, velocity: 3 })).toBe(true);
    expect(evaluateRule(rule, { left: true, right: false, velocity: 1 })).toBe(false);
    expect(evaluateRule(rule, { left: false, right: true, velocity: 1 })).toBe(true);
  });

  it("treats a bare identifier as == true", () => {
    expect(printRule(parseRule("right == true"))).toBe("right");
    expect(evaluateRule(parseRule("right"), { right: false })).toBe(false);
  });

  it("folds the 1==1 tautology", () => {
    const rule = parseRule("1==1");
    expect(rule.groups).toHaveLength(0);
    expect(evaluateRule(rule, {})).toBe(true);
  });

  it("rejects bad input with a position", () => {
    expect(() => parseRule("velocity > ")).toThrow(RuleParseError);
    expect(() => parseRule("")).toThrow(RuleParseError);
    expect(() => parseRule("1==2")).toThrow(/always false/);
    expect(() => parseRule("velocity > 0 extra")).toThrow(/trailing/);
    try {
      parseRule("velocity > ???");
      expect.unreachable("should have thrown");
    } catch (err) {
      expect((err as RuleParseError).position).toBe(11);
    }
  });

  it("strict boundary semantics match the server", () => {
    const rule = parseRule("velocity > 0");
    expect(evaluateRule(rule, { velocity: 0.01 })).toBe(true);
    expect(evaluateRule(rule, { velocity: 0 })).toBe(false);
  });
});
