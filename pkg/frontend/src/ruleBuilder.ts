/**
 * Form model behind the rule-builder panel: rows of (feature, comparator,
 * value) joined by AND within a group and OR between groups, composed into
 * DSL text that the client-side grammar validates before submission.
 */

import { Comparator, parseRule, printPredicate, printRule, Rule } from "./ruleDsl.js";

export interface BuilderRow {
  feature: string;
  op: Comparator;
  value: string; // raw form input; "true"/"false" for booleans
  joiner: "AND" | "OR"; // how this row attaches to the previous one
}

export interface FeatureInfo {
  name: string;
  kind: "bool" | "real";
}

export function emptyRow(features: FeatureInfo[]): BuilderRow {
  const first = features[0];
  return {
    feature: first ? first.name : "",
    op: first && first.kind === "bool" ? "==" : "<",
    value: first && first.kind === "bool" ? "true" : "",
    joiner: "AND",
  };
}

export function rowToPredicateText(row: BuilderRow, features: FeatureInfo[]): string {
  const info = features.find((f) => f.name === row.feature);
  if (!info) {
    throw new Error(`unknown feature ${row.feature}`);
  }
  if (info.kind === "bool") {
    const value = row.value.trim().toLowerCase();
    if (value !== "true" && value !== "false") {
      throw new Error(`boolean feature ${row.feature} needs true or false`);
    }
    if (row.op !== "==" && row.op !== "!=") {
      throw new Error(`comparator ${row.op} is not valid for booleans`);
    }
    return printPredicate({ feature: row.feature, op: row.op, value: value === "true" });
  }
  const num = Number(row.value);
  if (row.value.trim() === "" || Number.isNaN(num)) {
    throw new Error(`numeric feature ${row.feature} needs a number`);
  }
  return printPredicate({ feature: row.feature, op: row.op, value: num });
}

/** Compose DSL text from the form rows; throws on an invalid/empty form. */
export function buildRuleText(rows: BuilderRow[], features: FeatureInfo[]): string {
  if (!rows.length) {
    throw new Error("empty rule form");
  }
  const parts: string[] = [];
  rows.forEach((row, i) => {
    if (i > 0) {
      parts.push(row.joiner);
    }
    parts.push(rowToPredicateText(row, features));
  });
  const text = parts.join(" ");
  const parsed: Rule = parseRule(text); // round-trip through the grammar
  return printRule(parsed);
}

export function formIsComplete(rows: BuilderRow[], features: FeatureInfo[]): boolean {
  if (!rows.length) {
    return false;
  }
  try {
    buildRuleText(rows, features);
    return true;
  } catch {
    return false;
  }
}
