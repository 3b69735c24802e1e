/**
 * Client-side mirror of the rule grammar, for instant form validation:
 *
 *   expr := conj ("OR" conj)*
 *   conj := pred ("AND" pred)*
 *   pred := IDENT CMP literal | IDENT | literal CMP literal
 *
 * Keywords are case-insensitive, identifiers may contain hyphens and
 * underscores, a bare boolean identifier means `== true`, and a true
 * constant comparison (the `1==1` idiom) is vacuous. The server remains
 * authoritative; this mirror only has to agree with it on valid input and
 * print the same canonical text.
 */

export type Comparator = "<" | "<=" | ">" | ">=" | "==" | "!=";

export interface Predicate {
  feature: string;
  op: Comparator;
  value: number | boolean;
}

export interface Rule {
  groups: Predicate[][]; // empty means always true
}

export class RuleParseError extends Error {
  constructor(message: string, public position: number) {
    super(`${message} (at position ${position})`);
  }
}

type Token =
  | { kind: "cmp"; value: Comparator; pos: number }
  | { kind: "number"; value: number; pos: number }
  | { kind: "bool"; value: boolean; pos: number }
  | { kind: "AND" | "OR"; pos: number }
  | { kind: "ident"; value: string; pos: number }
  | { kind: "end"; pos: number };

const CMP_RE = /^(<=|>=|==|!=|<|>|=)/;
const NUM_RE = /^-?\d+(\.\d+)?([eE][+-]?\d+)?/;
const IDENT_RE = /^[A-Za-z_][A-Za-z0-9_\-]*/;

function tokenize(text: string): Token[] {
  const tokens: Token[] = [];
  let pos = 0;
  while (pos < text.length) {
    const rest = text.slice(pos);
    const ws = rest.match(/^\s+/);
    if (ws) {
      pos += ws[0].length;
      continue;
    }
    let m = rest.match(CMP_RE);
    if (m) {
      const op = (m[0] === "=" ? "==" : m[0]) as Comparator;
      tokens.push({ kind: "cmp", value: op, pos });
      pos += m[0].length;
      continue;
    }
    m = rest.match(NUM_RE);
    if (m) {
      tokens.push({ kind: "number", value: Number(m[0]), pos });
      pos += m[0].length;
      continue;
    }
    m = rest.match(IDENT_RE);
    if (m) {
      const word = m[0];
      const lower = word.toLowerCase();
      if (lower === "and" || lower === "or") {
        tokens.push({ kind: lower.toUpperCase() as "AND" | "OR", pos });
      } else if (lower === "true" || lower === "false") {
        tokens.push({ kind: "bool", value: lower === "true", pos });
      } else {
        tokens.push({ kind: "ident", value: word, pos });
      }
      pos += word.length;
      continue;
    }
    throw new RuleParseError(`unexpected character ${JSON.stringify(rest[0])}`, pos);
  }
  tokens.push({ kind: "end", pos: text.length });
  return tokens;
}

const CONSTANT_OPS: Record<Comparator, (a: number | boolean, b: number | boolean) => boolean> = {
  "<": (a, b) => a < b,
  "<=": (a, b) => a <= b,
  ">": (a, b) => a > b,
  ">=": (a, b) => a >= b,
  "==": (a, b) => a === b,
  "!=": (a, b) => a !== b,
};

class Parser {
  private i = 0;

  constructor(private tokens: Token[]) {}

  private peek(): Token {
    return this.tokens[this.i];
  }

  private advance(): Token {
    return this.tokens[this.i++];
  }

  parse(): Rule {
    const groups: (Predicate[] | null)[] = [this.conjunction()];
    while (this.peek().kind === "OR") {
      this.advance();
      groups.push(this.conjunction());
    }
    const tail = this.peek();
    if (tail.kind !== "end") {
      throw new RuleParseError("trailing input after rule", tail.pos);
    }
    if (groups.some((g) => g === null)) {
      return { groups: [] }; // a vacuous conjunction makes the rule always true
    }
    return { groups: groups as Predicate[][] };
  }

  private conjunction(): Predicate[] | null {
    const preds: (Predicate | null)[] = [this.predicate()];
    while (this.peek().kind === "AND") {
      this.advance();
      preds.push(this.predicate());
    }
    const kept = preds.filter((p): p is Predicate => p !== null);
    return kept.length ? kept : null;
  }

  private predicate(): Predicate | null {
    const tok = this.advance();
    if (tok.kind === "ident") {
      if (this.peek().kind === "cmp") {
        const op = (this.advance() as Token & { kind: "cmp" }).value;
        const lit = this.literal();
        return canonicalPredicate(tok.value, op, lit, tok.pos);
      }
      return { feature: tok.value, op: "==", value: true };
    }
    if (tok.kind === "number" || tok.kind === "bool") {
      const cmp = this.peek();
      if (cmp.kind !== "cmp") {
        throw new RuleParseError("literal must be part of a comparison", tok.pos);
      }
      this.advance();
      const rhs = this.literal();
      if (!CONSTANT_OPS[cmp.value](tok.value, rhs)) {
        throw new RuleParseError("constant condition is always false", tok.pos);
      }
      return null; // vacuously true
    }
    throw new RuleParseError("expected a feature name or literal", tok.pos);
  }

  private literal(): number | boolean {
    const tok = this.advance();
    if (tok.kind === "number" || tok.kind === "bool") {
      return tok.value;
    }
    throw new RuleParseError("expected a number or true/false", tok.pos);
  }
}

function canonicalPredicate(
  feature: string,
  op: Comparator,
  value: number | boolean,
  pos: number,
): Predicate {
  if (typeof value === "boolean") {
    if (op !== "==" && op !== "!=") {
      throw new RuleParseError(`comparator ${op} is not valid for booleans`, pos);
    }
    if (op === "!=") {
      return { feature, op: "==", value: !value };
    }
  }
  return { feature, op, value };
}

export function parseRule(text: string): Rule {
  if (!text.trim()) {
    throw new RuleParseError("empty rule text", 0);
  }
  return new Parser(tokenize(text)).parse();
}

function formatNumber(v: number): string {
  // mirrors the server: integral values print without a decimal point
  return Number.isInteger(v) ? String(v) : String(v);
}

export function printPredicate(p: Predicate): string {
  if (typeof p.value === "boolean") {
    if (p.op === "==" && p.value === true) {
      return p.feature;
    }
    return `${p.feature} ${p.op} ${p.value ? "true" : "false"}`;
  }
  return `${p.feature} ${p.op} ${formatNumber(p.value)}`;
}

export function printRule(rule: Rule): string {
  if (!rule.groups.length) {
    return "1==1";
  }
  return rule.groups
    .map((conj) => conj.map(printPredicate).join(" AND "))
    .join(" OR ");
}

export function evaluateRule(rule: Rule, kase: Record<string, number | boolean>): boolean {
  if (!rule.groups.length) {
    return true;
  }
  return rule.groups.some((conj) =>
    conj.every((p) => {
      const v = kase[p.feature];
      if (v === undefined) {
        throw new Error(`missing feature ${p.feature}`);
      }
      return CONSTANT_OPS[p.op](v, p.value);
    }),
  );
}
