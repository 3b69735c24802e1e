"""Predicate rule DSL: parser, evaluator, and canonical printer.

Grammar (keywords case-insensitive, feature names may contain hyphens and
underscores)::

    expr := conj ("OR" conj)*
    conj := pred ("AND" pred)*
    pred := IDENT CMP literal | IDENT | literal CMP literal

A bare boolean identifier means ``== true``. A constant comparison such as
``1==1`` is folded at parse time; a true constant makes the enclosing
conjunction vacuous, which is how the always-true rule is written.
``=`` is accepted as an alias for ``==`` on input; printing always emits
the canonical form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .cases import Case, FeatureSchema

COMPARATORS = ("<=", ">=", "==", "!=", "<", ">")


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownFeature(ValueError):
    def __init__(self, feature: str, schema: FeatureSchema):
        super().__init__(f"unknown feature {feature!r} for schema {schema.name}")
        self.feature = feature


class MissingFeature(KeyError):
    def __init__(self, feature: str):
        super().__init__(feature)
        self.feature = feature


@dataclass(frozen=True)
class Predicate:
    feature: str
    op: str  # one of COMPARATORS
    value: object  # bool | float

    def evaluate(self, case: Case) -> bool:
        try:
            v = case[self.feature]
        except KeyError:
            raise MissingFeature(self.feature) from None
        if isinstance(self.value, bool):
            return (v == self.value) if self.op == "==" else (v != self.value)
        if self.op == "<":
            return v < self.value
        if self.op == "<=":
            return v <= self.value
        if self.op == ">":
            return v > self.value
        if self.op == ">=":
            return v >= self.value
        if self.op == "==":
            return v == self.value
        return v != self.value

    def __str__(self) -> str:
        if isinstance(self.value, bool):
            if self.op == "==" and self.value is True:
                return self.feature
            shown = "true" if self.value else "false"
            return f"{self.feature} {self.op} {shown}"
        return f"{self.feature} {self.op} {_format_number(self.value)}"


@dataclass(frozen=True)
class Rule:
    """Disjunction of conjunctions of predicates; empty means always true."""

    groups: tuple = ()

    @classmethod
    def always_true(cls) -> "Rule":
        return cls(groups=())

    @property
    def is_always_true(self) -> bool:
        return not self.groups

    def evaluate(self, case: Case) -> bool:
        if not self.groups:
            return True
        return any(all(p.evaluate(case) for p in conj) for conj in self.groups)

    def __str__(self) -> str:
        if not self.groups:
            return "1==1"
        return " OR ".join(" AND ".join(str(p) for p in conj) for conj in self.groups)


def _format_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<cmp><=|>=|==|!=|<|>|=)"
    r"|(?P<number>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_\-]*))"
)

_KEYWORDS = {"and": "AND", "or": "OR", "true": "TRUE", "false": "FALSE"}


def _tokenize(text: str) -> list[tuple[str, object, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", pos)
        if m.group("cmp"):
            op = m.group("cmp")
            tokens.append(("cmp", "==" if op == "=" else op, m.start("cmp")))
        elif m.group("number"):
            tokens.append(("number", float(m.group("number")), m.start("number")))
        else:
            word = m.group("ident")
            kw = _KEYWORDS.get(word.lower())
            if kw in ("AND", "OR"):
                tokens.append((kw, word, m.start("ident")))
            elif kw == "TRUE":
                tokens.append(("bool", True, m.start("ident")))
            elif kw == "FALSE":
                tokens.append(("bool", False, m.start("ident")))
            else:
                tokens.append(("ident", word, m.start("ident")))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, schema: FeatureSchema | None):
        self.text = text
        self.schema = schema
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> Rule:
        groups = [self.conjunction()]
        while self.peek()[0] == "OR":
            self.advance()
            groups.append(self.conjunction())
        kind, _, pos = self.peek()
        if kind != "end":
            raise ParseError("trailing input after rule", pos)
        # A vacuous conjunction (all-constant, all-true) makes the whole
        # disjunction always true.
        if any(conj is None for conj in groups):
            return Rule.always_true()
        return Rule(groups=tuple(tuple(conj) for conj in groups))

    def conjunction(self):
        preds = [self.predicate()]
        while self.peek()[0] == "AND":
            self.advance()
            preds.append(self.predicate())
        preds = [p for p in preds if p is not None]
        return tuple(preds) if preds else None

    def predicate(self):
        kind, value, pos = self.advance()
        if kind == "ident":
            feature = value
            if self.peek()[0] == "cmp":
                _, op, _ = self.advance()
                lit = self.literal()
                return self._typed(feature, op, lit, pos)
            return self._typed(feature, "==", True, pos)
        if kind in ("number", "bool"):
            if self.peek()[0] != "cmp":
                raise ParseError("literal must be part of a comparison", pos)
            _, op, _ = self.advance()
            rhs = self.literal()
            return self._constant(value, op, rhs, pos)
        raise ParseError("expected a feature name or literal", pos)

    def literal(self):
        kind, value, pos = self.advance()
        if kind in ("number", "bool"):
            return value
        raise ParseError("expected a number or true/false", pos)

    def _constant(self, lhs, op, rhs, pos):
        ops = {
            "<": lhs < rhs,
            "<=": lhs <= rhs,
            ">": lhs > rhs,
            ">=": lhs >= rhs,
            "==": lhs == rhs,
            "!=": lhs != rhs,
        }
        if not ops[op]:
            raise ParseError("constant condition is always false", pos)
        return None  # vacuously true; dropped from the conjunction

    def _typed(self, feature: str, op: str, value, pos: int) -> Predicate:
        if isinstance(value, bool):
            if op not in ("==", "!="):
                raise ParseError(f"comparator {op!r} is not valid for booleans", pos)
            if op == "!=":  # canonicalize to equality form
                op, value = "==", not value
        if self.schema is not None:
            kind = self.schema.kind_of(feature)
            if kind is None:
                raise UnknownFeature(feature, self.schema)
            if kind == "bool" and not isinstance(value, bool):
                raise ParseError(f"feature {feature!r} is boolean", pos)
            if kind == "real" and isinstance(value, bool):
                raise ParseError(f"feature {feature!r} is numeric", pos)
        return Predicate(feature=feature, op=op, value=value)


def parse_rule(text: str, schema: FeatureSchema | None = None) -> Rule:
    """Parse DSL text into a Rule, optionally validating feature names."""
    if not text or not text.strip():
        raise ParseError("empty rule text", 0)
    return _Parser(text, schema).parse()


def eval_rule(rule: Rule, case: Case) -> bool:
    return rule.evaluate(case)
