"""Ripple-down-rules exception tree: classification, insertion, serialization.

The tree is binary: when a node's rule is satisfied the walk descends to its
true child, otherwise to its false child, stopping at the first missing
child. The returned conclusion is that of the last *satisfied* node on the
walk; the root always satisfies (its rule is always true) and concludes
"explore", i.e. no recommendation.

Two serializations are supported: an indented text form in the style used
for human-readable knowledge bases, and a recursive JSON form for the wire.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .cases import Case, FeatureSchema
from .rules import ParseError, Rule, parse_rule

EXPLORE = None  # conclusion carrying no recommendation


class RuleRejected(ValueError):
    pass


class SlotConflict(RuntimeError):
    pass


@dataclass(frozen=True)
class ActionVocab:
    """Maps action indices to advice tokens (e.g. ``GO RIGHT``) and back."""

    tokens: tuple[str, ...]  # canonical token per action index
    aliases: dict = field(default_factory=dict)  # normalized extra spellings

    def to_text(self, action: int) -> str:
        return self.tokens[action]

    def parse(self, token: str) -> int:
        norm = " ".join(token.upper().split())
        for i, t in enumerate(self.tokens):
            if t == norm:
                return i
        if norm in self.aliases:
            return self.aliases[norm]
        raise ValueError(f"unknown action token {token!r}")


@dataclass
class RDRNode:
    node_id: int
    rule: Rule
    conclusion: int | None  # action index, or EXPLORE
    cornerstone: Case | None = None
    true_child: "RDRNode | None" = None
    false_child: "RDRNode | None" = None


class RDRTree:
    """Binary exception tree rooted at an always-true, explore node."""

    def __init__(self, schema: FeatureSchema, vocab: ActionVocab):
        self.schema = schema
        self.vocab = vocab
        self.root = RDRNode(node_id=0, rule=Rule.always_true(), conclusion=EXPLORE)
        self.nodes = [self.root]

    def __len__(self) -> int:
        return len(self.nodes)

    def classify(self, case: Case):
        """Walk the tree; returns (conclusion, classification node, insertion node)."""
        node = self.root
        last_satisfied = self.root
        while True:
            if node.rule.evaluate(case):
                last_satisfied = node
                child = node.true_child
            else:
                child = node.false_child
            if child is None:
                return last_satisfied.conclusion, last_satisfied, node
            node = child

    def satisfied_path(self, case: Case) -> list[RDRNode]:
        """Non-root nodes whose rules held on the walk, shallowest first."""
        path = []
        node = self.root
        while node is not None:
            if node.rule.evaluate(case):
                if node is not self.root:
                    path.append(node)
                node = node.true_child
            else:
                node = node.false_child
        return path

    def insert(self, insertion_node: RDRNode, rule: Rule, action: int, cornerstone: Case) -> RDRNode:
        """Attach a new rule node below the insertion point.

        The new node lands on the true side if the insertion node's rule
        holds on the cornerstone, else the false side. If that slot is
        already occupied the walk continues from the occupant until a free
        slot in the cornerstone's walk direction is found.
        """
        if self.nodes[insertion_node.node_id] is not insertion_node:
            raise SlotConflict("insertion node does not belong to this tree")
        if not rule.evaluate(cornerstone):
            raise RuleRejected(f"rule {rule} is false on its cornerstone case")
        node = insertion_node
        while True:
            on_true_side = node.rule.evaluate(cornerstone)
            child = node.true_child if on_true_side else node.false_child
            if child is None:
                break
            node = child
        new = RDRNode(
            node_id=len(self.nodes),
            rule=rule,
            conclusion=action,
            cornerstone=dict(cornerstone),
        )
        if on_true_side:
            node.true_child = new
        else:
            node.false_child = new
        self.nodes.append(new)
        return new

    # -- text form -------------------------------------------------------

    def to_text(self) -> str:
        lines = []

        def emit(node: RDRNode, depth: int) -> None:
            pad = "    " * depth
            concl = "EXPLORE" if node.conclusion is EXPLORE else self.vocab.to_text(node.conclusion)
            lines.append(f"{pad}IF {node.rule}: {concl}")
            if node.true_child is None and node.false_child is None:
                return
            pad_child = "    " * (depth + 1)
            if node.true_child is not None:
                emit(node.true_child, depth + 1)
            else:
                lines.append(f"{pad_child}NO TRUE NODE")
            if node.false_child is not None:
                emit(node.false_child, depth + 1)
            else:
                lines.append(f"{pad_child}NO FALSE NODE")

        emit(self.root, 0)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, schema: FeatureSchema, vocab: ActionVocab) -> "RDRTree":
        raw = [ln for ln in text.splitlines() if ln.strip()]
        if not raw:
            raise ParseError("empty tree text", 0)
        entries = []
        for ln in raw:
            stripped = ln.lstrip()
            indent = len(ln) - len(stripped)
            entries.append((indent, stripped))

        tree = cls(schema, vocab)
        pos = 0

        def parse_child(expected_indent: int) -> RDRNode | None:
            # a trailing "NO FALSE NODE" may be omitted in hand-written files
            if pos >= len(entries) or entries[pos][0] != expected_indent:
                return None
            return parse_node()

        def parse_node() -> RDRNode | None:
            nonlocal pos
            indent, line = entries[pos]
            pos += 1
            if line.upper() in ("NO TRUE NODE", "NO FALSE NODE"):
                return None
            if not line.upper().startswith("IF "):
                raise ParseError(f"expected rule line, got {line!r}", pos)
            body = line[3:]
            if ":" not in body:
                raise ParseError(f"missing ':' in rule line {line!r}", pos)
            rule_text, concl_text = body.rsplit(":", 1)
            rule = parse_rule(rule_text.strip(), schema)
            concl_text = concl_text.strip()
            if concl_text.upper() == "EXPLORE":
                conclusion = EXPLORE
            else:
                conclusion = vocab.parse(concl_text)
            node = RDRNode(node_id=len(tree.nodes), rule=rule, conclusion=conclusion)
            # children exist iff the next entry is one level deeper
            if pos < len(entries) and entries[pos][0] > indent:
                child_indent = entries[pos][0]
                node.true_child = parse_child(child_indent)
                node.false_child = parse_child(child_indent)
            return node

        root = parse_node()
        if root is None or not root.rule.is_always_true or root.conclusion is not EXPLORE:
            raise ParseError("root must be the always-true explore node", 0)
        if pos != len(entries):
            raise ParseError("trailing lines after tree", pos)
        tree.root = root
        tree.nodes = []

        def renumber(node: RDRNode) -> None:
            node.node_id = len(tree.nodes)
            tree.nodes.append(node)
            if node.true_child is not None:
                renumber(node.true_child)
            if node.false_child is not None:
                renumber(node.false_child)

        renumber(root)
        return tree

    # -- JSON form -------------------------------------------------------

    def to_json_obj(self, node: RDRNode | None = None) -> dict:
        node = self.root if node is None else node
        return {
            "rule": str(node.rule),
            "conclusion": "EXPLORE" if node.conclusion is EXPLORE else self.vocab.to_text(node.conclusion),
            "cornerstone": node.cornerstone,
            "true": self.to_json_obj(node.true_child) if node.true_child else None,
            "false": self.to_json_obj(node.false_child) if node.false_child else None,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_obj(cls, obj: dict, schema: FeatureSchema, vocab: ActionVocab) -> "RDRTree":
        tree = cls(schema, vocab)

        def build(o: dict) -> RDRNode:
            concl = EXPLORE if o["conclusion"] == "EXPLORE" else vocab.parse(o["conclusion"])
            node = RDRNode(
                node_id=len(tree.nodes),
                rule=parse_rule(o["rule"], schema),
                conclusion=concl,
                cornerstone=o.get("cornerstone"),
            )
            tree.nodes.append(node)
            if o.get("true"):
                node.true_child = build(o["true"])
            if o.get("false"):
                node.false_child = build(o["false"])
            return node

        tree.nodes = []
        tree.root = build(obj)
        if not tree.root.rule.is_always_true or tree.root.conclusion is not EXPLORE:
            raise ParseError("root must be the always-true explore node", 0)
        return tree

    @classmethod
    def from_json(cls, text: str, schema: FeatureSchema, vocab: ActionVocab) -> "RDRTree":
        return cls.from_json_obj(json.loads(text), schema, vocab)
