"""Independent brute-force oracle and generators for RDR tree testing.

The oracle enumerates every root-to-missing-slot path of the tree, selects
the unique path whose branch directions all agree with the case, and reads
the conclusion off that path. This is a global enumeration, deliberately
unlike the incremental walk in the implementation.
"""

from __future__ import annotations

import random

from advice_loop.cases import FeatureSchema
from advice_loop.rdr import RDRTree, ActionVocab
from advice_loop.rules import Predicate, Rule

FUZZ_SCHEMA = FeatureSchema(
    name="fuzz",
    features=(
        ("b0", "bool"),
        ("b1", "bool"),
        ("b2", "bool"),
        ("r0", "real"),
        ("r1", "real"),
    ),
)

FUZZ_VOCAB = ActionVocab(tokens=("ACT A", "ACT B", "ACT C"))


def enumerate_paths(root):
    """All (node, direction) paths from the root to a missing child slot."""

    def rec(node):
        for direction in (True, False):
            child = node.true_child if direction else node.false_child
            if child is None:
                yield [(node, direction)]
            else:
                for rest in rec(child):
                    yield [(node, direction)] + rest

    return list(rec(root))


def oracle_classify(tree: RDRTree, case):
    """(conclusion, classification node, insertion node) via path enumeration."""
    for path in enumerate_paths(tree.root):
        if all(node.rule.evaluate(case) == direction for node, direction in path):
            satisfied = [node for node, direction in path if direction]
            classification = satisfied[-1] if satisfied else tree.root
            return classification.conclusion, classification, path[-1][0]
    raise AssertionError("no consistent root-to-slot path; tree walk is broken")


def random_case(rng: random.Random):
    return {
        "b0": rng.random() < 0.5,
        "b1": rng.random() < 0.5,
        "b2": rng.random() < 0.5,
        "r0": rng.uniform(-2.0, 2.0),
        "r1": rng.uniform(-2.0, 2.0),
    }


def random_predicate(rng: random.Random) -> Predicate:
    name, kind = FUZZ_SCHEMA.features[rng.randrange(len(FUZZ_SCHEMA.features))]
    if kind == "bool":
        return Predicate(name, "==", rng.random() < 0.5)
    op = rng.choice(("<", "<=", ">", ">="))
    return Predicate(name, op, round(rng.uniform(-2.0, 2.0), 3))


def random_rule(rng: random.Random) -> Rule:
    groups = tuple(
        tuple(random_predicate(rng) for _ in range(rng.randint(1, 2)))
        for _ in range(rng.randint(1, 2))
    )
    return Rule(groups=groups)


def random_tree(rng: random.Random, max_depth: int = 6) -> RDRTree:
    """Arbitrary-structure tree (not insertion-built); for classify testing."""
    tree = RDRTree(FUZZ_SCHEMA, FUZZ_VOCAB)

    def grow(node, depth):
        if depth >= max_depth:
            return
        for side in ("true_child", "false_child"):
            if rng.random() < 0.6:
                child_rule = random_rule(rng)
                from advice_loop.rdr import RDRNode

                child = RDRNode(
                    node_id=len(tree.nodes),
                    rule=child_rule,
                    conclusion=rng.randrange(3),
                )
                tree.nodes.append(child)
                setattr(node, side, child)
                grow(child, depth + 1)

    grow(tree.root, 0)
    return tree


def separating_rule(case, endangered, rng: random.Random):
    """A conjunction true on ``case`` and false on every endangered case.

    Returns None when some endangered case cannot be separated (identical
    feature values), which the fuzz loop simply skips.
    """
    preds = []
    for other in endangered:
        feats = []
        for name, kind in FUZZ_SCHEMA.features:
            if kind == "bool":
                if case[name] != other[name]:
                    feats.append((name, kind))
            elif abs(case[name] - other[name]) > 1e-6:
                feats.append((name, kind))
        if not feats:
            return None
        name, kind = feats[rng.randrange(len(feats))]
        if kind == "bool":
            preds.append(Predicate(name, "==", case[name]))
        else:
            mid = (case[name] + other[name]) / 2.0
            preds.append(Predicate(name, ">" if case[name] > other[name] else "<", mid))
    if not preds:
        name, kind = FUZZ_SCHEMA.features[rng.randrange(len(FUZZ_SCHEMA.features))]
        if kind == "bool":
            preds.append(Predicate(name, "==", case[name]))
        else:
            preds.append(Predicate(name, "<=" if rng.random() < 0.5 else ">=", case[name]))
    rule = Rule(groups=(tuple(preds),))
    if not rule.evaluate(case):
        return None
    if any(rule.evaluate(other) for other in endangered):
        return None
    return rule
