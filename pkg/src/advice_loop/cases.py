"""Observations as named-feature maps, feature schemas, and case diffing.

A case is a plain dict mapping feature names to booleans or reals. Each
environment fixes a schema (feature names, order, and kinds); rules and
advice models are validated against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Case = dict  # feature name -> bool | float

REAL_TOLERANCE = 1e-9


class SchemaMismatch(ValueError):
    pass


@dataclass(frozen=True)
class FeatureSchema:
    """Fixed feature set of an environment, in stable display order."""

    name: str
    features: tuple[tuple[str, str], ...]  # (feature name, "bool" | "real")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.features)

    def kind_of(self, feature: str) -> str | None:
        for n, k in self.features:
            if n == feature:
                return k
        return None

    def validate(self, case: Case) -> None:
        if set(case) != set(self.names):
            raise SchemaMismatch(
                f"case features {sorted(case)} do not match schema "
                f"{self.name} {sorted(self.names)}"
            )


MC_SCHEMA = FeatureSchema(
    name="mountain_car",
    features=(("position", "real"), ("velocity", "real")),
)

SDC_SENSOR_NAMES = (
    "left",
    "right",
    "left-front-close",
    "right-front-close",
    "left-front-far",
    "right-front-far",
    "front-close",
    "front-far",
)

SDC_SCHEMA = FeatureSchema(
    name="driving",
    features=tuple((n, "bool") for n in SDC_SENSOR_NAMES) + (("velocity", "real"),),
)


def values_differ(a, b) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return a != b
    return not math.isclose(a, b, rel_tol=0.0, abs_tol=REAL_TOLERANCE)


def case_diff(current: Case, cornerstone: Case, schema: FeatureSchema) -> list[tuple]:
    """Features whose values differ between two cases of the same schema.

    Returns (feature, current_value, cornerstone_value) tuples in schema
    order. Reals are compared with a small absolute tolerance so that
    serialization round trips do not produce phantom diffs.
    """
    schema.validate(current)
    schema.validate(cornerstone)
    out = []
    for name in schema.names:
        cur, old = current[name], cornerstone[name]
        if values_differ(cur, old):
            out.append((name, cur, old))
    return out
