"""Shared environment plumbing."""

from __future__ import annotations

from typing import NamedTuple

from ..cases import Case


class Transition(NamedTuple):
    state_before: Case
    action: int
    reward: float
    state_after: Case
    terminal: bool


class RespawnExhausted(RuntimeError):
    """No collision-free pose was found within the attempt budget."""
