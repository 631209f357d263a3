"""Search budgets and the tri-state verdicts shared by every exact search."""

from __future__ import annotations

import enum


class Verdict(str, enum.Enum):
    TRUE = "TRUE"
    FALSE = "FALSE"
    UNKNOWN = "UNKNOWN"


class BudgetExhausted(Exception):
    """Raised inside a search when its node budget runs out."""

    def __init__(self, nodes: int):
        super().__init__(f"search budget exhausted after {nodes} nodes")
        self.nodes = nodes


class SizeError(ValueError):
    """An instance is too large for exact construction under the configured budget."""


class Budget:
    """Counts search nodes; ``limit=None`` means unbounded."""

    __slots__ = ("limit", "nodes")

    def __init__(self, limit: int | None = None):
        self.limit = limit
        self.nodes = 0

    def tick(self, amount: int = 1) -> None:
        self.nodes += amount
        if self.limit is not None and self.nodes > self.limit:
            raise BudgetExhausted(self.nodes)

    @property
    def remaining(self) -> int | None:
        if self.limit is None:
            return None
        return max(self.limit - self.nodes, 0)


DEFAULT_NODE_BUDGET = 5_000_000
