"""Single-machine reference evaluation used to cross-check the engines."""

from __future__ import annotations

from .embedding import enumerate_total
from .model import DataGraph, Query
from .ntio import AnswerSet

__all__ = ["oracle_answers", "count_embeddings"]


def oracle_answers(query: Query, graph: DataGraph) -> AnswerSet:
    """All answers of the query over the whole graph, by direct backtracking."""
    rows = [
        tuple(e[v] for v in query.output_pattern)
        for e in enumerate_total(query, graph)
    ]
    return AnswerSet(query.output_pattern, rows)


def count_embeddings(query: Query, graph: DataGraph) -> int:
    """Number of total embeddings (not projected, not deduplicated)."""
    return len(enumerate_total(query, graph))
