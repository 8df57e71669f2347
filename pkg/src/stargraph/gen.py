"""Deterministic synthetic graphs and queries for testing and benchmarks.

Everything here is driven by the xorshift generator in rng.py, so a given
(seed, size) pair reproduces the same graph or query on any platform.
"""

from __future__ import annotations

from .errors import ValidationError
from .model import (
    DataGraph,
    DataTriple,
    Query,
    Term,
    TriplePattern,
    iri,
    literal,
    variable,
)
from .rng import XorShift64Star

__all__ = ["generate_graph", "generate_query"]


def generate_graph(
    triples: int,
    *,
    nodes: int | None = None,
    predicates: int | None = None,
    literal_ratio: float = 0.15,
    seed: int = 0,
) -> DataGraph:
    """Random graph with light locality structure.

    Subjects are reused and chains are extended often enough that star and
    path patterns actually occur, instead of the graph being a loose pile of
    disconnected edges. Node, predicate and literal pools default to sizes
    proportional to the requested triple count.
    """
    if triples < 1:
        raise ValidationError("need at least one triple")
    if not 0.0 <= literal_ratio <= 1.0:
        raise ValidationError("literal_ratio must be within [0, 1]")
    n_nodes = nodes if nodes is not None else max(4, (2 * triples) // 5)
    n_preds = predicates if predicates is not None else max(2, min(12, triples))
    if n_nodes < 1 or n_preds < 1:
        raise ValidationError("node and predicate pools must be non-empty")
    n_lits = max(2, n_nodes // 4)
    node_pool = [iri(f"n{i}") for i in range(n_nodes)]
    pred_pool = [iri(f"p{i}") for i in range(n_preds)]
    lit_pool = [literal(f"v{i}") for i in range(n_lits)]
    capacity = n_nodes * n_preds * (n_nodes + n_lits)
    if triples > capacity:
        raise ValidationError(
            f"pools admit only {capacity} distinct triples, {triples} requested"
        )
    rng = XorShift64Star(seed)
    out: set[DataTriple] = set()
    prev_s: Term | None = None
    prev_o: Term | None = None
    while len(out) < triples:
        r = rng.random()
        if prev_s is not None and r < 0.3:
            s = prev_s
        elif prev_o is not None and not prev_o.is_literal and r < 0.5:
            s = prev_o
        else:
            s = rng.choice(node_pool)
        p = rng.choice(pred_pool)
        if rng.random() < literal_ratio:
            o = rng.choice(lit_pool)
        else:
            o = rng.choice(node_pool)
        out.add(DataTriple(s, p, o))
        prev_s, prev_o = s, o
    return DataGraph(out)


def generate_query(
    graph: DataGraph,
    triples: int,
    *,
    seed: int = 0,
    variable_ratio: float = 0.6,
) -> Query:
    """Query sampled by walking the graph, so it has at least one answer.

    Starts from a random triple and keeps extending with triples incident to
    the data nodes already used. Each distinct data node is independently
    turned into a fresh variable (with probability ``variable_ratio``) or
    kept as a constant; predicates always stay constant. The walk may stop
    short of ``triples`` patterns if the reachable neighbourhood is smaller.
    """
    if triples < 1:
        raise ValidationError("need at least one triple pattern")
    rng = XorShift64Star(seed)
    all_triples = list(graph.canonical)
    rename: dict[Term, Term] = {}
    var_counter = 0

    def image(term: Term) -> Term:
        nonlocal var_counter
        if term not in rename:
            if rng.random() < variable_ratio:
                rename[term] = variable(f"x{var_counter}")
                var_counter += 1
            else:
                rename[term] = term
        return rename[term]

    chosen: list[DataTriple] = [rng.choice(all_triples)]
    used_nodes = {chosen[0].s, chosen[0].o}
    patterns = {TriplePattern(image(chosen[0].s), chosen[0].p, image(chosen[0].o))}
    attempts = 0
    while len(patterns) < triples and attempts < 20 * triples + 20:
        attempts += 1
        frontier = [
            t
            for t in all_triples
            if (t.s in used_nodes or t.o in used_nodes) and t not in chosen
        ]
        if not frontier:
            break
        t = rng.choice(frontier)
        chosen.append(t)
        used_nodes |= {t.s, t.o}
        patterns.add(TriplePattern(image(t.s), t.p, image(t.o)))
    return Query(patterns)
