"""Terms, triples, graphs, queries, and their canonical ordering.

Everything downstream (partitioning, decomposition, evaluation) relies on the
canonical orders defined here: terms sort by (lexical form, kind), triples by
their per-position term keys. Iteration over graphs and queries always follows
that order, which is what makes runs reproducible regardless of hash seeds or
worker counts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Iterable, Iterator

from .errors import (
    EmptyGraph,
    EmptyQuery,
    LiteralSubject,
    MalformedLine,
    NotADecomposition,
    VariableInData,
    VariablePredicate,
)

__all__ = [
    "TermKind",
    "Term",
    "iri",
    "literal",
    "variable",
    "DataTriple",
    "TriplePattern",
    "DataGraph",
    "Query",
    "QueryShape",
    "classify_query",
    "is_subgraph",
    "so_centers",
    "star_centers",
    "QueryDecomposition",
    "DataDecomposition",
]


class TermKind(enum.IntEnum):
    IRI = 0
    LITERAL = 1
    VARIABLE = 2


@total_ordering
@dataclass(frozen=True, slots=True)
class Term:
    """An IRI, literal, or variable. Compare/sort by (lexical, kind)."""

    kind: TermKind
    lexical: str

    @property
    def key(self) -> tuple[str, int]:
        return (self.lexical, int(self.kind))

    @property
    def is_variable(self) -> bool:
        return self.kind is TermKind.VARIABLE

    @property
    def is_literal(self) -> bool:
        return self.kind is TermKind.LITERAL

    @property
    def is_iri(self) -> bool:
        return self.kind is TermKind.IRI

    @property
    def is_constant(self) -> bool:
        return self.kind is not TermKind.VARIABLE

    def token(self) -> str:
        """Render in input syntax: <iri>, "literal", ?variable."""
        if self.kind is TermKind.IRI:
            return f"<{self.lexical}>"
        if self.kind is TermKind.VARIABLE:
            return f"?{self.lexical}"
        escaped = self.lexical.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'

    def __lt__(self, other: "Term") -> bool:
        return self.key < other.key

    def __repr__(self) -> str:
        return f"Term({self.token()})"


_interned: dict[tuple[TermKind, str], Term] = {}


def _make(kind: TermKind, lexical: str) -> Term:
    key = (kind, lexical)
    t = _interned.get(key)
    if t is None:
        t = Term(kind, lexical)
        _interned[key] = t
    return t


def iri(lexical: str) -> Term:
    return _make(TermKind.IRI, lexical)


def literal(lexical: str) -> Term:
    return _make(TermKind.LITERAL, lexical)


def variable(name: str) -> Term:
    return _make(TermKind.VARIABLE, name)


@dataclass(frozen=True, slots=True)
class DataTriple:
    """A ground triple: IRI subject, IRI predicate, IRI or literal object."""

    s: Term
    p: Term
    o: Term

    def __post_init__(self):
        if self.s.is_literal:
            raise LiteralSubject("literal in subject position")
        if self.s.is_variable or self.o.is_variable:
            raise VariableInData("variable in a data triple")
        if self.p.is_variable:
            raise VariablePredicate("variable in predicate position")
        if self.p.is_literal:
            raise MalformedLine("literal in predicate position")

    @property
    def key(self):
        return (self.s.key, self.p.key, self.o.key)

    def token(self) -> str:
        return f"{self.s.token()} {self.p.token()} {self.o.token()} ."

    def __repr__(self) -> str:
        return f"DataTriple({self.token()})"


@dataclass(frozen=True, slots=True)
class TriplePattern:
    """A query triple: subject/object may be variables, predicate may not."""

    s: Term
    p: Term
    o: Term

    def __post_init__(self):
        if self.s.is_literal:
            raise LiteralSubject("literal in subject position")
        if self.p.is_variable:
            raise VariablePredicate("variable in predicate position")
        if self.p.is_literal:
            raise MalformedLine("literal in predicate position")

    @property
    def key(self):
        return (self.s.key, self.p.key, self.o.key)

    @property
    def nodes(self) -> tuple[Term, ...]:
        """Subject and object (the predicate is not a node)."""
        if self.s == self.o:
            return (self.s,)
        return (self.s, self.o)

    def token(self) -> str:
        return f"{self.s.token()} {self.p.token()} {self.o.token()} ."

    def ground(self, s: Term, o: Term) -> DataTriple:
        return DataTriple(s, self.p, o)

    def __repr__(self) -> str:
        return f"TriplePattern({self.token()})"


class DataGraph:
    """An immutable set of data triples with lazy match indexes."""

    __slots__ = ("triples", "_canonical", "_nodes", "_by_p", "_by_sp", "_by_op")

    def __init__(self, triples: Iterable[DataTriple]):
        ts = frozenset(triples)
        if not ts:
            raise EmptyGraph("a data graph needs at least one triple")
        self.triples = ts
        self._canonical: tuple[DataTriple, ...] | None = None
        self._nodes: frozenset[Term] | None = None
        self._by_p = None
        self._by_sp = None
        self._by_op = None

    @property
    def canonical(self) -> tuple[DataTriple, ...]:
        if self._canonical is None:
            self._canonical = tuple(sorted(self.triples, key=lambda t: t.key))
        return self._canonical

    @property
    def nodes(self) -> frozenset[Term]:
        if self._nodes is None:
            ns = set()
            for t in self.triples:
                ns.add(t.s)
                ns.add(t.o)
            self._nodes = frozenset(ns)
        return self._nodes

    @property
    def literals(self) -> frozenset[Term]:
        return frozenset(n for n in self.nodes if n.is_literal)

    def _build_indexes(self) -> None:
        by_p: dict[Term, list[DataTriple]] = {}
        by_sp: dict[tuple[Term, Term], list[DataTriple]] = {}
        by_op: dict[tuple[Term, Term], list[DataTriple]] = {}
        for t in self.canonical:
            by_p.setdefault(t.p, []).append(t)
            by_sp.setdefault((t.s, t.p), []).append(t)
            by_op.setdefault((t.o, t.p), []).append(t)
        self._by_p = {k: tuple(v) for k, v in by_p.items()}
        self._by_sp = {k: tuple(v) for k, v in by_sp.items()}
        self._by_op = {k: tuple(v) for k, v in by_op.items()}

    def by_predicate(self, p: Term) -> tuple[DataTriple, ...]:
        if self._by_p is None:
            self._build_indexes()
        return self._by_p.get(p, ())

    def by_subject_predicate(self, s: Term, p: Term) -> tuple[DataTriple, ...]:
        if self._by_sp is None:
            self._build_indexes()
        return self._by_sp.get((s, p), ())

    def by_object_predicate(self, o: Term, p: Term) -> tuple[DataTriple, ...]:
        if self._by_op is None:
            self._build_indexes()
        return self._by_op.get((o, p), ())

    def __contains__(self, t: DataTriple) -> bool:
        return t in self.triples

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self) -> Iterator[DataTriple]:
        return iter(self.canonical)

    def __eq__(self, other) -> bool:
        return isinstance(other, DataGraph) and self.triples == other.triples

    def __hash__(self) -> int:
        return hash(self.triples)

    def __repr__(self) -> str:
        return f"DataGraph({len(self.triples)} triples)"


class Query:
    """An immutable basic graph pattern."""

    __slots__ = ("triples", "_canonical", "_nodes", "_variables")

    def __init__(self, triples: Iterable[TriplePattern]):
        ts = frozenset(triples)
        if not ts:
            raise EmptyQuery("a query needs at least one triple pattern")
        self.triples = ts
        self._canonical: tuple[TriplePattern, ...] | None = None
        self._nodes: frozenset[Term] | None = None
        self._variables: frozenset[Term] | None = None

    @property
    def canonical(self) -> tuple[TriplePattern, ...]:
        if self._canonical is None:
            self._canonical = tuple(sorted(self.triples, key=lambda t: t.key))
        return self._canonical

    @property
    def nodes(self) -> frozenset[Term]:
        if self._nodes is None:
            ns = set()
            for t in self.triples:
                ns.add(t.s)
                ns.add(t.o)
            self._nodes = frozenset(ns)
        return self._nodes

    @property
    def variables(self) -> frozenset[Term]:
        if self._variables is None:
            self._variables = frozenset(n for n in self.nodes if n.is_variable)
        return self._variables

    @property
    def constants(self) -> frozenset[Term]:
        return self.nodes - self.variables

    @property
    def output_pattern(self) -> tuple[Term, ...]:
        """Variables in order of first appearance over canonical triples."""
        seen: list[Term] = []
        for t in self.canonical:
            for n in (t.s, t.o):
                if n.is_variable and n not in seen:
                    seen.append(n)
        return tuple(seen)

    def incident(self, node: Term) -> tuple[TriplePattern, ...]:
        return tuple(t for t in self.canonical if node in (t.s, t.o))

    def __contains__(self, t: TriplePattern) -> bool:
        return t in self.triples

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self) -> Iterator[TriplePattern]:
        return iter(self.canonical)

    def __eq__(self, other) -> bool:
        return isinstance(other, Query) and self.triples == other.triples

    def __hash__(self) -> int:
        return hash(self.triples)

    def __repr__(self) -> str:
        return f"Query({len(self.triples)} patterns)"


class QueryShape(enum.Enum):
    PATH = "path"
    STAR = "star"
    S_QUERY = "s-query"
    O_QUERY = "o-query"
    SO_QUERY = "so-query"


def star_centers(q: Query) -> tuple[Term, ...]:
    """Nodes that appear in every triple of q, canonical order."""
    centers = None
    for t in q.triples:
        here = set(t.nodes)
        centers = here if centers is None else centers & here
        if not centers:
            return ()
    return tuple(sorted(centers))


def so_centers(q: Query) -> tuple[Term, ...]:
    """Star centers that are the subject of at least one triple."""
    out = []
    for c in star_centers(q):
        if any(t.s == c for t in q.triples):
            out.append(c)
    return tuple(out)


def _is_path(q: Query) -> bool:
    # A directed simple path: unique out-edge per subject, unique in-edge per
    # object, one source, and a single walk that covers every triple without
    # revisiting a node.
    out_by: dict[Term, TriplePattern] = {}
    in_by: dict[Term, TriplePattern] = {}
    for t in q.triples:
        if t.s == t.o:
            return False
        if t.s in out_by or t.o in in_by:
            return False
        out_by[t.s] = t
        in_by[t.o] = t
    sources = [s for s in out_by if s not in in_by]
    if len(sources) != 1:
        return False
    node = sources[0]
    seen_nodes = {node}
    count = 0
    while node in out_by:
        t = out_by[node]
        count += 1
        node = t.o
        if node in seen_nodes:
            return False
        seen_nodes.add(node)
    return count == len(q.triples)


def classify_query(q: Query) -> frozenset[QueryShape]:
    """All shape classes q belongs to.

    A query is a generalized star when some node occurs in every triple; it is
    an s-query / o-query when some node is the subject / object of every
    triple; it is an so-query when some star center is the subject of at least
    one triple. A single-triple query without a self-loop lands in every class.
    """
    shapes = set()
    centers = star_centers(q)
    if centers:
        shapes.add(QueryShape.STAR)
    if any(all(t.s == c for t in q.triples) for c in centers):
        shapes.add(QueryShape.S_QUERY)
    if any(all(t.o == c for t in q.triples) for c in centers):
        shapes.add(QueryShape.O_QUERY)
    if so_centers(q):
        shapes.add(QueryShape.SO_QUERY)
    if _is_path(q):
        shapes.add(QueryShape.PATH)
    return frozenset(shapes)


def is_subgraph(q1: Query, q2: Query) -> bool:
    return q1.triples <= q2.triples


@dataclass(frozen=True)
class QueryDecomposition:
    """A query split into subqueries whose union is the query.

    ``centers`` records the central node each decomposer chose per subquery
    (None when no decomposer picked one, e.g. hand-built splits).
    """

    query: Query
    subqueries: tuple[Query, ...]
    centers: tuple[Term | None, ...]
    method: str

    def __post_init__(self):
        if len(self.subqueries) != len(self.centers):
            raise NotADecomposition("centers and subqueries differ in length")
        if not self.subqueries:
            raise NotADecomposition("a decomposition needs at least one subquery")
        union = set()
        for sub in self.subqueries:
            union |= sub.triples
        if union != self.query.triples:
            raise NotADecomposition("subqueries do not union to the query")

    def __len__(self) -> int:
        return len(self.subqueries)


def _compute_borders(node_sets: list[frozenset[Term]]) -> tuple[frozenset[Term], ...]:
    owner_count: dict[Term, int] = {}
    for ns in node_sets:
        for n in ns:
            owner_count[n] = owner_count.get(n, 0) + 1
    out = []
    for ns in node_sets:
        out.append(
            frozenset(n for n in ns if owner_count[n] > 1 and not n.is_literal)
        )
    return tuple(out)


@dataclass(frozen=True)
class DataDecomposition:
    """Segments of a data graph plus the border bookkeeping evaluation needs.

    For s-decompositions (segments induced by a partition of the non-literal
    nodes) ``node_blocks`` holds that node partition and ``replicated`` the
    per-segment replicated node sets; both are None for edge partitions.
    """

    graph: DataGraph
    segments: tuple[DataGraph, ...]
    method: str
    seed: int | None = None
    node_blocks: tuple[frozenset[Term], ...] | None = None
    borders: tuple[frozenset[Term], ...] = field(init=False)
    replicated: tuple[frozenset[Term], ...] | None = field(init=False)

    def __post_init__(self):
        if not self.segments:
            raise NotADecomposition("a data decomposition needs segments")
        union = set()
        for seg in self.segments:
            union |= seg.triples
        if union != self.graph.triples:
            raise NotADecomposition("segments do not union to the graph")
        borders = _compute_borders([s.nodes for s in self.segments])
        object.__setattr__(self, "borders", borders)
        repl = None
        if self.node_blocks is not None:
            if len(self.node_blocks) != len(self.segments):
                raise NotADecomposition("node blocks and segments differ in length")
            repl = tuple(
                frozenset(
                    n for n in seg.nodes if not n.is_literal and n not in block
                )
                for seg, block in zip(self.segments, self.node_blocks)
            )
        object.__setattr__(self, "replicated", repl)

    @property
    def is_s_decomposition(self) -> bool:
        return self.node_blocks is not None

    def __len__(self) -> int:
        return len(self.segments)
