"""Shared fixtures: a small bibliography graph, three queries over it, and
the frozen partitions and decompositions the golden tests rely on."""

import pytest

import stargraph as sg

BIBLIOGRAPHY = """\
<Article1> <hasAuthor> <Person1> .
<Article1> <hasAuthor> <Person2> .
<Article1> <hasAuthor> <Person4> .
<Article2> <hasAuthor> <Person2> .
<Article2> <hasAuthor> <Person3> .
<Article3> <hasAuthor> <Person4> .
<Person4> <hasSupervisor> <Person1> .
<Person2> <hasSupervisor> <Person3> .
<Article1> <publishedIn> <Journal1> .
<Article2> <publishedIn> <Journal1> .
<Article3> <publishedIn> <Journal2> .
<Article1> <title> "Title1" .
<Article2> <title> "Title2" .
<Article2> <year> "2008" .
<Article3> <year> "2008" .
"""

JOURNAL_ARTICLE_QUERY = """\
?A <hasAuthor> ?W .
?A <title> ?T .
?A <year> "2008" .
?A <publishedIn> <Journal1> .
"""

SUPERVISOR_QUERY = """\
?A <hasAuthor> ?P1 .
?P1 <hasSupervisor> ?P2 .
?A <hasAuthor> ?P2 .
?A <publishedIn> <Journal1> .
?A <title> ?T .
"""

COAUTHOR_QUERY = """\
?A <hasAuthor> ?P1 .
?A <hasAuthor> ?P2 .
?A <publishedIn> ?J .
?A <year> "2008" .
<Article1> <hasAuthor> ?P1 .
<Article1> <publishedIn> ?J .
<Article1> <title> ?T .
?P1 <hasSupervisor> ?P2 .
"""

# Hand-picked triple-to-block map: block 0 around Article3 plus two Article1
# edges, block 1 the authorship/supervision core, block 2 the Journal1 side.
EDGE_BLOCKS = {
    "<Article1> <hasAuthor> <Person4> .": 0,
    '<Article1> <title> "Title1" .': 0,
    "<Article3> <hasAuthor> <Person4> .": 0,
    "<Article3> <publishedIn> <Journal2> .": 0,
    '<Article3> <year> "2008" .': 0,
    "<Article1> <hasAuthor> <Person1> .": 1,
    "<Article1> <hasAuthor> <Person2> .": 1,
    "<Article2> <hasAuthor> <Person2> .": 1,
    "<Article2> <hasAuthor> <Person3> .": 1,
    "<Person4> <hasSupervisor> <Person1> .": 1,
    "<Person2> <hasSupervisor> <Person3> .": 1,
    "<Article1> <publishedIn> <Journal1> .": 2,
    "<Article2> <publishedIn> <Journal1> .": 2,
    '<Article2> <title> "Title2" .': 2,
    '<Article2> <year> "2008" .': 2,
}

NODE_BLOCKS = (
    ("<Article1>", "<Article3>", "<Journal2>", "<Person4>"),
    ("<Person1>", "<Person2>", "<Person3>"),
    ("<Article2>", "<Journal1>"),
)


def q3(s, p, o):
    """Shorthand: build a pattern from three tokens."""
    return sg.TriplePattern(
        sg.ntio.term_from_token(s),
        sg.ntio.term_from_token(p),
        sg.ntio.term_from_token(o),
    )


@pytest.fixture(scope="session")
def bibliography():
    return sg.parse_data(BIBLIOGRAPHY)


@pytest.fixture(scope="session")
def journal_article_query():
    return sg.parse_query(JOURNAL_ARTICLE_QUERY)


@pytest.fixture(scope="session")
def supervisor_query():
    return sg.parse_query(SUPERVISOR_QUERY)


@pytest.fixture(scope="session")
def coauthor_query():
    return sg.parse_query(COAUTHOR_QUERY)


@pytest.fixture(scope="session")
def edge_split(bibliography):
    """Three-segment edge partition of the bibliography graph, imported from
    an explicit assignment so every test sees the same borders."""
    return sg.from_edge_assignment(bibliography, EDGE_BLOCKS)


@pytest.fixture(scope="session")
def node_split(bibliography):
    """Three-block node partition of the bibliography graph (segments carry
    replicated cross-block triples)."""
    blocks = [
        frozenset(sg.ntio.term_from_token(tok) for tok in blk) for blk in NODE_BLOCKS
    ]
    return sg.s_decompose(bibliography, blocks)


@pytest.fixture(scope="session")
def supervisor_decomposition(supervisor_query):
    """The three-subquery split of the supervisor query used by the golden
    tests: authorship+title star, coauthor+journal star, supervision edge."""
    a, p1, p2, t = "?A", "?P1", "?P2", "?T"
    sub1 = sg.Query(
        [q3(a, "<hasAuthor>", p1), q3(a, "<title>", t)]
    )
    sub2 = sg.Query(
        [q3(a, "<hasAuthor>", p2), q3(a, "<publishedIn>", "<Journal1>")]
    )
    sub3 = sg.Query([q3(p1, "<hasSupervisor>", p2)])
    centers = (
        sg.variable("A"),
        sg.variable("A"),
        sg.variable("P1"),
    )
    return sg.QueryDecomposition(
        supervisor_query, (sub1, sub2, sub3), centers, method="fixture"
    )


@pytest.fixture(scope="session")
def coauthor_cover_decomposition(coauthor_query):
    """Star decomposition of the coauthor query from the node cover
    {Article1, ?A, ?P2}."""
    cover = {
        sg.iri("Article1"),
        sg.variable("A"),
        sg.variable("P2"),
    }
    return sg.star_decomposition_from_cover(coauthor_query, cover)


@pytest.fixture(scope="session")
def oracle_answers_supervisor(supervisor_query, bibliography):
    return sg.oracle_answers(supervisor_query, bibliography)
