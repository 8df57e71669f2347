"""Brute-force reconstruction checks behind the evaluation strategy.

Every test here re-derives, on at least a hundred small random instances,
one of the structural facts the engines rely on:

- fragment reconstruction: total embeddings of a query are exactly the joins
  of mutually compatible useful partial embeddings drawn from the segments
  of an edge partition, covering every triple;
- subquery reconstruction: total embeddings of a query are exactly the
  compatible joins of total embeddings of its decomposition's subqueries;
- the two combined (per-subquery totals built from fragments, then joined);
- locality: with an all-so decomposition over a node-partition with
  replicated border triples, each subquery total lives whole inside at least
  one segment, and the global answers are the joins of those local totals;
- border agreement: two subquery totals are compatible exactly when they
  agree on the shared non-literal nodes of their subqueries;
- the structural properties of node partitions with replication (coverage,
  replicated nodes and triples always owned elsewhere, and so on).
"""

import itertools

import pytest

import stargraph as sg
from stargraph.embedding import enumerate_useful_partial, totals_from_fragments

DECOMPOSERS = sorted(sg.DECOMPOSERS)

STATE_GUARD = 100_000


def instance(uid, *, max_graph=50, max_query=6):
    g = sg.generate_graph(5 + uid % (max_graph - 4), seed=uid * 31 + 7)
    q = sg.generate_query(g, 1 + uid % max_query, seed=uid * 53 + 11)
    return g, q


def decomposer_for(uid):
    return sg.DECOMPOSERS[DECOMPOSERS[uid % len(DECOMPOSERS)]]


def edge_partition(g, uid):
    m = min(1 + uid % 4, len(g))
    return sg.edge_random_partition(g, m, seed=uid)


def node_partition(g, uid):
    non_literal = sum(1 for n in g.nodes if not n.is_literal)
    m = min(1 + uid % 4, non_literal)
    return sg.vertex_hash_partition(g, m, seed=uid)


def fragments_of(sub, data):
    frags = []
    for j, seg in enumerate(data.segments):
        for e, matched in enumerate_useful_partial(sub, seg, data.borders[j]):
            frags.append((e, matched, j))
    return frags


def incremental_join(total_sets):
    """All compatible joins taking one embedding from each set; None when the
    intermediate state count escapes the guard."""
    states = {sg.Embedding({})}
    for totals in total_sets:
        nxt = set()
        for s in states:
            for e in totals:
                if sg.is_compatible(s, e):
                    nxt.add(sg.join(s, e))
                    if len(nxt) > STATE_GUARD:
                        return None
        states = nxt
        if not states:
            break
    return states


def run_instances(check, count=120, floor=100):
    evaluated = 0
    for uid in range(count):
        if check(uid):
            evaluated += 1
    assert evaluated >= floor


class TestFragmentReconstruction:
    def test_totals_are_joins_of_useful_partials(self):
        def check(uid):
            g, q = instance(uid)
            data = edge_partition(g, uid)
            rebuilt = set(totals_from_fragments(q, fragments_of(q, data)))
            assert rebuilt == set(sg.enumerate_total(q, g))
            return True

        run_instances(check)


class TestSubqueryReconstruction:
    def test_totals_are_joins_of_subquery_totals(self):
        def check(uid):
            g, q = instance(uid)
            dec = decomposer_for(uid)(q)
            sets = [set(sg.enumerate_total(sub, g)) for sub in dec.subqueries]
            joined = incremental_join(sets)
            if joined is None:
                return False
            assert joined == set(sg.enumerate_total(q, g))
            return True

        run_instances(check)

    def test_pairwise_compatibility_equals_joinability(self):
        # the incremental join above is justified by this: a join of several
        # embeddings is compatible with another one exactly when each of the
        # joined embeddings is
        def check(uid):
            g, q = instance(uid, max_query=5)
            dec = decomposer_for(uid)(q)
            if len(dec) < 3:
                return False
            sets = [sg.enumerate_total(sub, g)[:6] for sub in dec.subqueries]
            seen = False
            for a, b, c in itertools.combinations(range(len(dec)), 3):
                for e1, e2 in itertools.product(sets[a], sets[b]):
                    if not sg.is_compatible(e1, e2):
                        continue
                    j12 = sg.join(e1, e2)
                    for e3 in sets[c]:
                        seen = True
                        assert sg.is_compatible(j12, e3) == (
                            sg.is_compatible(e1, e3) and sg.is_compatible(e2, e3)
                        )
            return seen

        run_instances(check, count=800, floor=100)


class TestTwoLevelReconstruction:
    def test_subquery_totals_from_fragments_then_joined(self):
        def check(uid):
            g, q = instance(uid)
            dec = decomposer_for(uid)(q)
            data = edge_partition(g, uid)
            sets = []
            for sub in dec.subqueries:
                sets.append(set(totals_from_fragments(sub, fragments_of(sub, data))))
            joined = incremental_join(sets)
            if joined is None:
                return False
            assert joined == set(sg.enumerate_total(q, g))
            return True

        run_instances(check)


class TestSingleSegmentLocality:
    def test_so_subquery_totals_live_inside_one_segment(self):
        def check(uid):
            g, q = instance(uid)
            dec = decomposer_for(uid)(q)
            assert sg.validate_decomposition(q, dec).all_so
            data = node_partition(g, uid)
            sets = []
            for sub in dec.subqueries:
                local = set()
                for seg in data.segments:
                    local |= set(sg.enumerate_total(sub, seg))
                assert local == set(sg.enumerate_total(sub, g))
                sets.append(local)
            joined = incremental_join(sets)
            if joined is None:
                return False
            assert joined == set(sg.enumerate_total(q, g))
            return True

        run_instances(check)


class TestBorderAgreement:
    def test_compatibility_reduces_to_shared_nodes(self):
        def check(uid):
            g, q = instance(uid, max_query=5)
            dec = decomposer_for(uid)(q)
            if len(dec) < 2:
                return False
            totals = [sg.enumerate_total(sub, g)[:10] for sub in dec.subqueries]
            checked = False
            for i, j in itertools.combinations(range(len(dec)), 2):
                shared = frozenset(
                    n
                    for n in dec.subqueries[i].nodes & dec.subqueries[j].nodes
                    if not n.is_literal
                )
                for ei, ej in itertools.product(totals[i], totals[j]):
                    checked = True
                    agree = sg.restrict(ei, shared) == sg.restrict(ej, shared)
                    assert sg.is_compatible(ei, ej) == agree
            return checked

        run_instances(check, count=200, floor=100)


class TestNodePartitionProperties:
    def test_replication_bookkeeping(self):
        def check(uid):
            g, _ = instance(uid)
            data = node_partition(g, uid)
            blocks = data.node_blocks
            literals = {n for n in g.nodes if n.is_literal}

            covered_nodes = set()
            covered_triples = set()
            for i, seg in enumerate(data.segments):
                seg_nodes = seg.nodes
                # owned nodes all appear locally
                assert blocks[i] <= seg_nodes - literals
                covered_nodes |= seg_nodes
                covered_triples |= seg.triples

                replicated = data.replicated[i]
                assert replicated == (seg_nodes - literals) - blocks[i]
                for t in seg.canonical:
                    if t.s in replicated:
                        # a foreign subject is only here because the object
                        # is owned, and the triple also lives where the
                        # subject is owned
                        assert t.o in blocks[i]
                    if t.o in replicated:
                        assert t.s in blocks[i]
                for n in replicated:
                    owners = [j for j, blk in enumerate(blocks) if n in blk]
                    assert owners and owners != [i]
                replicated_triples = {
                    t for t in seg.triples if t.s in replicated or t.o in replicated
                }
                for t in replicated_triples:
                    assert any(
                        t in data.segments[j].triples
                        for j in range(len(data.segments))
                        if j != i
                    )
            # the segments cover every node and every triple
            assert covered_nodes == g.nodes
            assert covered_triples == g.triples
            return True

        run_instances(check)
