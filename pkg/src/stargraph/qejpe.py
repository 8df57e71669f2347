"""Evaluation by joining useful partial embeddings (the general algorithm).

Works for any query decomposition over any data partition. Three stages:

1. For every (subquery, segment) pair the mapper enumerates the useful partial
   embeddings and keys them by subquery. The reducer joins the fragments of
   one subquery into its total embeddings, then emits each total twice over:
   once as an ("e", bnv, nbnv) record keyed by its subquery, and once per
   missing-border pair as a candidate ("v", position, value) record keyed by
   the subquery lacking that border node.
2. Border completion (shared): unbound border positions are filled from the
   candidate sets, yielding fully ground border vectors.
3. Final join (shared): group by border vector, require every subquery,
   merge non-border values, project the output pattern.
"""

from __future__ import annotations

from .embedding import (
    Embedding,
    encode,
    enumerate_useful_partial,
    preprocess,
    totals_from_fragments,
)
from .errors import NotADecomposition
from .evalcore import (
    CARTESIAN_CAP,
    EvalResult,
    answers_from_records,
    coerce_data,
    phase2_expand_fn,
    reduce2_fn,
    subquery_triple_maps,
)
from .model import DataDecomposition, Query, QueryDecomposition
from .runtime import Job, run_job

__all__ = ["qejpe_map1_records", "qejpe_reduce1_fn", "run_qejpe"]


def qejpe_map1_records(layout, sub_idx: int, segment, seg_idx: int, border):
    """Useful partial fragments of one subquery against one segment, as
    shuffle records keyed by subquery index. Pure, for direct testing."""
    to_query, _ = subquery_triple_maps(layout)
    sub = layout.subqueries[sub_idx]
    out = []
    for emb, matched in enumerate_useful_partial(sub, segment, border):
        enc = encode(emb, layout, matched=(to_query[sub_idx][i] for i in matched))
        out.append((sub_idx, ("f", seg_idx, enc.bnv, enc.nbnv, enc.tm)))
    return out


def qejpe_reduce1_fn(layout, *, cap: int = CARTESIAN_CAP, distinct_segments: bool = False):
    to_query, to_sub = subquery_triple_maps(layout)

    def fn(key, values, em):
        sub_idx = key
        sub = layout.subqueries[sub_idx]
        back = to_sub[sub_idx]
        fragments = []
        for tag, seg_idx, bnv, nbnv, tm in values:
            assert tag == "f"
            mapping = {}
            for node, v in zip(layout.border_nodes, bnv):
                if v is not None:
                    mapping[node] = v
            for node, v in zip(layout.nonborder_nodes, nbnv):
                if v is not None:
                    mapping[node] = v
            matched = frozenset(back[q] for q in range(len(tm)) if tm[q] and q in back)
            fragments.append((Embedding(mapping), matched, seg_idx))
        totals = totals_from_fragments(
            sub, fragments, distinct_segments=distinct_segments, cap=cap
        )
        for e in totals:
            enc = encode(e, layout)
            em.emit(sub_idx, ("e", enc.bnv, enc.nbnv))
            for node, j in layout.missing_border:
                if node in e:
                    em.emit(j, ("v", layout.node_index[node], e[node]))

    return fn


def run_qejpe(
    data,
    query: Query | None,
    decomposition: QueryDecomposition,
    *,
    workers: int = 1,
    spill_threshold: int | None = None,
    cartesian_cap: int = CARTESIAN_CAP,
    distinct_segments: bool = False,
) -> EvalResult:
    dec_data: DataDecomposition = coerce_data(data)
    if query is not None and decomposition.query != query:
        raise NotADecomposition("decomposition does not belong to this query")
    layout = preprocess(decomposition)

    def map1(key, _value, em):
        i, j = key
        for rec_key, rec_val in qejpe_map1_records(
            layout, i, dec_data.segments[j], j, dec_data.borders[j]
        ):
            em.emit(rec_key, rec_val)

    source = [
        ((i, j), None)
        for i in range(len(layout.subqueries))
        for j in range(len(dec_data.segments))
    ]
    j1 = run_job(
        Job("useful-partials", map1, qejpe_reduce1_fn(layout, cap=cartesian_cap, distinct_segments=distinct_segments)),
        source,
        workers=workers,
        spill_threshold=spill_threshold,
    )
    j2 = run_job(
        Job("complete-borders", None, phase2_expand_fn(layout, cartesian_cap)),
        j1.records,
        workers=workers,
        spill_threshold=spill_threshold,
    )
    j3 = run_job(
        Job("join-answers", None, reduce2_fn(layout, cartesian_cap)),
        j2.records,
        workers=workers,
        spill_threshold=spill_threshold,
    )
    counts: dict[int, int] = {i: 0 for i in range(len(layout.subqueries))}
    for key, val in j1.records:
        if val[0] == "e":
            counts[key] += 1
    return EvalResult(
        algorithm="qejpe",
        answers=answers_from_records(layout, j3.records),
        stats=[j1.stats, j2.stats, j3.stats],
        subquery_embeddings=counts,
        workers=workers,
    )
