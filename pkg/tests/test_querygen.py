import json

import pytest
from hypothesis import given, settings, strategies as st

from knowhunt.labels import Ordering, QueryMode, Relation
from knowhunt.querygen import (
    MAX_TERMS,
    PlanError,
    QueryPlan,
    SearchQuery,
    augment_synonyms,
    build_auto,
    build_copa,
    build_plan,
    copa_levels,
    expand,
    load_manual,
    semantic_filter,
)
from knowhunt.schema import ProblemInstance, decompose

TROPHY = "The trophy doesn't fit into the brown suitcase because it is too large."


@pytest.fixture(scope="module")
def trophy():
    return decompose(ProblemInstance.from_strings("t", TROPHY, "The trophy", "the brown suitcase", "it", "agent", "t"))


def test_build_auto_trophy(trophy):
    plan = build_auto(trophy)
    assert set(plan.c_terms) == {"doesn't fit into", "brown", "fit"}
    assert set(plan.q_terms) == {"large", "is too large"}
    assert plan.exclusions == ("Winograd", "trophy")
    assert plan.mode == QueryMode.AGQ
    assert plan.c_terms[0] == "doesn't fit into"


def test_build_auto_bullying():
    text = "The older students were bullying the younger ones, so we punished them."
    s = decompose(ProblemInstance.from_strings("b", text, "The older students", "the younger ones", "them", None, "b"))
    plan = build_auto(s)
    assert "were bullying" in plan.c_terms
    assert "punished" in plan.q_terms


def test_augment_trophy(trophy):
    plan = augment_synonyms(build_auto(trophy))
    assert set(plan.c_terms) == {"doesn't fit into", "brown", "fit", "accommodate", "suit"}
    assert set(plan.q_terms) == {"large", "is too large", "big"}
    assert plan.mode == QueryMode.AGQS


def test_augment_multiword_only():
    plan = QueryPlan(("tried to call",), ("wasn't successful",))
    out = augment_synonyms(plan)
    assert (out.c_terms, out.q_terms) == (plan.c_terms, plan.q_terms)


def test_augment_unknown_term():
    plan = QueryPlan(("zorbled",), ("blicky",))
    out = augment_synonyms(plan)
    assert (out.c_terms, out.q_terms) == (("zorbled",), ("blicky",))


def test_augment_requires_agq():
    with pytest.raises(PlanError):
        augment_synonyms(QueryPlan(("a",), ("b",), mode=QueryMode.MGQ))


def test_filter_bullying_example():
    plan = QueryPlan(("bullying", "younger", "older"), ("punished",), mode=QueryMode.AGQS)
    out = semantic_filter(plan, 0.7)
    assert set(out.c_terms) == {"bullying"} and set(out.q_terms) == {"punished"}
    assert out.mode == QueryMode.AGQSF


def test_filter_multiword_untouched():
    plan = QueryPlan(("tried to call",), ("wasn't successful", "was not home"))
    out = semantic_filter(plan, 0.9)
    assert (out.c_terms, out.q_terms) == (plan.c_terms, plan.q_terms)


def test_filter_single_pair_kept():
    plan = QueryPlan(("older",), ("punished",))
    out = semantic_filter(plan, 0.99)
    assert (out.c_terms, out.q_terms) == (("older",), ("punished",))


def test_filter_rejects_bad_alpha():
    with pytest.raises(ValueError):
        semantic_filter(QueryPlan(("a",), ("b",)), 1.5)


def test_manual_trophy(data):
    plan = load_manual(data / "manual_queries.jsonl", "wsc-004a", "trophy")
    assert set(plan.c_terms) == {"doesn't fit into", "fit into", "doesn't fit"}
    assert set(plan.q_terms) == {"is too large", "too large", "large"}
    assert plan.mode == QueryMode.MGQ


def test_manual_missing_id(data):
    with pytest.raises(PlanError):
        load_manual(data / "manual_queries.jsonl", "nope")


def test_manual_truncated(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text(json.dumps({"id": "a", "c_terms": [f"c{i}" for i in range(7)], "q_terms": ["q"]}) + "\n")
    plan = load_manual(p, "a")
    assert len(plan.c_terms) == MAX_TERMS


def test_build_plan_manual_needs_file(trophy):
    with pytest.raises(PlanError):
        build_plan(trophy, QueryMode.MGQ)


def test_plan_invariants():
    with pytest.raises(PlanError):
        QueryPlan((), ("b",))
    with pytest.raises(PlanError):
        QueryPlan(tuple("abcdef"), ("b",))
    with pytest.raises(PlanError):
        QueryPlan(("the Winograd test",), ("b",), exclusions=("winograd",))


def test_search_query_terms_differ():
    with pytest.raises(ValueError):
        SearchQuery("fit", "Fit")


def test_copa_climbers():
    plan = build_copa(
        "The climbers reached the peak of the mountain.",
        "They encountered an avalanche.",
        "They congratulated each other.",
    )
    assert set(plan.c_terms) == {"The climbers reached the peak", "reached the peak", "reached"}
    assert set(plan.q_terms) == {"They encountered an avalanche", "encountered an avalanche", "encountered"}
    assert set(plan.q2_terms) == {"They congratulated each other", "congratulated each other", "congratulated"}
    assert plan.exclusions == ()


def test_copa_levels_collapse():
    assert copa_levels("It rained.") == ["It rained", "rained"]


def test_copa_empty_alternative():
    with pytest.raises(PlanError):
        build_copa("It rained.", "", "The grass got wet.")


def test_copa_no_verb():
    with pytest.raises(PlanError):
        build_copa("The red box.", "It fell.", "It broke.")


def test_expand_sizes(trophy):
    plan = QueryPlan(("a", "b", "c"), ("x", "y"), ("Winograd", "trophy"))
    qs = expand(plan)
    assert len(qs) == 6
    assert all(q.exclusions == ("Winograd", "trophy") and q.ordering == Ordering.ANY for q in qs)
    assert len(expand(QueryPlan(("a",), ("x",)))) == 1


def test_expand_copa_ordering():
    plan = QueryPlan(("a", "b"), ("x",), q2_terms=("y", "z"))
    cause = expand(plan, Relation.CAUSE)
    assert len(cause) == 6
    assert {q.target for q in cause} == {"q1", "q2"}
    assert all(q.ordering == Ordering.C_BEFORE_Q for q in cause)
    assert all(q.ordering == Ordering.Q_BEFORE_C for q in expand(plan, Relation.RESULT))
    with pytest.raises(PlanError):
        expand(plan)


_VOCAB = ["bullying", "younger", "older", "punished", "fit", "large", "big", "weak", "heavy", "lift", "upset", "yell"]


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.sampled_from(_VOCAB), min_size=1, max_size=5, unique=True),
    st.lists(st.sampled_from(_VOCAB), min_size=1, max_size=5, unique=True),
    st.floats(0.05, 0.9),
    st.floats(0.0, 0.09),
)
def test_filter_properties(c, q, alpha, bump):
    q = [t for t in q if t not in c] or ["was so upset"]
    plan = QueryPlan(tuple(c), tuple(q), mode=QueryMode.AGQS)
    once = semantic_filter(plan, alpha)
    assert set(once.c_terms) <= set(c) and set(once.q_terms) <= set(q)
    assert once.c_terms and once.q_terms
    twice = semantic_filter(once, alpha)
    assert (twice.c_terms, twice.q_terms) == (once.c_terms, once.q_terms)
    higher = semantic_filter(plan, alpha + bump)
    assert set(higher.c_terms) <= set(once.c_terms) and set(higher.q_terms) <= set(once.q_terms)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.sampled_from(_VOCAB), min_size=1, max_size=3, unique=True))
def test_augment_keeps_terms(terms):
    plan = QueryPlan(tuple(terms), ("was so upset",))
    out = augment_synonyms(plan)
    assert out.c_terms[: len(terms)] == tuple(terms)
    assert len(out.c_terms) <= MAX_TERMS


def test_expand_terms_from_sets(data):
    from knowhunt.schema import load_wsc

    for item in load_wsc(data / "wsc_sample.jsonl"):
        s = decompose(item)
        for mode in (QueryMode.AGQ, QueryMode.AGQS, QueryMode.AGQSF):
            plan = build_plan(s, mode)
            for q in expand(plan):
                assert q.term_c in plan.c_terms and q.term_q in plan.q_terms
                assert q.exclusions == ("Winograd", s.e1_head)
