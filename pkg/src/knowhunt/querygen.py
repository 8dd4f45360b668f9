"""Query-set construction: automatic, synonym-augmented, filtered, manual and COPA."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

from .labels import Ordering, QueryMode, Relation
from .lexicon import Lexicon, default_lexicon, normalize_token
from .schema import (
    DETERMINERS,
    NEGATIONS,
    SchemaInstance,
    Tag,
    TokenAnnotation,
    annotate,
)

MAX_TERMS = 5
DEFAULT_ALPHA = 0.7
WINOGRAD = "Winograd"

_ADVERBIAL_PARTICLES = frozenset("up down out off away back over".split())


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class QueryPlan:
    c_terms: tuple[str, ...]
    q_terms: tuple[str, ...]
    exclusions: tuple[str, ...] = ()
    mode: QueryMode = QueryMode.AGQ
    q2_terms: tuple[str, ...] | None = None
    # part of speech for single-word terms that came out of a tagged sentence
    term_pos: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("c_terms", "q_terms", "q2_terms"):
            terms = getattr(self, name)
            if terms is None:
                continue
            if not terms:
                raise PlanError(f"{name} is empty")
            if len(terms) > MAX_TERMS:
                raise PlanError(f"{name} has {len(terms)} entries, limit is {MAX_TERMS}")
            for t in terms:
                hit = _excluded_by(t, self.exclusions)
                if hit:
                    raise PlanError(f"term {t!r} contains exclusion {hit!r}")

    @property
    def is_copa(self) -> bool:
        return self.q2_terms is not None


@dataclass(frozen=True)
class SearchQuery:
    term_c: str
    term_q: str
    exclusions: tuple[str, ...] = ()
    ordering: Ordering = Ordering.ANY
    target: str = "q"  # which set term_q came from: q, q1 or q2

    def __post_init__(self):
        if normalize_token(self.term_c) == normalize_token(self.term_q):
            raise ValueError(f"term_c and term_q are both {self.term_c!r}")


def _words(text: str) -> list[str]:
    return [normalize_token(w) for w in re.findall(r"[A-Za-z0-9'’]+", text)]


def _excluded_by(term: str, exclusions: Sequence[str]) -> str | None:
    """Exclusion hit by ``term``, compared as whole words, case-insensitively."""
    words = _words(term)
    for ex in exclusions:
        ex_words = _words(ex)
        if not ex_words:
            continue
        n = len(ex_words)
        if any(words[i : i + n] == ex_words for i in range(len(words) - n + 1)):
            return ex
    return None


def _finalize(terms: Sequence[str], exclusions: Sequence[str]) -> tuple[str, ...]:
    seen, out = set(), []
    for t in terms:
        key = t.lower()
        if not t or key in seen or _excluded_by(t, exclusions):
            continue
        seen.add(key)
        out.append(t)
    # longest phrases first; stable within equal lengths
    out.sort(key=lambda t: -len(t.split()))
    return tuple(out[:MAX_TERMS])


def _clause_terms(schema: SchemaInstance, pred_idx, clause_idx) -> tuple[list[str], dict[str, str]]:
    toks = schema.tokens
    terms = [" ".join(toks[i].token for i in pred_idx)]
    pos = {}
    main = [i for i in pred_idx if toks[i].pos == Tag.VERB]
    if main:
        terms.append(toks[main[0]].token)
        pos[toks[main[0]].token] = "Verb"
    for i in clause_idx:
        if toks[i].pos == Tag.ADJ:
            terms.append(toks[i].token)
            pos[toks[i].token] = "Adj"
    return terms, pos


def build_auto(schema: SchemaInstance) -> QueryPlan:
    """Context/query sets from the predicates' root verbs, clause adjectives and full phrases."""
    if not schema.pred_c or not schema.pred_q:
        raise PlanError(f"{schema.instance_id}: empty predicate")
    exclusions = (WINOGRAD, schema.e1_head)
    c, c_pos = _clause_terms(schema, schema.pred_c_idx, schema.context_idx)
    q, q_pos = _clause_terms(schema, schema.pred_q_idx, schema.query_idx)
    c_terms = _finalize(c, exclusions)
    q_terms = _finalize(q, exclusions)
    if not c_terms or not q_terms:
        raise PlanError(f"{schema.instance_id}: every term was excluded")
    return QueryPlan(c_terms, q_terms, exclusions, QueryMode.AGQ, term_pos={**c_pos, **q_pos})


def _term_pos(term: str, plan: QueryPlan, lex: Lexicon) -> str | None:
    if term in plan.term_pos:
        return plan.term_pos[term]
    for pos in ("Verb", "Adj"):
        if lex.senses(term, pos):
            return pos
    return None


def _augment(terms: tuple[str, ...], plan: QueryPlan, lex: Lexicon) -> tuple[tuple[str, ...], dict]:
    out = list(terms)
    have = {t.lower() for t in terms}
    added_pos = {}
    for t in terms:
        if " " in t:
            continue
        pos = _term_pos(t, plan, lex)
        if pos not in ("Verb", "Adj"):
            continue
        for syn in lex.synonym_list(t, pos):
            if syn.lower() in have or _excluded_by(syn, plan.exclusions):
                continue
            have.add(syn.lower())
            out.append(syn)
            added_pos[syn] = pos
    return tuple(out[:MAX_TERMS]), added_pos


def augment_synonyms(plan: QueryPlan, lex: Lexicon | None = None) -> QueryPlan:
    """Append top-synset synonyms of single-word verb/adjective terms."""
    if plan.mode != QueryMode.AGQ:
        raise PlanError(f"synonym augmentation expects an AGQ plan, got {plan.mode}")
    lex = lex or default_lexicon()
    c, c_pos = _augment(plan.c_terms, plan, lex)
    q, q_pos = _augment(plan.q_terms, plan, lex)
    q2, q2_pos = (None, {}) if plan.q2_terms is None else _augment(plan.q2_terms, plan, lex)
    term_pos = {**plan.term_pos, **c_pos, **q_pos, **q2_pos}
    return replace(plan, c_terms=c, q_terms=q, q2_terms=q2, mode=QueryMode.AGQS, term_pos=term_pos)


def _filter_pair(c_terms, q_terms, alpha, lex):
    c_single = [t for t in c_terms if " " not in t]
    q_single = [t for t in q_terms if " " not in t]
    if not c_single or not q_single:
        return c_terms, q_terms
    best = {}
    for c in c_single:
        for q in q_single:
            s = lex.word_similarity(c, q)
            best[("c", c)] = max(best.get(("c", c), 0.0), s)
            best[("q", q)] = max(best.get(("q", q), 0.0), s)
    threshold = alpha * max(best.values())

    def keep(side, terms, singles):
        kept = tuple(t for t in terms if " " in t or best[(side, t)] >= threshold)
        if not kept:
            top = max(singles, key=lambda t: best[(side, t)])
            kept = (top,)
        return kept

    return keep("c", c_terms, c_single), keep("q", q_terms, q_single)


def semantic_filter(plan: QueryPlan, alpha: float = DEFAULT_ALPHA, lex: Lexicon | None = None) -> QueryPlan:
    """Drop single-word terms whose best cross-set similarity is below alpha times the overall best.

    Multi-word terms are never dropped.  For COPA plans each alternative set
    is filtered against the context set independently and the context set
    keeps the union of what either pass retained.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    lex = lex or default_lexicon()
    c, q = _filter_pair(plan.c_terms, plan.q_terms, alpha, lex)
    q2 = plan.q2_terms
    if q2 is not None:
        c2, q2 = _filter_pair(plan.c_terms, q2, alpha, lex)
        c = tuple(t for t in plan.c_terms if t in c or t in c2)
    return replace(plan, c_terms=c, q_terms=q, q2_terms=q2, mode=QueryMode.AGQSF)


def read_manual_queries(path: str | Path) -> dict[str, dict]:
    rows = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            for key in ("id", "c_terms", "q_terms"):
                if key not in rec:
                    raise PlanError(f"{path}:{lineno}: missing {key!r}")
            rows[rec["id"]] = rec
    return rows


def load_manual(
    path: str | Path | Mapping[str, dict], instance_id: str, e1_head: str | None = None
) -> QueryPlan:
    """Hand-written query sets for one instance, capped at five entries each."""
    rows = path if isinstance(path, Mapping) else read_manual_queries(path)
    if instance_id not in rows:
        raise PlanError(f"no manual queries for instance {instance_id!r}")
    rec = rows[instance_id]
    exclusions = (WINOGRAD, e1_head) if e1_head else (WINOGRAD,)

    def clean(terms):
        seen, out = set(), []
        for t in terms:
            if t.lower() not in seen and not _excluded_by(t, exclusions):
                seen.add(t.lower())
                out.append(t)
        return tuple(out[:MAX_TERMS])

    return QueryPlan(clean(rec["c_terms"]), clean(rec["q_terms"]), exclusions, QueryMode.MGQ)


def _np_end(toks: Sequence[TokenAnnotation], j: int, end: int) -> int:
    """Index just past a noun phrase starting at ``j`` (or ``j`` if there is none)."""
    k = j
    seen_noun = False
    while k < end:
        t = toks[k]
        w = normalize_token(t.token)
        if t.pos == Tag.NOUN:
            seen_noun = True
        elif seen_noun:
            break
        elif not (w in DETERMINERS or t.pos in (Tag.ADJ, Tag.PRON)):
            break
        k += 1
        if not seen_noun and t.pos == Tag.PRON and w not in ("his", "her", "its", "their", "my", "your", "our"):
            break
    if k == j:
        return j
    words = [normalize_token(toks[i].token) for i in range(j, k)]
    if seen_noun or toks[k - 1].pos == Tag.PRON or words[-2:] in (["each", "other"], ["one", "another"]):
        return k
    return j


def copa_levels(text: str, annotations: Sequence[TokenAnnotation] | None = None, lex: Lexicon | None = None) -> list[str]:
    """Back-off levels for one COPA sentence: clause, verb phrase, then its verbs/adjectives."""
    toks = list(annotations if annotations is not None else annotate(text, lex=lex))
    end = len(toks)
    while end and not toks[end - 1].token[0].isalnum():
        end -= 1
    v = next((i for i in range(end) if toks[i].pos in (Tag.VERB, Tag.AUX)), None)
    if v is None:
        raise PlanError(f"no verb found in {text!r}")
    k = v
    while k < end and (toks[k].pos in (Tag.VERB, Tag.AUX) or normalize_token(toks[k].token) in NEGATIONS):
        k += 1
    roots = [i for i in range(v, k) if toks[i].pos == Tag.VERB]
    # copular complement: "was tired", "is very old"
    j = k
    while j < end and (toks[j].pos == Tag.ADJ or normalize_token(toks[j].token) in ("so", "too", "very", "really")):
        j += 1
    adjs = [i for i in range(k, j) if toks[i].pos == Tag.ADJ]
    if adjs:
        k = j
        roots.extend(adjs)
    else:
        while k < end and normalize_token(toks[k].token) in _ADVERBIAL_PARTICLES:
            k += 1
        k = _np_end(toks, k, end)
    if not roots:
        raise PlanError(f"no main verb or adjective in {text!r}")

    def span(a, b):
        return text[toks[a].char_start : toks[b - 1].char_end]

    levels = [span(0, k), span(v, k)] + [toks[i].token for i in roots]
    seen, out = set(), []
    for lvl in levels:
        if lvl.lower() not in seen:
            seen.add(lvl.lower())
            out.append(lvl)
    return out[:MAX_TERMS]


def build_copa(
    premise: str,
    alt1: str,
    alt2: str,
    annotations: Mapping[str, Sequence[TokenAnnotation]] | None = None,
    lex: Lexicon | None = None,
) -> QueryPlan:
    annotations = annotations or {}
    sets = []
    for name, text in (("premise", premise), ("alt1", alt1), ("alt2", alt2)):
        if not text or not text.strip():
            raise PlanError(f"{name} is empty")
        sets.append(tuple(copa_levels(text, annotations.get(text), lex)))
    return QueryPlan(sets[0], sets[1], (), QueryMode.AGQ, q2_terms=sets[2])


def copa_ordering(relation: Relation) -> Ordering:
    # cause: Term_C must precede the alternative's term; result: it must follow it
    return Ordering.C_BEFORE_Q if Relation(relation) == Relation.CAUSE else Ordering.Q_BEFORE_C


def expand(plan: QueryPlan, relation: Relation | None = None) -> list[SearchQuery]:
    """Cross product of the context set with each candidate set."""
    if plan.is_copa:
        if relation is None:
            raise PlanError("COPA plans need a relation to fix the term ordering")
        ordering = copa_ordering(relation)
        targets = (("q1", plan.q_terms), ("q2", plan.q2_terms))
    else:
        ordering = Ordering.ANY
        targets = (("q", plan.q_terms),)
    out = []
    for target, terms in targets:
        for c in plan.c_terms:
            for q in terms:
                if normalize_token(c) == normalize_token(q):
                    continue
                out.append(SearchQuery(c, q, plan.exclusions, ordering, target))
    return out


def build_plan(
    schema: SchemaInstance,
    mode: str | QueryMode,
    lex: Lexicon | None = None,
    alpha: float = DEFAULT_ALPHA,
    manual: str | Path | Mapping[str, dict] | None = None,
) -> QueryPlan:
    mode = QueryMode(mode)
    if mode == QueryMode.MGQ:
        if manual is None:
            raise PlanError("manual query mode needs a manual-query file")
        return load_manual(manual, schema.instance_id, schema.e1_head)
    plan = build_auto(schema)
    if mode in (QueryMode.AGQS, QueryMode.AGQSF):
        plan = augment_synonyms(plan, lex)
    if mode == QueryMode.AGQSF:
        plan = semantic_filter(plan, alpha, lex)
    return plan
