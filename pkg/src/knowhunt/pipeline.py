"""Per-instance orchestration: schema, queries, retrieval, evidence, decision."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, TypeVar

from .evalharness import CopaInstance
from .evidence import DEFAULT_WEIGHTS, EvidenceSentence, Weights, assess, assess_copa
from .labels import Decision, Ordering, QueryMode
from .lexicon import Lexicon
from .querygen import DEFAULT_ALPHA, PlanError, QueryPlan, SearchQuery, build_copa, build_plan, expand
from .retrieval import DEFAULT_LIMIT, SearchProvider, Snippet
from .resolver import Resolution, backoff_random, decide_copa, decide_wsc
from .schema import ProblemInstance, SchemaError, SchemaInstance, decompose

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class PipelineConfig:
    query_mode: QueryMode = QueryMode.AGQ
    alpha: float = DEFAULT_ALPHA
    limit: int = DEFAULT_LIMIT
    weights: Weights = DEFAULT_WEIGHTS
    force_label: bool = False
    random_backoff: bool = False
    seed: int = 0
    manual_queries: Mapping[str, dict] | None = None


def _dedupe(pairs: Iterable[tuple[SearchQuery, Snippet]]) -> list[tuple[SearchQuery, Snippet]]:
    seen, out = set(), []
    for query, snip in pairs:
        key = (snip.doc_id, snip.text)
        if key in seen:
            continue
        seen.add(key)
        out.append((query, snip))
    return out


def ordered_map(fn: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> list[R]:
    """Map in a thread pool; results come back in input order."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


class Pipeline:
    def __init__(self, provider: SearchProvider, lex: Lexicon, config: PipelineConfig = PipelineConfig()):
        self.provider = provider
        self.lex = lex
        self.config = config

    # -- WSC ---------------------------------------------------------------

    def schema(self, inst: ProblemInstance) -> SchemaInstance:
        return decompose(inst, lex=self.lex)

    def plan(self, schema: SchemaInstance) -> QueryPlan:
        c = self.config
        return build_plan(schema, c.query_mode, self.lex, c.alpha, c.manual_queries)

    def _retrieve(self, queries: Iterable[SearchQuery]) -> list[tuple[SearchQuery, Snippet]]:
        return _dedupe((q, s) for q in queries for s in self.provider.search(q, self.config.limit))

    def evidence(self, inst: ProblemInstance) -> list[EvidenceSentence]:
        schema = self.schema(inst)
        plan = self.plan(schema)
        schema_order = schema.pred_c_idx[0] < schema.pred_q_idx[0]
        return [
            assess(
                snip,
                pronoun_before_pred_q=schema.pronoun_before_pred_q,
                schema_order=schema_order,
                weights=self.config.weights,
                force_label=self.config.force_label,
                lex=self.lex,
            )
            for _, snip in self._retrieve(expand(plan))
        ]

    def resolve(self, inst: ProblemInstance) -> Resolution:
        try:
            res = decide_wsc(self.evidence(inst), inst.id)
        except (SchemaError, PlanError) as exc:
            logger.warning("%s: left unanswered: %s", inst.id, exc)
            res = Resolution(inst.id, Decision.ABSTAIN)
        if self.config.random_backoff:
            res = backoff_random(res, self.config.seed)
        return res

    # -- COPA --------------------------------------------------------------

    def copa_plan(self, inst: CopaInstance) -> QueryPlan:
        return build_copa(inst.premise, inst.alt1, inst.alt2, lex=self.lex)

    def copa_evidence(self, inst: CopaInstance) -> tuple[list[EvidenceSentence], list[EvidenceSentence]]:
        queries = expand(self.copa_plan(inst), inst.relation)
        schema_order = queries[0].ordering != Ordering.Q_BEFORE_C if queries else True
        out = {}
        for target in ("q1", "q2"):
            pairs = self._retrieve(q for q in queries if q.target == target)
            out[target] = [assess_copa(s, target, schema_order, self.config.weights) for _, s in pairs]
        return out["q1"], out["q2"]

    def resolve_copa(self, inst: CopaInstance) -> Resolution:
        try:
            ev1, ev2 = self.copa_evidence(inst)
            res = decide_copa(ev1, ev2, inst.id)
        except PlanError as exc:
            logger.warning("%s: left unanswered: %s", inst.id, exc)
            res = Resolution(inst.id, Decision.ABSTAIN, task="copa")
        if self.config.random_backoff:
            res = backoff_random(res, self.config.seed)
        return res
