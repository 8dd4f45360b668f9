"""scikit-learn style front end.

``fit`` does no learning.  It validates the configuration and loads the
lexicon, the manual queries and the retrieval backend, so that
``predict``/``score`` can run the pipeline over lists of instances::

    hunter = KnowledgeHunter(fixtures="lift_weak.jsonl").fit()
    hunter.predict(instances)      # array of "agent" / "patient" / "abstain"
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .evalharness import CopaInstance, EvalReport, evaluate_copa, evaluate_wsc
from .labels import Decision
from .lexicon import Lexicon
from .pipeline import Pipeline, PipelineConfig, ordered_map
from .querygen import DEFAULT_ALPHA, read_manual_queries
from .retrieval import DEFAULT_LIMIT, CorpusProvider, FixtureProvider, build_index, load_index
from .schema import ProblemInstance
from .validation import (
    ConfigError,
    check_alpha,
    check_gold,
    check_instances,
    check_path,
    check_positive_int,
    check_provider,
    check_query_mode,
    check_weights,
)


class _HunterBase(BaseEstimator):
    _instance_type: type = ProblemInstance

    def __init__(
        self,
        query_mode="auto",
        alpha=DEFAULT_ALPHA,
        provider=None,
        corpus_dir=None,
        index_path=None,
        fixtures=None,
        manual_queries=None,
        limit=DEFAULT_LIMIT,
        weights=None,
        force_label=False,
        random_backoff=False,
        seed=0,
        lexicon_dir=None,
        n_jobs=1,
    ):
        self.query_mode = query_mode
        self.alpha = alpha
        self.provider = provider
        self.corpus_dir = corpus_dir
        self.index_path = index_path
        self.fixtures = fixtures
        self.manual_queries = manual_queries
        self.limit = limit
        self.weights = weights
        self.force_label = force_label
        self.random_backoff = random_backoff
        self.seed = seed
        self.lexicon_dir = lexicon_dir
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        """Validate parameters and load resources.

        X and y are accepted for API consistency and are not used.
        """
        mode = check_query_mode(self.query_mode)
        alpha = check_alpha(self.alpha)
        limit = check_positive_int(self.limit, "limit")
        check_positive_int(self.n_jobs, "n_jobs")
        weights = check_weights(self.weights)
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        kind = check_provider(self.provider, self.corpus_dir, self.index_path, self.fixtures)

        manual = None
        if mode.value == "MGQ":
            if self.manual_queries is None:
                raise ConfigError("manual query mode needs a manual-query file")
            if isinstance(self.manual_queries, dict):
                manual = self.manual_queries
            else:
                manual = read_manual_queries(check_path(self.manual_queries, "manual_queries"))

        if self.lexicon_dir is not None:
            check_path(self.lexicon_dir, "lexicon_dir", "dir")
        self.lexicon_ = Lexicon.load(self.lexicon_dir)

        if kind == "fixture":
            self.provider_ = FixtureProvider(self.fixtures, self.lexicon_.lemmatizer)
        elif self.index_path is not None:
            self.provider_ = CorpusProvider(load_index(self.index_path, self.lexicon_.lemmatizer))
        else:
            self.provider_ = CorpusProvider(build_index(self.corpus_dir, self.lexicon_.lemmatizer))

        config = PipelineConfig(
            query_mode=mode,
            alpha=alpha,
            limit=limit,
            weights=weights,
            force_label=bool(self.force_label),
            random_backoff=bool(self.random_backoff),
            seed=int(self.seed),
            manual_queries=manual,
        )
        self.pipeline_ = Pipeline(self.provider_, self.lexicon_, config)
        return self

    def _items(self, X):
        check_is_fitted(self, "pipeline_")
        return check_instances(X, self._instance_type)

    def resolve(self, X):
        """Resolution objects, in input order."""
        items = self._items(X)
        return ordered_map(self._resolve_one, items, self.n_jobs)

    def predict(self, X):
        return np.array([str(r.decision) for r in self.resolve(X)], dtype=object)

    def evaluate(self, X, y=None) -> EvalReport:
        items = self._items(X)
        gold = check_gold(y, items, self._gold_labels)
        return self._evaluate(ordered_map(self._resolve_one, items, self.n_jobs), gold)

    def score(self, X, y=None):
        return self.evaluate(X, y).f1


class KnowledgeHunter(_HunterBase):
    """Winograd schema resolver built on retrieved evidence.

    Parameters mirror the command-line flags: ``query_mode`` is one of
    auto, auto-syn, auto-syn-filter or manual; exactly one of
    ``corpus_dir``, ``index_path`` or ``fixtures`` selects the backend.
    ``score`` returns F1 with abstentions counted as misses.
    """

    _instance_type = ProblemInstance
    _gold_labels = (Decision.AGENT, Decision.PATIENT)

    def _resolve_one(self, inst):
        return self.pipeline_.resolve(inst)

    def _evaluate(self, resolutions, gold):
        return evaluate_wsc(resolutions, gold)

    def evidence(self, instance: ProblemInstance):
        check_is_fitted(self, "pipeline_")
        return self.pipeline_.evidence(instance)


class CopaHunter(_HunterBase):
    """COPA variant: the premise supplies C and each alternative a Q set.

    ``score`` returns accuracy, with abstentions counted as wrong.
    """

    _instance_type = CopaInstance
    _gold_labels = (Decision.ALT1, Decision.ALT2)

    def _resolve_one(self, inst):
        return self.pipeline_.resolve_copa(inst)

    def _evaluate(self, resolutions, gold):
        return evaluate_copa(resolutions, gold)

    def evidence(self, instance: CopaInstance):
        check_is_fitted(self, "pipeline_")
        ev1, ev2 = self.pipeline_.copa_evidence(instance)
        return ev1 + ev2

    def score(self, X, y=None):
        return self.evaluate(X, y).accuracy


def resource_path(name: str) -> Path:
    """Path of a file shipped in the package data directory."""
    from .lexicon import data_dir

    return data_dir() / name
