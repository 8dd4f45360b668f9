"""Argument checks shared by the estimators and the command line."""

from __future__ import annotations

import numbers
from pathlib import Path
from typing import Iterable, Sequence

from .evidence import Weights
from .labels import Decision, QueryMode
from .schema import ProblemInstance

QUERY_MODE_ALIASES = {
    "auto": QueryMode.AGQ,
    "auto-syn": QueryMode.AGQS,
    "auto-syn-filter": QueryMode.AGQSF,
    "manual": QueryMode.MGQ,
}


class ConfigError(ValueError):
    pass


def check_query_mode(mode) -> QueryMode:
    if isinstance(mode, QueryMode):
        return mode
    if mode in QUERY_MODE_ALIASES:
        return QUERY_MODE_ALIASES[mode]
    try:
        return QueryMode(mode)
    except ValueError:
        choices = ", ".join(list(QUERY_MODE_ALIASES) + [m.value for m in QueryMode])
        raise ConfigError(f"unknown query mode {mode!r}; expected one of {choices}") from None


def check_alpha(alpha) -> float:
    if isinstance(alpha, bool) or not isinstance(alpha, numbers.Real):
        raise ConfigError(f"alpha must be a real number, got {alpha!r}")
    if not 0 < alpha < 1:
        raise ConfigError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_weights(weights) -> Weights:
    if weights is None:
        return Weights()
    if isinstance(weights, Weights):
        return weights
    try:
        if isinstance(weights, str):
            return Weights.parse(weights)
        return Weights(*(int(w) for w in weights))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad weights {weights!r}: {exc}") from None


def check_path(path, name: str, kind: str = "file") -> Path:
    p = Path(path)
    ok = p.is_dir() if kind == "dir" else p.is_file()
    if not ok:
        raise ConfigError(f"{name}: {kind} not found: {p}")
    return p


def check_provider(provider, corpus_dir, index_path, fixtures) -> str:
    """Resolve which single provider is configured and check its paths."""
    sources = {"corpus": corpus_dir is not None or index_path is not None, "fixture": fixtures is not None}
    if provider is None:
        chosen = [k for k, v in sources.items() if v]
        if len(chosen) != 1:
            raise ConfigError("configure exactly one provider: a corpus directory, an index file, or fixtures")
        provider = chosen[0]
    if provider not in sources:
        raise ConfigError(f"unknown provider {provider!r}; expected corpus or fixture")
    if provider == "corpus":
        if fixtures is not None:
            raise ConfigError("fixtures given but provider is corpus")
        if (corpus_dir is None) == (index_path is None):
            raise ConfigError("corpus provider needs exactly one of a corpus directory or an index file")
        if corpus_dir is not None:
            check_path(corpus_dir, "corpus_dir", "dir")
        else:
            check_path(index_path, "index_path")
    else:
        if corpus_dir is not None or index_path is not None:
            raise ConfigError("corpus given but provider is fixture")
        if fixtures is None:
            raise ConfigError("fixture provider needs a fixture file")
        if not isinstance(fixtures, dict):
            check_path(fixtures, "fixtures")
    return provider


def check_instances(X, kind: type = ProblemInstance) -> list:
    if isinstance(X, kind):
        X = [X]
    try:
        items = list(X)
    except TypeError:
        raise TypeError(f"expected an iterable of {kind.__name__}, got {type(X).__name__}") from None
    for i, x in enumerate(items):
        if not isinstance(x, kind):
            raise TypeError(f"item {i}: expected {kind.__name__}, got {type(x).__name__}")
    ids = [x.id for x in items]
    if len(set(ids)) != len(ids):
        raise ValueError("instance ids must be unique")
    return items


def check_gold(y, items: Sequence, allowed: Iterable[Decision]) -> dict[str, Decision]:
    """Map ids to gold decisions, taken from ``y`` or from the instances."""
    allowed = tuple(allowed)
    if y is None:
        labels = [x.answer for x in items]
    else:
        labels = [Decision(v) if v is not None else None for v in y]
        if len(labels) != len(items):
            raise ValueError(f"y has {len(labels)} labels for {len(items)} instances")
    gold = {}
    for x, lab in zip(items, labels):
        if lab not in allowed:
            raise ValueError(f"{x.id}: gold label must be one of {[str(a) for a in allowed]}, got {lab!r}")
        gold[x.id] = lab
    return gold


__all__ = [
    "ConfigError",
    "check_alpha",
    "check_gold",
    "check_instances",
    "check_path",
    "check_positive_int",
    "check_provider",
    "check_query_mode",
    "check_weights",
]
