"""Problem loading, shallow annotation and decomposition into the WSC schema.

A Winograd instance is split at its discourse connective into a context
clause (both candidates plus the context predicate) and a query clause
(the pronoun plus the query predicate).  Predicates are found as runs of
verbal/adjectival tokens, which is enough for the desk-scale data this
package works with; no dependency parser is involved.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .labels import Decision
from .lexicon import Lexicon, OPEN_CLASS, default_lexicon, normalize_token


class Tag(str, Enum):
    VERB = "Verb"
    AUX = "Aux"
    ADJ = "Adj"
    NOUN = "Noun"
    PRON = "Pron"
    CONN = "Conn"
    OTHER = "Other"

    def __str__(self) -> str:
        return self.value


CONNECTIVES = ("because", "so", "but", "although", "since", "after", "before", "and then")
NEGATIONS = frozenset({"not", "never", "n't"})
PARTICLES = frozenset(
    "to at into onto up down out off over on in with for about like from through away back around of than".split()
)
DEGREE_ADVERBS = frozenset(
    "so too very really quite more most less rather extremely fairly somewhat pretty".split()
)
DETERMINERS = frozenset(
    "the a an this that these those each other some any every all both no another".split()
)

_TOKEN_RE = re.compile(r"[A-Za-z0-9]+(?:['’][A-Za-z0-9]+)*|[^\sA-Za-z0-9]")
_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "less", "ic", "al")


class SchemaError(ValueError):
    """The instance cannot be fitted to the representation schema."""


class DatasetError(ValueError):
    def __init__(self, index: int, field: str, message: str):
        super().__init__(f"record {index}: field {field!r}: {message}")
        self.index = index
        self.field = field


class AnnotationError(ValueError):
    pass


@dataclass(frozen=True)
class Span:
    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end < self.start:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end

    def slice(self, text: str) -> str:
        return text[self.start : self.end]


@dataclass(frozen=True)
class ProblemInstance:
    id: str
    text: str
    e1_span: Span
    e2_span: Span
    pronoun_span: Span
    answer: Decision | None = None
    pair_id: str = ""

    def __post_init__(self):
        for name in ("e1_span", "e2_span", "pronoun_span"):
            span = getattr(self, name)
            if span.end > len(self.text) or span.start == span.end:
                raise _FieldError(name, f"span [{span.start}, {span.end}) outside text of length {len(self.text)}")
        if self.e1_span.overlaps(self.e2_span):
            raise _FieldError("e2_span", "overlaps e1_span")
        if self.pronoun_span.overlaps(self.e1_span) or self.pronoun_span.overlaps(self.e2_span):
            raise _FieldError("pronoun_span", "overlaps a candidate span")
        if self.e1_span.start >= self.e2_span.start:
            raise _FieldError("e2_span", "must follow e1_span")
        if self.answer is not None and self.answer not in (Decision.AGENT, Decision.PATIENT):
            raise _FieldError("answer", f"expected agent or patient, got {self.answer!r}")

    @classmethod
    def from_strings(
        cls, id: str, text: str, e1: str, e2: str, pronoun: str,
        answer: Decision | str | None = None, pair_id: str = "",
    ) -> "ProblemInstance":
        """Locate the mentions by string: e1 first, e2 after it, the pronoun after e2."""

        def find(needle: str, start: int) -> Span:
            m = re.compile(r"(?<!\w)" + re.escape(needle) + r"(?!\w)").search(text, start)
            if m is None:
                raise ValueError(f"{needle!r} not found in {text!r} after offset {start}")
            return Span(m.start(), m.end())

        s1 = find(e1, 0)
        s2 = find(e2, s1.end)
        sp = find(pronoun, s2.end)
        return cls(id, text, s1, s2, sp, Decision(answer) if answer else None, pair_id)

    @property
    def e1(self) -> str:
        return self.e1_span.slice(self.text)

    @property
    def e2(self) -> str:
        return self.e2_span.slice(self.text)

    @property
    def pronoun(self) -> str:
        return self.pronoun_span.slice(self.text)


class _FieldError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


@dataclass(frozen=True)
class TokenAnnotation:
    token: str
    lemma: str
    pos: Tag
    char_start: int
    char_end: int


@dataclass(frozen=True)
class SchemaInstance:
    instance_id: str
    e1: str
    e2: str
    e1_head: str
    pred_c: tuple[str, ...]
    pred_q: tuple[str, ...]
    pronoun: str
    connective: str | None
    pronoun_before_pred_q: bool
    tokens: tuple[TokenAnnotation, ...]
    pred_c_idx: tuple[int, ...]
    pred_q_idx: tuple[int, ...]
    split_offset: int
    context_idx: tuple[int, ...] = ()
    query_idx: tuple[int, ...] = ()

    @property
    def pred_c_text(self) -> str:
        return " ".join(self.pred_c)

    @property
    def pred_q_text(self) -> str:
        return " ".join(self.pred_q)


def _parse_span(rec: dict, key: str, index: int) -> Span:
    raw = rec.get(key)
    if not isinstance(raw, dict) or "start" not in raw or "end" not in raw:
        raise DatasetError(index, key, "expected an object with start and end")
    try:
        return Span(int(raw["start"]), int(raw["end"]))
    except (TypeError, ValueError) as exc:
        raise DatasetError(index, key, str(exc)) from None


_SPAN_FIELDS = {"e1_span": "e1", "e2_span": "e2", "pronoun_span": "pronoun", "answer": "answer"}


def instance_from_record(rec: dict, index: int = 0) -> ProblemInstance:
    for key in ("id", "text"):
        if not isinstance(rec.get(key), str):
            raise DatasetError(index, key, "missing or not a string")
    answer = rec.get("answer")
    if answer is not None:
        try:
            answer = Decision(str(answer).lower())
        except ValueError:
            raise DatasetError(index, "answer", f"unknown label {answer!r}") from None
    try:
        return ProblemInstance(
            id=rec["id"],
            text=rec["text"],
            e1_span=_parse_span(rec, "e1", index),
            e2_span=_parse_span(rec, "e2", index),
            pronoun_span=_parse_span(rec, "pronoun", index),
            answer=answer,
            pair_id=str(rec.get("pair_id", "")),
        )
    except _FieldError as exc:
        raise DatasetError(index, _SPAN_FIELDS.get(exc.field, exc.field), exc.message) from None


def instance_to_record(inst: ProblemInstance) -> dict:
    rec = {
        "id": inst.id,
        "text": inst.text,
        "e1": {"start": inst.e1_span.start, "end": inst.e1_span.end},
        "e2": {"start": inst.e2_span.start, "end": inst.e2_span.end},
        "pronoun": {"start": inst.pronoun_span.start, "end": inst.pronoun_span.end},
        "pair_id": inst.pair_id,
    }
    if inst.answer is not None:
        rec["answer"] = inst.answer.value
    return rec


def load_wsc(path: str | Path) -> list[ProblemInstance]:
    """Read a line-delimited JSON dataset; blank lines are skipped."""
    out = []
    with open(path, encoding="utf-8") as fh:
        index = 0
        for line in fh:
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(index, "<json>", str(exc)) from None
            if not isinstance(rec, dict):
                raise DatasetError(index, "<json>", "record is not an object")
            out.append(instance_from_record(rec, index))
            index += 1
    return out


def tokenize(text: str) -> list[tuple[str, int, int]]:
    return [(m.group(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def _guess_tag(word: str, token: str, sentence_initial: bool) -> Tag:
    if not word[0].isalnum():
        return Tag.OTHER
    if word.isdigit():
        return Tag.OTHER
    if token[0].isupper() and not sentence_initial:
        return Tag.NOUN
    if word.endswith(("ing", "ed")):
        return Tag.VERB
    if word.endswith("ly"):
        return Tag.OTHER
    if word.endswith(_ADJ_SUFFIXES):
        return Tag.ADJ
    return Tag.NOUN


def tag_word(token: str, lex: Lexicon, sentence_initial: bool = False) -> Tag:
    word = normalize_token(token)
    if word in lex.pos_tags:
        return Tag(lex.pos_tags[word])
    for cand in lex.lemmatizer.candidates(word):
        tag = lex.pos_tags.get(cand)
        if tag in OPEN_CLASS:
            return Tag(tag)
        found = lex.taxonomy.pos_of(cand)
        if found:
            return Tag(found[0])
    return _guess_tag(word, token, sentence_initial)


def _read_external(external) -> list[tuple[str, str, str]]:
    if isinstance(external, (str, Path)):
        rows = []
        with open(external, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise AnnotationError(f"expected token<TAB>lemma<TAB>pos, got {line!r}")
                rows.append(tuple(parts))
        return rows
    rows = []
    for item in external:
        if isinstance(item, TokenAnnotation):
            rows.append((item.token, item.lemma, str(item.pos)))
        else:
            rows.append(tuple(item))
    return rows


def annotate(text: str, external=None, lex: Lexicon | None = None) -> list[TokenAnnotation]:
    """Tokenize and tag ``text``.

    ``external`` may be a path to a token/lemma/pos TSV or a sequence of
    such triples; when given it replaces the built-in tagger's output token
    for token and must line up with the built-in tokenization.
    """
    lex = lex or default_lexicon()
    toks = tokenize(text)
    if external is not None:
        rows = _read_external(external)
        if len(rows) != len(toks):
            raise AnnotationError(f"external annotation has {len(rows)} tokens, text has {len(toks)}")
        out = []
        for (tok, start, end), (etok, lemma, pos) in zip(toks, rows):
            if normalize_token(etok) != normalize_token(tok):
                raise AnnotationError(f"token mismatch at offset {start}: {tok!r} vs {etok!r}")
            try:
                tag = Tag(pos)
            except ValueError:
                raise AnnotationError(f"unknown tag {pos!r}") from None
            out.append(TokenAnnotation(tok, lemma, tag, start, end))
        return out
    out = []
    initial = True
    for tok, start, end in toks:
        tag = tag_word(tok, lex, sentence_initial=initial)
        lemma = lex.lemma(tok) if tag not in (Tag.OTHER, Tag.CONN, Tag.PRON) else normalize_token(tok)
        out.append(TokenAnnotation(tok, lemma, tag, start, end))
        initial = tok in ".!?"
    return out


def _indices_in(tokens: Sequence[TokenAnnotation], span: Span) -> list[int]:
    return [i for i, t in enumerate(tokens) if t.char_start >= span.start and t.char_end <= span.end]


def _is_word(t: TokenAnnotation, words: frozenset) -> bool:
    return normalize_token(t.token) in words


def _runs(indices: Iterable[int], qualifies) -> list[list[int]]:
    runs, cur = [], []
    for i in indices:
        if not qualifies(i):
            if cur:
                runs.append(cur)
            cur = []
        elif cur and i != cur[-1] + 1:
            runs.append(cur)
            cur = [i]
        else:
            cur.append(i)
    if cur:
        runs.append(cur)
    return runs


def _trim(run: list[int], tokens: Sequence[TokenAnnotation]) -> list[int]:
    while run and _is_word(tokens[run[0]], PARTICLES | DEGREE_ADVERBS | NEGATIONS):
        run = run[1:]
    while run and normalize_token(tokens[run[-1]].token) == "to":
        run = run[:-1]
    return run


def _context_runs(tokens, context_idx, excluded) -> list[list[int]]:
    def qualifies(i: int) -> bool:
        t = tokens[i]
        return i not in excluded and (
            t.pos in (Tag.AUX, Tag.VERB) or _is_word(t, NEGATIONS | PARTICLES)
        )

    runs = []
    for run in _runs(context_idx, qualifies):
        run = _trim(run, tokens)
        if any(tokens[i].pos in (Tag.AUX, Tag.VERB) for i in run):
            runs.append(_extend_copula(run, tokens, context_idx, excluded))
    return runs


def _extend_copula(run, tokens, allowed, excluded) -> list[int]:
    """Let a run ending in an auxiliary absorb a following adjective phrase ("is taller than")."""
    allowed = set(allowed)
    if tokens[run[-1]].pos != Tag.AUX:
        return run
    j = run[-1] + 1
    ext = []
    while j in allowed and j not in excluded:
        t = tokens[j]
        if _is_word(t, DEGREE_ADVERBS | NEGATIONS) or t.pos == Tag.ADJ:
            ext.append(j)
        elif ext and _is_word(t, PARTICLES):
            ext.append(j)
            break
        else:
            break
        j += 1
    if any(tokens[k].pos == Tag.ADJ for k in ext):
        return run + ext
    return run


def _query_runs(tokens, query_idx, excluded) -> list[list[int]]:
    def qualifies(i: int) -> bool:
        t = tokens[i]
        return i not in excluded and (
            t.pos in (Tag.AUX, Tag.VERB, Tag.ADJ) or _is_word(t, NEGATIONS | PARTICLES | DEGREE_ADVERBS)
        )

    runs = []
    for run in _runs(query_idx, qualifies):
        run = _trim(run, tokens)
        if any(tokens[i].pos in (Tag.AUX, Tag.VERB, Tag.ADJ) for i in run):
            runs.append(run)
    return runs


def _find_split(tokens, e2_last: int, p_idx: int) -> tuple[int, int, str | None]:
    """Return (first split token, first query token, connective)."""
    lo, hi = e2_last + 1, p_idx if p_idx > e2_last else len(tokens)
    for i in range(lo, hi):
        w = normalize_token(tokens[i].token)
        if w == "and" and i + 1 < hi and normalize_token(tokens[i + 1].token) == "then":
            return i, i + 2, "and then"
        if w in CONNECTIVES:
            return i, i + 1, w
    for i in range(hi - 1, lo - 1, -1):
        if tokens[i].token == ",":
            return i, i + 1, None
    return p_idx, p_idx, None


def decompose(
    instance: ProblemInstance,
    annotations: Sequence[TokenAnnotation] | None = None,
    lex: Lexicon | None = None,
) -> SchemaInstance:
    tokens = tuple(annotations if annotations is not None else annotate(instance.text, lex=lex))
    e1_idx = _indices_in(tokens, instance.e1_span)
    e2_idx = _indices_in(tokens, instance.e2_span)
    p_candidates = _indices_in(tokens, instance.pronoun_span)
    if not e1_idx or not e2_idx or not p_candidates:
        raise SchemaError(f"{instance.id}: candidate or pronoun span does not align with tokens")
    p_idx = p_candidates[0]
    cand = set(e1_idx) | set(e2_idx)

    split_start, query_start, connective = _find_split(tokens, max(e2_idx), p_idx)
    context_idx = list(range(0, split_start))
    query_idx = list(range(query_start, len(tokens)))

    runs = _context_runs(tokens, context_idx, cand | {p_idx})
    if not runs:
        raise SchemaError(f"{instance.id}: no verb found in context clause")
    lo, hi = max(e1_idx), min(e2_idx)
    between = [r for r in runs if r[0] > lo and r[-1] < hi]
    if between:
        with_verb = [r for r in between if any(tokens[i].pos == Tag.VERB for i in r)]
        pred_c = (with_verb or between)[0]
    else:

        def distance(run):
            return min(abs(i - c) for i in run for c in cand)

        pred_c = min(runs, key=lambda r: (distance(r), r[0]))

    qruns = _query_runs(tokens, query_idx, cand | {p_idx})
    if not qruns:
        raise SchemaError(f"{instance.id}: no query predicate near the pronoun")
    pred_q = next((r for r in qruns if r[0] == p_idx + 1), None)
    if pred_q is None:
        pred_q = next((r for r in qruns if r[-1] == p_idx - 1), None)
    if pred_q is None:
        after = [r for r in qruns if r[0] > p_idx]
        before = [r for r in qruns if r[-1] < p_idx]
        pred_q = after[0] if after else before[-1]

    head_nouns = [i for i in e1_idx if tokens[i].pos == Tag.NOUN]
    e1_head = tokens[(head_nouns or e1_idx)[-1]].token

    return SchemaInstance(
        instance_id=instance.id,
        e1=instance.e1,
        e2=instance.e2,
        e1_head=e1_head,
        pred_c=tuple(tokens[i].token for i in pred_c),
        pred_q=tuple(tokens[i].token for i in pred_q),
        pronoun=instance.pronoun,
        connective=connective,
        pronoun_before_pred_q=p_idx < pred_q[0],
        tokens=tokens,
        pred_c_idx=tuple(pred_c),
        pred_q_idx=tuple(pred_q),
        split_offset=tokens[split_start].char_start if split_start < len(tokens) else len(instance.text),
        context_idx=tuple(context_idx),
        query_idx=tuple(query_idx),
    )


def load_golden_schemas(path: str | Path) -> dict[str, dict]:
    with open(path, encoding="utf-8") as fh:
        rows = [json.loads(ln) for ln in fh if ln.strip()]
    return {r["id"]: r for r in rows}
