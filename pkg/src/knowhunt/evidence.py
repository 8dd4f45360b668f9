"""Evidence-sentence parsing, labeling and scoring.

A retrieved snippet is read against the instance it was retrieved for:
E1' is the mention before the context term, E2' the mention after it and
E3' the mention on the pronoun's side of the query term.  E3' is then
resolved to E1' or E2' with a small deterministic cascade, and the result,
adjusted for passive voice and causative alternation, says whether the
snippet supports the agent or the patient reading.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

from .labels import EvidenceLabel
from .lexicon import IRREGULAR_PARTICIPLES, Lexicon, WordLists, default_lexicon, normalize_token
from .retrieval import Snippet, term_words
from .schema import DETERMINERS, NEGATIONS, Span, Tag, TokenAnnotation, annotate

PERSON_SYNSET = "person.n.01"
_POSSESSIVE_DETERMINERS = frozenset("my your his her its our their".split())


class CorefTarget(str, Enum):
    E1P = "E1p"
    E2P = "E2p"
    UNRESOLVED = "Unresolved"

    def __str__(self) -> str:
        return self.value


class Voice(str, Enum):
    ACTIVE = "Active"
    PASSIVE = "Passive"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Mention:
    text: str
    span: Span
    lemma: str
    is_pronoun: bool
    referential: bool = True


@dataclass(frozen=True)
class EvidenceParse:
    e1p: Mention | None
    e2p: Mention | None
    e3p: Mention | None
    pred_cp: Span
    pred_qp: Span
    coref_target: CorefTarget = CorefTarget.UNRESOLVED
    voice_c: Voice = Voice.ACTIVE
    voice_q: Voice = Voice.ACTIVE
    causative: bool = False
    pattern: int | None = None
    forced: bool = False

    @property
    def passive(self) -> bool:
        return Voice.PASSIVE in (self.voice_c, self.voice_q)


@dataclass(frozen=True)
class Weights:
    len2: int = 2
    len1: int = 1
    ord2: int = 2
    ord1: int = 1

    @classmethod
    def parse(cls, text: str) -> "Weights":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"weights need four comma-separated integers, got {text!r}")
        try:
            values = [int(p) for p in parts]
        except ValueError:
            raise ValueError(f"weights need four comma-separated integers, got {text!r}") from None
        if any(v < 0 for v in values):
            raise ValueError("weights must be non-negative")
        return cls(*values)

    def __str__(self) -> str:
        return f"{self.len2},{self.len1},{self.ord2},{self.ord1}"


DEFAULT_WEIGHTS = Weights()


@dataclass(frozen=True)
class EvidenceSentence:
    snippet: Snippet
    parse: EvidenceParse | None
    label: EvidenceLabel
    len_score: int
    order_score: int
    strength: int
    target: str = "q"

    @property
    def weight(self) -> int:
        """Contribution to a WSC sum: Insufficient sentences carry none."""
        return 0 if self.label == EvidenceLabel.INSUFFICIENT else self.strength


# -- mentions ------------------------------------------------------------------


def _is_pleonastic(tokens: Sequence[TokenAnnotation], i: int) -> bool:
    """'it' + verb/aux + optional adjective + to/that ("It hurts to ...")."""
    if normalize_token(tokens[i].token) != "it":
        return False
    j = i + 1
    if j >= len(tokens) or tokens[j].pos not in (Tag.VERB, Tag.AUX):
        return False
    j += 1
    if j < len(tokens) and tokens[j].pos == Tag.ADJ:
        j += 1
    return j < len(tokens) and normalize_token(tokens[j].token) in ("to", "that")


def _heads_noun_phrase(tokens: Sequence[TokenAnnotation], i: int) -> bool:
    """True if the possessive at ``i`` is a determiner for a following noun."""
    for t in tokens[i + 1 :]:
        if t.pos == Tag.NOUN:
            return True
        if t.pos != Tag.ADJ:
            return False
    return False


def mentions(tokens: Sequence[TokenAnnotation], lex: Lexicon | None = None) -> list[tuple[int, Mention]]:
    """Noun-phrase heads and pronouns, paired with their token index."""
    lex = lex or default_lexicon()
    feats = lex.wordlists.pronoun_features
    out = []
    for i, t in enumerate(tokens):
        word = normalize_token(t.token)
        span = Span(t.char_start, t.char_end)
        if t.pos == Tag.PRON or word in feats:
            if word not in feats:
                continue
            if word in _POSSESSIVE_DETERMINERS and _heads_noun_phrase(tokens, i):
                continue
            lemma = pronoun_lemma(word, lex.wordlists)
            out.append((i, Mention(t.token, span, lemma, True, not _is_pleonastic(tokens, i))))
        elif t.pos == Tag.NOUN:
            if i + 1 < len(tokens) and tokens[i + 1].pos == Tag.NOUN:
                continue
            out.append((i, Mention(t.token, span, lex.lemma(word), False)))
    return out


def pronoun_lemma(word: str, wordlists: WordLists) -> str:
    """Collapse case forms: him/his/himself -> he, me/my -> i and so on."""
    word = normalize_token(word)
    feats = wordlists.pronoun_features.get(word)
    if feats is None:
        return word
    for cand, f in wordlists.pronoun_features.items():
        if f == feats:
            return cand
    return word


# -- slot filling --------------------------------------------------------------


def _inside(m: Mention, spans: Iterable[Span]) -> bool:
    return any(m.span.start < s.end and s.start < m.span.end for s in spans)


def _fill_slots(ms: list[Mention], c: Span, q: Span, p_before_q: bool):
    before = lambda x: [m for m in ms if m.span.end <= x]  # noqa: E731
    after = lambda x: [m for m in ms if m.span.start >= x]  # noqa: E731
    e1 = e2 = e3 = None
    if c.end <= q.start:
        middle = [m for m in ms if c.end <= m.span.start and m.span.end <= q.start]
        prev = before(c.start)
        e1 = prev[-1] if prev else None
        if p_before_q:
            if len(middle) >= 2:
                e2, e3 = middle[0], middle[-1]
            elif middle:
                e3 = middle[0]
        else:
            e2 = middle[0] if middle else None
            nxt = after(q.end)
            e3 = nxt[0] if nxt else None
    else:
        middle = [m for m in ms if q.end <= m.span.start and m.span.end <= c.start]
        nxt = after(c.end)
        e2 = nxt[0] if nxt else None
        if p_before_q:
            prev = before(q.start)
            e3 = prev[-1] if prev else None
            if middle:
                e1 = middle[-1]
            elif len(prev) >= 2:
                e1 = prev[-2]
        else:
            if len(middle) >= 2:
                e3, e1 = middle[0], middle[-1]
            elif middle:
                e3 = middle[0]
                prev = before(q.start)
                e1 = prev[-1] if prev else None
            else:
                prev = before(q.start)
                e1 = prev[-1] if prev else None
    return e1, e2, e3


def _pattern(e1, e2, e3, p_before_q: bool) -> int | None:
    if e1 is None or e3 is None:
        return None
    if e2 is not None:
        return 1 if p_before_q else 2
    return 3 if p_before_q else 4


# -- features ------------------------------------------------------------------


def _token_range(tokens: Sequence[TokenAnnotation], span: Span) -> list[int]:
    return [i for i, t in enumerate(tokens) if t.char_start >= span.start and t.char_end <= span.end]


def _is_participle(word: str) -> bool:
    if word.endswith("ing"):
        return False
    return word.endswith(("ed", "en")) or word in IRREGULAR_PARTICIPLES


def _head_verb(tokens: Sequence[TokenAnnotation], span: Span) -> int | None:
    idx = [i for i in _token_range(tokens, span) if tokens[i].pos == Tag.VERB]
    return idx[-1] if idx else None


def detect_voice(tokens: Sequence[TokenAnnotation], span: Span, wordlists: WordLists) -> Voice:
    """Passive if a listed auxiliary directly precedes a participial head verb."""
    h = _head_verb(tokens, span)
    if h is None or not _is_participle(normalize_token(tokens[h].token)):
        return Voice.ACTIVE
    j = h - 1
    while j >= 0 and normalize_token(tokens[j].token) in NEGATIONS:
        j -= 1
    if j < 0:
        return Voice.ACTIVE
    one = normalize_token(tokens[j].token)
    two = f"{normalize_token(tokens[j - 1].token)} {one}" if j >= 1 else None
    if two in wordlists.auxiliaries or one in wordlists.auxiliaries:
        return Voice.PASSIVE
    return Voice.ACTIVE


def detect_causative(tokens: Sequence[TokenAnnotation], span: Span, lex: Lexicon) -> bool:
    """A causative-alternating head verb used without a following object."""
    h = _head_verb(tokens, span)
    if h is None:
        return False
    lemma = lex.lemma(normalize_token(tokens[h].token))
    if lemma not in lex.wordlists.causative_verbs:
        return False
    if h + 1 >= len(tokens):
        return True
    nxt = tokens[h + 1]
    word = normalize_token(nxt.token)
    return not (nxt.pos in (Tag.NOUN, Tag.PRON) or word in DETERMINERS)


def parse_evidence(
    snippet: Snippet,
    annotations: Sequence[TokenAnnotation] | None = None,
    *,
    pronoun_before_pred_q: bool = True,
    lex: Lexicon | None = None,
) -> EvidenceParse:
    lex = lex or default_lexicon()
    tokens = annotations if annotations is not None else annotate(snippet.text, lex=lex)
    c, q = snippet.term_c_span, snippet.term_q_span
    ms = [m for _, m in mentions(tokens, lex) if not _inside(m, (c, q))]
    e1, e2, e3 = _fill_slots(ms, c, q, pronoun_before_pred_q)
    voice_c = detect_voice(tokens, c, lex.wordlists)
    voice_q = detect_voice(tokens, q, lex.wordlists)
    causative = detect_causative(tokens, c, lex) or detect_causative(tokens, q, lex)
    return EvidenceParse(
        e1p=e1,
        e2p=e2,
        e3p=e3,
        pred_cp=c,
        pred_qp=q,
        voice_c=voice_c,
        voice_q=voice_q,
        causative=causative,
        pattern=_pattern(e1, e2, e3, pronoun_before_pred_q),
    )


# -- coreference ---------------------------------------------------------------


@dataclass(frozen=True)
class _Agreement:
    gender: str  # masc | fem | common | neut | any
    number: str
    person: int


def _gender_ok(a: str, b: str) -> bool:
    if "any" in (a, b) or a == b:
        return True
    if "common" in (a, b):
        other = b if a == "common" else a
        return other in ("masc", "fem")
    return False


def _features(m: Mention, lex: Lexicon) -> _Agreement:
    wl = lex.wordlists
    word = normalize_token(m.text)
    if m.is_pronoun:
        f = wl.pronoun_features[word]
        return _Agreement(f.gender, f.number, f.person)
    number = "pl" if m.lemma != word and word.endswith("s") or word in ("men", "women", "children", "people") else "sg"
    gender = wl.noun_genders.get(word) or wl.noun_genders.get(m.lemma)
    if gender is None:
        senses = lex.taxonomy.senses(m.lemma, "Noun")
        if not senses:
            gender = "any"
        elif any(PERSON_SYNSET in lex.taxonomy.ancestors(s) for s in senses):
            gender = "common"
        else:
            gender = "neut"
    return _Agreement(gender, number, 3)


def _agrees(a: _Agreement, b: _Agreement) -> bool:
    number_ok = "any" in (a.number, b.number) or a.number == b.number
    return _gender_ok(a.gender, b.gender) and number_ok and a.person == b.person


def _unique(hits: dict[CorefTarget, bool]) -> CorefTarget | None:
    chosen = [k for k, v in hits.items() if v]
    return chosen[0] if len(chosen) == 1 else None


def resolve_coref(parse: EvidenceParse, lex: Lexicon | None = None) -> EvidenceParse:
    """Resolve E3' by exact lemma, then agreement, then a first-person chain."""
    lex = lex or default_lexicon()
    e3 = parse.e3p
    if e3 is None or parse.pattern is None:
        return _with_target(parse, CorefTarget.UNRESOLVED)
    cands = {
        k: m
        for k, m in ((CorefTarget.E1P, parse.e1p), (CorefTarget.E2P, parse.e2p))
        if m is not None and m.referential
    }
    if not cands:
        return _with_target(parse, CorefTarget.UNRESOLVED)

    def key(m: Mention) -> str:
        return pronoun_lemma(m.text, lex.wordlists) if m.is_pronoun else m.lemma

    exact = {k: key(m) == key(e3) for k, m in cands.items()}
    if sum(exact.values()) > 1:
        return _with_target(parse, CorefTarget.UNRESOLVED)
    target = _unique(exact)
    if target is None:
        f3 = _features(e3, lex)
        target = _unique({k: _agrees(_features(m, lex), f3) for k, m in cands.items()})
    if target is None and e3.is_pronoun and _features(e3, lex).person == 1:
        target = _unique({k: m.is_pronoun and _features(m, lex).person == 1 for k, m in cands.items()})
    return _with_target(parse, target or CorefTarget.UNRESOLVED)


def force_target(parse: EvidenceParse) -> EvidenceParse:
    """Pick the referential candidate nearest E3' for an unresolved parse."""
    if parse.coref_target != CorefTarget.UNRESOLVED or parse.pattern is None or parse.e3p is None:
        return parse
    e3 = parse.e3p.span
    cands = [
        (min(abs(m.span.start - e3.end), abs(e3.start - m.span.end)), k.value, k)
        for k, m in ((CorefTarget.E1P, parse.e1p), (CorefTarget.E2P, parse.e2p))
        if m is not None and m.referential
    ]
    if not cands:
        return parse
    return _with_target(parse, min(cands)[2], forced=True)


def _with_target(parse: EvidenceParse, target: CorefTarget, forced: bool = False) -> EvidenceParse:
    return replace(parse, coref_target=target, forced=forced)


# -- labeling and scoring ------------------------------------------------------


def label(parse: EvidenceParse) -> EvidenceLabel:
    """Map a resolved parse to EA/EP; causative takes precedence over voice."""
    if parse.pattern is None or parse.coref_target == CorefTarget.UNRESOLVED:
        return EvidenceLabel.INSUFFICIENT
    if parse.coref_target == CorefTarget.E1P:
        if parse.causative or parse.passive:
            return EvidenceLabel.EP
        return EvidenceLabel.EA
    return EvidenceLabel.EA if parse.passive else EvidenceLabel.EP


def term_length(term: str) -> int:
    return len(term_words(term))


def score(
    term_c: str,
    term_q: str,
    c_first: bool,
    schema_order: bool = True,
    weights: Weights = DEFAULT_WEIGHTS,
) -> tuple[int, int, int]:
    """(len_score, order_score, strength) for one snippet.

    ``schema_order`` is whether the context predicate precedes the query
    predicate in the instance itself.
    """
    multi = term_length(term_c) > 1 or term_length(term_q) > 1
    len_score = weights.len2 if multi else weights.len1
    order_score = weights.ord2 if c_first == schema_order else weights.ord1
    return len_score, order_score, len_score + order_score


def score_snippet(snippet: Snippet, schema_order: bool = True, weights: Weights = DEFAULT_WEIGHTS):
    return score(snippet.matched_term_c, snippet.matched_term_q, snippet.c_first, schema_order, weights)


def assess(
    snippet: Snippet,
    *,
    pronoun_before_pred_q: bool = True,
    schema_order: bool = True,
    weights: Weights = DEFAULT_WEIGHTS,
    force_label: bool = False,
    annotations: Sequence[TokenAnnotation] | None = None,
    lex: Lexicon | None = None,
) -> EvidenceSentence:
    """Run parse, coreference, labeling and scoring on one WSC snippet."""
    lex = lex or default_lexicon()
    parse = parse_evidence(snippet, annotations, pronoun_before_pred_q=pronoun_before_pred_q, lex=lex)
    parse = resolve_coref(parse, lex)
    if force_label:
        parse = force_target(parse)
    len_score, order_score, strength = score_snippet(snippet, schema_order, weights)
    return EvidenceSentence(snippet, parse, label(parse), len_score, order_score, strength)


def assess_copa(
    snippet: Snippet, target: str, schema_order: bool = True, weights: Weights = DEFAULT_WEIGHTS
) -> EvidenceSentence:
    """COPA evidence is not labeled; every retrieved snippet counts for its alternative."""
    len_score, order_score, strength = score_snippet(snippet, schema_order, weights)
    return EvidenceSentence(snippet, None, EvidenceLabel.INSUFFICIENT, len_score, order_score, strength, target)


def dump_record(instance_id: str, ev: EvidenceSentence) -> dict:
    p = ev.parse
    return {
        "instance_id": instance_id,
        "snippet_text": ev.snippet.text,
        "pattern": p.pattern if p else None,
        "coref_target": str(p.coref_target) if p else None,
        "voice": ("passive" if p.passive else "active") if p else None,
        "causative": p.causative if p else None,
        "label": str(ev.label),
        "strength": ev.strength,
    }


def dump_lines(instance_id: str, evidence: Iterable[EvidenceSentence]) -> str:
    return "".join(json.dumps(dump_record(instance_id, e), ensure_ascii=False) + "\n" for e in evidence)
