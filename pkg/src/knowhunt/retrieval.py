"""Snippet retrieval behind a provider interface.

Two providers ship: an inverted index over a directory of plain-text files,
and a replay provider for recorded search results.  Both return snippets
whose two matched terms sit within ``MAX_GAP`` characters of each other in
one sentence or two adjacent ones.
"""

from __future__ import annotations

import json
import logging
import re
import threading
from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

from .labels import Ordering
from .lexicon import Lemmatizer, default_lexicon, normalize_token
from .querygen import SearchQuery, _excluded_by
from .schema import Span

logger = logging.getLogger(__name__)

MAX_GAP = 70
DEFAULT_LIMIT = 100
INDEX_MAGIC = "#knowhunt-index"
INDEX_VERSION = "v1"

_WORD_RE = re.compile(r"[A-Za-z0-9'’]+")
_BOUNDARY_RE = re.compile(r"[.!?]\s+(?=[A-Z])")


class IndexFormatError(ValueError):
    pass


class FixtureError(ValueError):
    pass


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str


@dataclass(frozen=True)
class Snippet:
    text: str
    doc_id: str
    term_c_span: Span
    term_q_span: Span
    matched_term_c: str
    matched_term_q: str

    @property
    def gap(self) -> int:
        a, b = sorted((self.term_c_span, self.term_q_span), key=lambda s: s.start)
        return b.start - a.end

    @property
    def c_first(self) -> bool:
        return self.term_c_span.start < self.term_q_span.start


class SearchProvider(Protocol):
    def search(self, query: SearchQuery, limit: int = DEFAULT_LIMIT) -> list[Snippet]: ...


def term_words(term: str) -> list[str]:
    return [normalize_token(w) for w in _WORD_RE.findall(term)]


def sentence_spans(text: str) -> list[tuple[int, int]]:
    if not text:
        return []
    starts = [0] + [m.end() for m in _BOUNDARY_RE.finditer(text)]
    return [(s, e) for s, e in zip(starts, starts[1:] + [len(text)])]


@dataclass(frozen=True)
class _Tok:
    start: int
    end: int
    norm: str
    sent: int


class CorpusIndex:
    """Positional inverted index.

    ``postings`` maps a lower-cased token to ``(doc_idx, sentence_idx,
    char_offset)`` triples; ``lemma_map`` maps a lemma to every indexed
    surface form that reduces to it.
    """

    def __init__(
        self,
        documents: Sequence[Document],
        sentence_spans: Sequence[Sequence[tuple[int, int]]],
        postings: Mapping[str, Sequence[tuple[int, int, int]]],
        lemma_map: Mapping[str, Sequence[str]],
        lemmatizer: Lemmatizer | None = None,
    ):
        self.documents = tuple(documents)
        self.sentence_spans = tuple(tuple(s) for s in sentence_spans)
        self.postings = {k: tuple(v) for k, v in postings.items()}
        self.lemma_map = {k: tuple(v) for k, v in lemma_map.items()}
        self.lemmatizer = lemmatizer or default_lexicon().lemmatizer
        toks: list[list[_Tok]] = [[] for _ in self.documents]
        for word, plist in self.postings.items():
            for d, s, off in plist:
                toks[d].append(_Tok(off, off + len(word), word, s))
        for t in toks:
            t.sort(key=lambda x: x.start)
        self._tokens = toks
        self._position = [{t.start: i for i, t in enumerate(ts)} for ts in toks]

    @classmethod
    def from_documents(cls, documents: Iterable[Document], lemmatizer: Lemmatizer | None = None) -> "CorpusIndex":
        lemmatizer = lemmatizer or default_lexicon().lemmatizer
        documents = list(documents)
        spans, postings = [], defaultdict(list)
        for d, doc in enumerate(documents):
            sspans = sentence_spans(doc.text)
            spans.append(sspans)
            starts = [s for s, _ in sspans]
            for m in _WORD_RE.finditer(doc.text):
                sent = bisect_right(starts, m.start()) - 1
                postings[normalize_token(m.group())].append((d, sent, m.start()))
        lemma_map = defaultdict(set)
        for word in postings:
            lemma_map[lemmatizer.lemma(word)].add(word)
        return cls(
            documents,
            spans,
            {w: postings[w] for w in sorted(postings)},
            {lem: sorted(ws) for lem, ws in sorted(lemma_map.items())},
            lemmatizer,
        )

    def __len__(self) -> int:
        return len(self.documents)

    def tokens(self, doc_idx: int) -> list[_Tok]:
        return self._tokens[doc_idx]

    def occurrences(self, term: str, lemma_match: bool = True) -> list[tuple[int, int, int]]:
        """(doc_idx, first token idx, last token idx) for each match of ``term``.

        Single words also match any indexed form sharing their lemma; phrases
        match consecutive surface tokens inside one sentence.
        """
        words = term_words(term)
        if not words:
            return []
        if len(words) == 1:
            forms = {words[0]}
            if lemma_match:
                forms.update(self.lemma_map.get(self.lemmatizer.lemma(words[0]), ()))
            out = []
            for form in forms:
                for d, _, off in self.postings.get(form, ()):
                    i = self._position[d][off]
                    out.append((d, i, i))
            return sorted(out)
        out = []
        n = len(words)
        for d, s, off in self.postings.get(words[0], ()):
            toks = self._tokens[d]
            i = self._position[d][off]
            if i + n > len(toks):
                continue
            window = toks[i : i + n]
            if all(t.norm == w and t.sent == s for t, w in zip(window, words)):
                out.append((d, i, i + n - 1))
        return sorted(out)

    def documents_containing(self, phrase: str) -> set[int]:
        return {d for d, _, _ in self.occurrences(phrase, lemma_match=False)}


def build_index(corpus_dir: str | Path, lemmatizer: Lemmatizer | None = None) -> CorpusIndex:
    """Index every ``*.txt`` file under ``corpus_dir`` (sorted by relative path)."""
    root = Path(corpus_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"corpus directory not found: {root}")
    docs = []
    for path in sorted(root.rglob("*.txt")):
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise OSError(f"cannot read corpus file {path}: {exc}") from exc
        docs.append(Document(path.relative_to(root).as_posix(), text))
    return CorpusIndex.from_documents(docs, lemmatizer)


def _snippet_bounds(text: str, start: int, end: int) -> tuple[int, int]:
    while start < end and text[start].isspace():
        start += 1
    while end > start and text[end - 1].isspace():
        end -= 1
    return start, end


def _order_ok(c_start: int, q_start: int, ordering: Ordering) -> bool:
    if ordering == Ordering.C_BEFORE_Q:
        return c_start < q_start
    if ordering == Ordering.Q_BEFORE_C:
        return q_start < c_start
    return True


def _gap(a: tuple[int, int], b: tuple[int, int]) -> int | None:
    """Characters between two spans, or None if they overlap."""
    if a[1] <= b[0]:
        return b[0] - a[1]
    if b[1] <= a[0]:
        return a[0] - b[1]
    return None


def search(index: CorpusIndex, query: SearchQuery, limit: int = DEFAULT_LIMIT) -> list[Snippet]:
    excluded_docs = set()
    for ex in query.exclusions:
        excluded_docs |= index.documents_containing(ex)

    by_doc_c = defaultdict(list)
    for d, i, j in index.occurrences(query.term_c):
        if d not in excluded_docs:
            by_doc_c[d].append((i, j))
    by_doc_q = defaultdict(list)
    for d, i, j in index.occurrences(query.term_q):
        if d in by_doc_c:
            by_doc_q[d].append((i, j))

    results = []
    for d in sorted(by_doc_q):
        toks = index.tokens(d)
        q_by_sent = defaultdict(list)
        for i, j in by_doc_q[d]:
            q_by_sent[toks[i].sent].append((i, j))
        found = []
        for ci, cj in by_doc_c[d]:
            c_span = (toks[ci].start, toks[cj].end)
            sc = toks[ci].sent
            for s in (sc - 1, sc, sc + 1):
                for qi, qj in q_by_sent.get(s, ()):
                    q_span = (toks[qi].start, toks[qj].end)
                    gap = _gap(c_span, q_span)
                    if gap is None or gap > MAX_GAP or not _order_ok(c_span[0], q_span[0], query.ordering):
                        continue
                    found.append(((min(sc, s), max(sc, s)), gap, c_span, q_span))
        if not found:
            continue
        single = {rng[0] for rng, *_ in found if rng[0] == rng[1]}
        best = {}
        for rng, gap, c_span, q_span in found:
            if rng[0] != rng[1] and (rng[0] in single or rng[1] in single):
                continue
            key = (gap, c_span[0], q_span[0])
            if rng not in best or key < best[rng][0]:
                best[rng] = (key, c_span, q_span)
        doc = index.documents[d]
        spans = index.sentence_spans[d]
        for rng in sorted(best):
            _, c_span, q_span = best[rng]
            start, end = _snippet_bounds(doc.text, spans[rng[0]][0], spans[rng[1]][1])
            results.append(
                Snippet(
                    text=doc.text[start:end],
                    doc_id=doc.doc_id,
                    term_c_span=Span(c_span[0] - start, c_span[1] - start),
                    term_q_span=Span(q_span[0] - start, q_span[1] - start),
                    matched_term_c=query.term_c,
                    matched_term_q=query.term_q,
                )
            )
            if len(results) >= limit:
                return results
    return results


class CorpusProvider:
    def __init__(self, index: CorpusIndex):
        self.index = index

    def search(self, query: SearchQuery, limit: int = DEFAULT_LIMIT) -> list[Snippet]:
        return search(self.index, query, limit)


# -- recorded fixtures ---------------------------------------------------------


def _find_term(text: str, term: str, lemmatizer: Lemmatizer) -> list[tuple[int, int]]:
    words = term_words(term)
    toks = [(normalize_token(m.group()), m.start(), m.end()) for m in _WORD_RE.finditer(text)]
    if not words:
        return []
    if len(words) == 1:
        target = lemmatizer.lemma(words[0])
        return [(s, e) for w, s, e in toks if w == words[0] or lemmatizer.lemma(w) == target]
    n = len(words)
    return [
        (toks[i][1], toks[i + n - 1][2])
        for i in range(len(toks) - n + 1)
        if [t[0] for t in toks[i : i + n]] == words
    ]


def locate_terms(
    text: str, term_c: str, term_q: str, ordering: Ordering = Ordering.ANY, lemmatizer: Lemmatizer | None = None
) -> tuple[Span, Span] | None:
    """Closest valid (term_c, term_q) placement in ``text``, or None."""
    lemmatizer = lemmatizer or default_lexicon().lemmatizer
    best = None
    for c in _find_term(text, term_c, lemmatizer):
        for q in _find_term(text, term_q, lemmatizer):
            gap = _gap(c, q)
            if gap is None or gap > MAX_GAP or not _order_ok(c[0], q[0], ordering):
                continue
            key = (gap, c[0], q[0])
            if best is None or key < best[0]:
                best = (key, c, q)
    if best is None:
        return None
    return Span(*best[1]), Span(*best[2])


def read_fixtures(path: str | Path) -> dict[tuple[str, str], list[dict]]:
    table: dict[tuple[str, str], list[dict]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FixtureError(f"{path}:{lineno}: {exc}") from None
            if not isinstance(rec, dict) or not isinstance(rec.get("snippets"), list):
                raise FixtureError(f"{path}:{lineno}: expected an object with a snippets list")
            for key in ("term_c", "term_q"):
                if not isinstance(rec.get(key), str):
                    raise FixtureError(f"{path}:{lineno}: missing {key!r}")
            for snip in rec["snippets"]:
                if not isinstance(snip, dict) or not isinstance(snip.get("text"), str):
                    raise FixtureError(f"{path}:{lineno}: snippet without text")
            key = (rec["term_c"].lower(), rec["term_q"].lower())
            table.setdefault(key, []).extend(rec["snippets"])
    return table


def _validate_fixture(snip: dict, query: SearchQuery, lemmatizer: Lemmatizer) -> Snippet | None:
    text = snip["text"]
    if any(_excluded_by(text, [ex]) for ex in query.exclusions):
        return None
    term_c = snip.get("term_c", query.term_c)
    term_q = snip.get("term_q", query.term_q)
    placed = locate_terms(text, term_c, term_q, query.ordering, lemmatizer)
    if placed is None:
        return None
    return Snippet(text, str(snip.get("doc_id", "")), placed[0], placed[1], term_c, term_q)


class FixtureProvider:
    """Replays recorded snippets keyed by (term_c, term_q).

    A recorded snippet may name the specific ``term_c``/``term_q`` set entries
    it matched when those differ from the lookup key.  Snippets that fail
    the exclusion, ordering or distance checks are dropped and counted.
    """

    def __init__(self, fixtures: str | Path | Mapping, lemmatizer: Lemmatizer | None = None):
        self.table = fixtures if isinstance(fixtures, Mapping) else read_fixtures(fixtures)
        self.lemmatizer = lemmatizer or default_lexicon().lemmatizer
        self.dropped = 0
        self._lock = threading.Lock()

    def search(self, query: SearchQuery, limit: int = DEFAULT_LIMIT) -> list[Snippet]:
        out, dropped = [], 0
        for snip in self.table.get((query.term_c.lower(), query.term_q.lower()), ()):
            s = _validate_fixture(snip, query, self.lemmatizer)
            if s is None:
                dropped += 1
                continue
            out.append(s)
            if len(out) >= limit:
                break
        if dropped:
            logger.warning("dropped %d recorded snippet(s) for %r/%r", dropped, query.term_c, query.term_q)
            with self._lock:
                self.dropped += dropped
        return out


def fixture_search(fixtures: str | Path | Mapping, query: SearchQuery, limit: int = DEFAULT_LIMIT) -> list[Snippet]:
    return FixtureProvider(fixtures).search(query, limit)


# -- persistence ---------------------------------------------------------------


def save_index(index: CorpusIndex, path: str | Path) -> None:
    """Write the index as sorted, tab-separated text lines."""
    lines = [f"{INDEX_MAGIC}\t{INDEX_VERSION}"]
    for d, doc in enumerate(index.documents):
        doc_id = json.dumps(doc.doc_id, ensure_ascii=False)
        text = json.dumps(doc.text, ensure_ascii=False)
        lines.append(f"D\t{d}\t{doc_id}\t{text}")
    for d, spans in enumerate(index.sentence_spans):
        lines.append(f"S\t{d}\t" + ",".join(f"{s}:{e}" for s, e in spans))
    for word in sorted(index.postings):
        plist = ";".join(f"{d},{s},{o}" for d, s, o in sorted(index.postings[word]))
        lines.append(f"T\t{word}\t{plist}")
    for lemma in sorted(index.lemma_map):
        lines.append(f"L\t{lemma}\t" + ",".join(index.lemma_map[lemma]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_index(path: str | Path, lemmatizer: Lemmatizer | None = None) -> CorpusIndex:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if len(header) != 2 or header[0] != INDEX_MAGIC:
            raise IndexFormatError(f"{path}: not a knowhunt index")
        if header[1] != INDEX_VERSION:
            raise IndexFormatError(f"{path}: index version {header[1]!r}, expected {INDEX_VERSION!r}")
        docs, spans, postings, lemma_map = {}, {}, {}, {}
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\n").split("\t")
            try:
                kind = parts[0]
                if kind == "D":
                    docs[int(parts[1])] = Document(json.loads(parts[2]), json.loads(parts[3]))
                elif kind == "S":
                    spans[int(parts[1])] = [tuple(map(int, p.split(":"))) for p in parts[2].split(",") if p]
                elif kind == "T":
                    postings[parts[1]] = [tuple(map(int, p.split(","))) for p in parts[2].split(";") if p]
                elif kind == "L":
                    lemma_map[parts[1]] = [w for w in parts[2].split(",") if w]
                else:
                    raise ValueError(f"unknown record type {kind!r}")
            except (IndexError, ValueError) as exc:
                raise IndexFormatError(f"{path}:{lineno}: {exc}") from None
    n = len(docs)
    if sorted(docs) != list(range(n)) or sorted(spans) != list(range(n)):
        raise IndexFormatError(f"{path}: document and sentence records do not line up")
    return CorpusIndex([docs[i] for i in range(n)], [spans[i] for i in range(n)], postings, lemma_map, lemmatizer)
