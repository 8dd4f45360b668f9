"""Lexical resources: hypernym taxonomy, Wu-Palmer similarity and closed word lists.

The taxonomy is read from a tab-separated file with one synset per line::

    synset_id <TAB> pos <TAB> lemma,lemma,... <TAB> parent_id,parent_id,...

Roots have an empty parent column.  Multi-word lemmas use underscores.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

logger = logging.getLogger(__name__)

OPEN_CLASS = ("Verb", "Adj", "Noun")
TOP_K_SENSES = 3

IRREGULAR = {
    "am": "be", "is": "be", "are": "be", "was": "be", "were": "be", "been": "be", "being": "be",
    "has": "have", "had": "have", "does": "do", "did": "do", "done": "do",
    "went": "go", "gone": "go", "came": "come", "saw": "see", "seen": "see",
    "took": "take", "taken": "take", "gave": "give", "given": "give", "made": "make",
    "got": "get", "gotten": "get", "ran": "run", "broke": "break", "broken": "break",
    "fell": "fall", "fallen": "fall", "held": "hold", "told": "tell", "thought": "think",
    "knew": "know", "known": "know", "felt": "feel", "left": "leave", "caught": "catch",
    "bought": "buy", "brought": "bring", "sold": "sell", "paid": "pay", "lent": "lend",
    "won": "win", "lost": "lose", "beaten": "beat", "threw": "throw", "thrown": "throw",
    "drew": "draw", "drawn": "draw", "wrote": "write", "written": "write", "ate": "eat",
    "eaten": "eat", "drank": "drink", "drunk": "drink", "slept": "sleep", "stood": "stand",
    "sat": "sit", "fought": "fight", "taught": "teach", "built": "build", "met": "meet",
    "found": "find", "hid": "hide", "hidden": "hide", "froze": "freeze", "frozen": "freeze",
    "sank": "sink", "sunk": "sink", "bit": "bite", "bitten": "bite", "wore": "wear",
    "worn": "wear", "spoke": "speak", "spoken": "speak", "heard": "hear",
    "understood": "understand", "forgot": "forget", "forgotten": "forget", "began": "begin",
    "begun": "begin", "rang": "ring", "rung": "ring", "said": "say", "shook": "shake",
    "men": "man", "women": "woman", "children": "child", "people": "person", "feet": "foot",
    "teeth": "tooth", "mice": "mouse", "better": "good", "best": "good", "worse": "bad",
    "worst": "bad",
}

# surface forms usable as passive participles without a regular -ed/-en ending
IRREGULAR_PARTICIPLES = frozenset(
    "done gone seen taken given made got gotten broken fallen held told thought known felt left "
    "caught bought brought sold paid lent won lost beaten beat hit hurt cut put shut thrown drawn "
    "written eaten drunk slept stood sat fought taught built met found hidden frozen sunk bitten "
    "worn spoken heard understood forgotten begun rung said shaken".split()
)

_SUFFIX_RULES = (
    ("'s", ("",)),
    ("ies", ("y",)),
    ("ied", ("y",)),
    ("iest", ("y",)),
    ("ier", ("y",)),
    ("ing", ("", "e")),
    ("ed", ("", "e")),
    ("est", ("", "e")),
    ("er", ("", "e")),
    ("es", ("",)),
    ("s", ("",)),
)


def normalize_token(text: str) -> str:
    return text.lower().replace("’", "'")


class Lemmatizer:
    """Suffix-stripping lemmatizer that only accepts stems found in ``known``.

    Unknown words are returned lower-cased and otherwise unchanged, so the
    output is a pure function of the word and the known-lemma set.
    """

    def __init__(self, known: Iterable[str]):
        self.known = frozenset(known)

    @staticmethod
    def candidates(word: str) -> list[str]:
        w = normalize_token(word)
        out = [w]
        if w in IRREGULAR:
            out.append(IRREGULAR[w])
        for suffix, replacements in _SUFFIX_RULES:
            if w.endswith(suffix) and len(w) > len(suffix) + 1:
                stem = w[: -len(suffix)]
                out.extend(stem + r for r in replacements)
                # stopped -> stop, bigger -> big
                if suffix in ("ing", "ed", "er", "est") and len(stem) >= 3 and stem[-1] == stem[-2]:
                    out.append(stem[:-1])
        seen = set()
        return [c for c in out if not (c in seen or seen.add(c))]

    def lemma(self, word: str) -> str:
        cands = self.candidates(word)
        for c in cands:
            if c in self.known:
                return c
        return cands[0]


@dataclass(frozen=True)
class Synset:
    id: str
    pos: str
    lemmas: tuple[str, ...]
    parents: tuple[str, ...]


class TaxonomyError(ValueError):
    pass


class Taxonomy:
    """Hypernym DAG with a (lemma, pos) -> senses index.

    Depth is counted from a root, which has depth 1.  Where a synset has
    several paths to the roots the longest one is used, so every proper
    ancestor is strictly shallower than its descendants.
    """

    def __init__(self, synsets: Iterable[Synset]):
        self.synsets: dict[str, Synset] = {}
        self.lemma_index: dict[tuple[str, str], list[str]] = {}
        for s in synsets:
            if s.id in self.synsets:
                raise TaxonomyError(f"duplicate synset id {s.id!r}")
            self.synsets[s.id] = s
            for lem in s.lemmas:
                self.lemma_index.setdefault((lem, s.pos), []).append(s.id)
        for s in self.synsets.values():
            for p in s.parents:
                if p not in self.synsets:
                    raise TaxonomyError(f"synset {s.id!r} has unknown parent {p!r}")
        self._depth: dict[str, int] = {}
        self._ancestors: dict[str, frozenset[str]] = {}
        self._check_acyclic()

    @classmethod
    def from_tsv(cls, path: str | Path) -> "Taxonomy":
        synsets = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 4:
                    raise TaxonomyError(f"{path}:{lineno}: expected 4 tab-separated fields, got {len(parts)}")
                sid, pos, lemmas, parents = parts
                lemma_list = tuple(lem.strip().lower() for lem in lemmas.split(",") if lem.strip())
                if not lemma_list:
                    raise TaxonomyError(f"{path}:{lineno}: synset {sid!r} has no lemmas")
                parent_list = tuple(p.strip() for p in parents.split(",") if p.strip())
                synsets.append(Synset(sid, pos, lemma_list, parent_list))
        return cls(synsets)

    def _check_acyclic(self) -> None:
        WHITE, GREY, BLACK = 0, 1, 2
        colour = dict.fromkeys(self.synsets, WHITE)
        for start in self.synsets:
            if colour[start] != WHITE:
                continue
            stack = [(start, iter(self.synsets[start].parents))]
            colour[start] = GREY
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    colour[node] = BLACK
                    stack.pop()
                elif colour[nxt] == GREY:
                    raise TaxonomyError(f"hypernym cycle through {nxt!r}")
                elif colour[nxt] == WHITE:
                    colour[nxt] = GREY
                    stack.append((nxt, iter(self.synsets[nxt].parents)))

    def __contains__(self, synset_id: str) -> bool:
        return synset_id in self.synsets

    def __len__(self) -> int:
        return len(self.synsets)

    def depth(self, synset_id: str) -> int:
        if synset_id in self._depth:
            return self._depth[synset_id]
        # iterative post-order so deep chains don't hit the recursion limit
        stack = [synset_id]
        while stack:
            node = stack[-1]
            pending = [p for p in self.synsets[node].parents if p not in self._depth]
            if pending:
                stack.extend(pending)
                continue
            stack.pop()
            parents = self.synsets[node].parents
            self._depth[node] = 1 + max((self._depth[p] for p in parents), default=0)
        return self._depth[synset_id]

    def ancestors(self, synset_id: str) -> frozenset[str]:
        """All hypernyms of ``synset_id``, including itself."""
        if synset_id not in self._ancestors:
            seen = {synset_id}
            todo = [synset_id]
            while todo:
                for p in self.synsets[todo.pop()].parents:
                    if p not in seen:
                        seen.add(p)
                        todo.append(p)
            self._ancestors[synset_id] = frozenset(seen)
        return self._ancestors[synset_id]

    def _require(self, synset_id: str) -> None:
        if synset_id not in self.synsets:
            raise KeyError(f"unknown synset {synset_id!r}")

    def wu_palmer(self, a: str, b: str) -> float:
        """2 * depth(lcs) / (depth(a) + depth(b)), lcs being the deepest common subsumer.

        Synsets in disjoint hierarchies are compared under a virtual root
        placed above every real root, which shifts all depths by one.
        """
        self._require(a)
        self._require(b)
        if a == b:
            return 1.0
        common = self.ancestors(a) & self.ancestors(b)
        da, db = self.depth(a), self.depth(b)
        if not common:
            return 2.0 / ((da + 1) + (db + 1))
        lcs_depth = max(self.depth(c) for c in common)
        return 2.0 * lcs_depth / (da + db)

    def senses(self, lemma: str, pos: str) -> list[str]:
        return list(self.lemma_index.get((lemma.lower().replace(" ", "_"), pos), ()))

    def synonyms(self, lemma: str, pos: str) -> set[str]:
        ids = self.senses(lemma, pos)
        if not ids:
            return set()
        key = lemma.lower().replace(" ", "_")
        return {lem.replace("_", " ") for lem in self.synsets[ids[0]].lemmas if lem != key}

    def lemmas(self) -> set[str]:
        return {lem for lem, _ in self.lemma_index}

    def pos_of(self, lemma: str) -> list[str]:
        return [pos for pos in OPEN_CLASS if (lemma, pos) in self.lemma_index]


@dataclass(frozen=True)
class PronounFeatures:
    gender: str  # masc | fem | neut | any
    number: str  # sg | pl | any
    person: int


@dataclass(frozen=True)
class WordLists:
    auxiliaries: frozenset[str]
    causative_verbs: frozenset[str]
    pronoun_features: Mapping[str, PronounFeatures]
    noun_genders: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("auxiliaries", "causative_verbs"):
            values = getattr(self, name)
            if not values:
                raise ValueError(f"word list {name!r} is empty")
            if any(v != v.lower() for v in values):
                raise ValueError(f"word list {name!r} must be lower-case")


def _read_lines(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]


def load_wordlists(directory: str | Path) -> WordLists:
    directory = Path(directory)
    pronouns = {}
    for row in _read_lines(directory / "pronouns.tsv"):
        word, gender, number, person = row.split("\t")
        pronouns[word] = PronounFeatures(gender, number, int(person))
    genders = {}
    if (directory / "genders.tsv").exists():
        for row in _read_lines(directory / "genders.tsv"):
            word, gender = row.split("\t")
            genders[word] = gender
    return WordLists(
        auxiliaries=frozenset(_read_lines(directory / "auxiliaries.txt")),
        causative_verbs=frozenset(_read_lines(directory / "causatives.txt")),
        pronoun_features=pronouns,
        noun_genders=genders,
    )


def load_pos_lexicon(path: str | Path) -> dict[str, str]:
    tags = {}
    for row in _read_lines(Path(path)):
        word, tag = row.split("\t")[:2]
        tags[normalize_token(word)] = tag
    return tags


@dataclass(frozen=True, eq=False)
class Lexicon:
    """Everything the pipeline needs from the lexical side, loaded once."""

    taxonomy: Taxonomy
    wordlists: WordLists
    pos_tags: Mapping[str, str]
    lemmatizer: Lemmatizer

    @classmethod
    def load(cls, directory: str | Path | None = None) -> "Lexicon":
        if directory is None:
            return default_lexicon()
        directory = Path(directory)
        taxonomy = Taxonomy.from_tsv(directory / "taxonomy.tsv")
        pos_tags = load_pos_lexicon(directory / "pos_lexicon.tsv") if (directory / "pos_lexicon.tsv").exists() else {}
        open_class = {w for w, t in pos_tags.items() if t in OPEN_CLASS}
        known = taxonomy.lemmas() | open_class | {"be", "have", "do"}
        return cls(taxonomy, load_wordlists(directory / "wordlists"), pos_tags, Lemmatizer(known))

    def lemma(self, word: str) -> str:
        return self.lemmatizer.lemma(word)

    def senses(self, word: str, pos: str) -> list[str]:
        """Synsets of ``word`` (any inflection) for ``pos``, in sense order."""
        for cand in self.lemmatizer.candidates(word):
            ids = self.taxonomy.senses(cand, pos)
            if ids:
                return ids
        return []

    def base_form(self, word: str, pos: str) -> str | None:
        for cand in self.lemmatizer.candidates(word):
            if self.taxonomy.senses(cand, pos):
                return cand
        return None

    def synonym_list(self, word: str, pos: str) -> list[str]:
        """Top-synset synonyms in synset order, without the word or its base form."""
        base = self.base_form(word, pos)
        if base is None:
            return []
        top = self.taxonomy.synsets[self.taxonomy.senses(base, pos)[0]]
        skip = {base, normalize_token(word)}
        return [lem.replace("_", " ") for lem in top.lemmas if lem not in skip]

    def synonyms(self, word: str, pos: str) -> set[str]:
        return set(self.synonym_list(word, pos))

    def word_similarity(self, w1: str, w2: str) -> float:
        best = 0.0
        for pos in OPEN_CLASS:
            s1 = self.senses(w1, pos)[:TOP_K_SENSES]
            s2 = self.senses(w2, pos)[:TOP_K_SENSES]
            for a in s1:
                for b in s2:
                    best = max(best, self.taxonomy.wu_palmer(a, b))
        return best


def data_dir() -> Path:
    return Path(str(resources.files("knowhunt") / "data"))


@functools.lru_cache(maxsize=None)
def default_lexicon() -> Lexicon:
    return Lexicon.load(data_dir())


def synonyms(lemma: str, pos: str, lex: Lexicon | None = None) -> set[str]:
    """Lemmas of the first-listed synset for (lemma, pos), minus the lemma itself."""
    return (lex or default_lexicon()).synonyms(lemma, pos)


def wu_palmer(a: str, b: str, taxonomy: Taxonomy | None = None) -> float:
    return (taxonomy or default_lexicon().taxonomy).wu_palmer(a, b)


def word_similarity(w1: str, w2: str, lex: Lexicon | None = None) -> float:
    """Best Wu-Palmer score over the top senses of each word, same part of speech only."""
    return (lex or default_lexicon()).word_similarity(w1, w2)
