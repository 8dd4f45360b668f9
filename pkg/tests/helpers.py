"""Generators and oracles shared by the test modules."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from pathlib import Path

from knowhunt.lexicon import Synset, Taxonomy
from knowhunt.retrieval import Snippet, locate_terms
from knowhunt.schema import ProblemInstance

# -- snippets ------------------------------------------------------------------


def snippet(text: str, term_c: str, term_q: str, doc_id: str = "d") -> Snippet:
    placed = locate_terms(text, term_c, term_q)
    assert placed is not None, (text, term_c, term_q)
    return Snippet(text, doc_id, placed[0], placed[1], term_c, term_q)


# -- taxonomy oracle -------------------------------------------------------------


def random_taxonomy(seed: int, max_nodes: int = 50) -> Taxonomy:
    """Random DAG; some nodes get two parents and there may be several roots."""
    rng = random.Random(seed)
    n = rng.randint(2, max_nodes)
    n_roots = rng.randint(1, 3)
    synsets = []
    for i in range(n):
        if i < n_roots:
            parents = ()
        else:
            k = 1 if rng.random() < 0.7 else 2
            parents = tuple(sorted({f"s{rng.randrange(i)}" for _ in range(k)}))
        synsets.append(Synset(f"s{i}", "Noun", (f"w{i}",), parents))
    return Taxonomy(synsets)


def _root_paths(tax: Taxonomy, node: str):
    parents = tax.synsets[node].parents
    if not parents:
        yield (node,)
        return
    for p in parents:
        for path in _root_paths(tax, p):
            yield (node,) + path


def oracle_wu_palmer(tax: Taxonomy, a: str, b: str) -> Fraction:
    """Enumerate every path to a root; depth = nodes on the longest one."""

    def depth(x):
        return max(len(p) for p in _root_paths(tax, x))

    def ancestors(x):
        return {n for p in _root_paths(tax, x) for n in p}

    if a == b:
        return Fraction(1)
    common = ancestors(a) & ancestors(b)
    da, db = depth(a), depth(b)
    if not common:
        return Fraction(2, da + db + 2)
    return Fraction(2 * max(depth(c) for c in common), da + db)


# -- planted corpus --------------------------------------------------------------

_ONSETS = "b d f g k l m n p r s t v z".split()
_VOWELS = "a e i o u".split()


def _word(rng: random.Random, used: set, suffix: str = "") -> str:
    while True:
        w = "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(2)) + rng.choice(_ONSETS)
        w += suffix
        if w not in used:
            used.add(w)
            return w


_FILLER = [
    "The weather was mild for most of the week.",
    "Prices at the market rose again in the spring.",
    "A long road runs along the river to the old mill.",
    "Most visitors arrive by train in the morning.",
    "The committee met twice and published a short note.",
    "Several houses on the hill were painted white.",
    "The library opens late on public holidays.",
    "Rain fell steadily through the night.",
]


def planted_pairs(n_pairs: int = 20, seed: int = 0):
    """Synthetic twin pairs plus the planted sentences that decide each twin."""
    rng = random.Random(seed)
    used: set = set()
    pairs = []
    for k in range(n_pairs):
        n1, n2 = _word(rng, used), _word(rng, used)
        verb = _word(rng, used, "ed")
        adj_a, adj_b = _word(rng, used, "ful"), _word(rng, used, "ous")
        base = f"The {n1} {verb} the {n2} because he was so {{}}."
        twins = []
        for twin, adj, answer in (("a", adj_a, "agent"), ("b", adj_b, "patient")):
            text = base.format(adj)
            twins.append(
                ProblemInstance.from_strings(
                    f"pair{k:02d}{twin}", text, f"The {n1}", f"the {n2}", "he", answer, f"pair{k:02d}"
                )
            )
        agent_ev = f"I was so {adj_a} that I {verb} him."
        patient_ev = f"She {verb} him because he was so {adj_b}."
        pairs.append(
            {
                "instances": twins,
                "support": [agent_ev] * 3 + [f"She {verb} him because he was so {adj_a}."]
                + [patient_ev] * 3 + [f"I was so {adj_b} that I {verb} him."],
                # would flip both twins if the E1 exclusion were ignored
                "excluded": [f"The {n1} was so {adj_b} that the {n1} {verb} him."] * 4,
            }
        )
    return pairs


def write_planted_corpus(root: Path, n_docs: int = 500, n_pairs: int = 20, seed: int = 0):
    """Write ``n_docs`` text files; return the planted instances."""
    rng = random.Random(seed + 1)
    pairs = planted_pairs(n_pairs, seed)
    planted = [s for p in pairs for s in p["support"] + p["excluded"]]
    if len(planted) > n_docs:
        raise ValueError("corpus too small for the planted sentences")
    root.mkdir(parents=True, exist_ok=True)
    docs = []
    for i in range(n_docs):
        body = rng.sample(_FILLER, 3)
        if i < len(planted):
            body.insert(rng.randrange(len(body) + 1), planted[i])
        docs.append(" ".join(body))
    order = list(range(n_docs))
    rng.shuffle(order)
    for name, i in enumerate(order):
        (root / f"doc{name:04d}.txt").write_text(docs[i] + "\n", encoding="utf-8")
    return list(itertools.chain.from_iterable(p["instances"] for p in pairs))
