import json
import random
import re
from concurrent.futures import ThreadPoolExecutor

import pytest
from hypothesis import given, settings, strategies as st

from knowhunt.labels import Ordering
from knowhunt.querygen import SearchQuery
from knowhunt.retrieval import (
    MAX_GAP,
    CorpusIndex,
    Document,
    FixtureError,
    FixtureProvider,
    IndexFormatError,
    build_index,
    fixture_search,
    load_index,
    save_index,
    search,
    sentence_spans,
)

YELL = "I got really upset with her and I started to yell at her."


def index_of(*texts):
    return CorpusIndex.from_documents(Document(f"d{i}", t) for i, t in enumerate(texts))


def test_build_index_two_files(tmp_path):
    (tmp_path / "a.txt").write_text("One sentence here.")
    (tmp_path / "b.txt").write_text("Another one.")
    idx = build_index(tmp_path)
    assert [d.doc_id for d in idx.documents] == ["a.txt", "b.txt"]
    assert sum(len(s) for s in idx.sentence_spans) == 2


def test_build_index_missing_dir(tmp_path):
    with pytest.raises(FileNotFoundError):
        build_index(tmp_path / "nope")


def test_build_index_unreadable(tmp_path):
    (tmp_path / "bad.txt").write_bytes(b"\xff\xfe\xfa")
    with pytest.raises(OSError, match="bad.txt"):
        build_index(tmp_path)


def test_sentence_boundary():
    assert len(sentence_spans("I yelled. She left.")) == 2
    assert len(sentence_spans("It cost 3.5 dollars. ok then.")) == 1


def test_apostrophe_kept():
    idx = index_of("He couldn't lift it.")
    assert "couldn't" in idx.postings
    text = idx.documents[0].text
    for word, plist in idx.postings.items():
        for d, s, off in plist:
            assert text[off : off + len(word)].lower() == word


def test_search_yell_example():
    idx = index_of(YELL)
    res = search(idx, SearchQuery("yell at", "upset"))
    assert len(res) == 1
    s = res[0]
    assert s.text[s.term_c_span.start : s.term_c_span.end] == "yell at"
    assert s.text[s.term_q_span.start : s.term_q_span.end] == "upset"


def test_exclusion_drops_document():
    idx = index_of(YELL, "Winograd once wrote this. " + YELL)
    res = search(idx, SearchQuery("yell at", "upset", ("Winograd",)))
    assert [s.doc_id for s in res] == ["d0"]


def test_exclusion_whole_word():
    idx = index_of("The manager got upset and started to yell at them.")
    assert len(search(idx, SearchQuery("yell at", "upset", ("man",)))) == 1


def test_gap_limit():
    filler_80 = "x" * 78
    text = f"He was upset {filler_80} yell at"
    gap = text.index("yell") - (text.index("upset") + len("upset"))
    assert gap == 80
    assert search(index_of(text), SearchQuery("yell at", "upset")) == []
    filler = "x" * (MAX_GAP - 2)
    text = f"He was upset {filler} yell at"
    assert len(search(index_of(text), SearchQuery("yell at", "upset"))) == 1


def test_adjacent_sentences_only():
    idx = index_of("She was upset. Then nothing. Then she would yell at him.")
    assert search(idx, SearchQuery("yell at", "upset")) == []
    idx = index_of("She was upset. So she would yell at him.")
    res = search(idx, SearchQuery("yell at", "upset"))
    assert len(res) == 1 and res[0].text == "She was upset. So she would yell at him."


def test_lemma_match_single_words_only():
    idx = index_of("They yelled because they were upset.")
    assert len(search(idx, SearchQuery("yell", "upset"))) == 1
    assert search(idx, SearchQuery("yell at", "upset")) == []


def test_phrase_is_contiguous():
    idx = index_of("He would yell loudly at her because he was upset.")
    assert search(idx, SearchQuery("yell at", "upset")) == []


def test_ordering():
    idx = index_of("She was upset and she yelled.", "She yelled and she was upset.")
    c_first = search(idx, SearchQuery("yelled", "upset", ordering=Ordering.C_BEFORE_Q))
    q_first = search(idx, SearchQuery("yelled", "upset", ordering=Ordering.Q_BEFORE_C))
    assert [s.doc_id for s in c_first] == ["d1"]
    assert [s.doc_id for s in q_first] == ["d0"]
    assert len(search(idx, SearchQuery("yelled", "upset"))) == 2


def test_limit():
    idx = index_of(*[YELL] * 10)
    assert len(search(idx, SearchQuery("yell at", "upset"), limit=3)) == 3


def test_index_round_trip(tmp_path):
    (tmp_path / "c").mkdir()
    for i in range(5):
        (tmp_path / "c" / f"{i}.txt").write_text(f"Doc {i}. " + YELL + " Then they left.\n")
    idx = build_index(tmp_path / "c")
    save_index(idx, tmp_path / "a.idx")
    save_index(build_index(tmp_path / "c"), tmp_path / "b.idx")
    assert (tmp_path / "a.idx").read_bytes() == (tmp_path / "b.idx").read_bytes()
    loaded = load_index(tmp_path / "a.idx")
    q = SearchQuery("yell at", "upset")
    assert search(loaded, q) == search(idx, q)


def test_index_version_mismatch(tmp_path):
    p = tmp_path / "x.idx"
    p.write_text("#knowhunt-index\tv0\n")
    with pytest.raises(IndexFormatError):
        load_index(p)
    p.write_text("something else\n")
    with pytest.raises(IndexFormatError):
        load_index(p)


def test_fixture_lift_weak(data):
    res = fixture_search(data / "fixtures" / "lift_weak.jsonl", SearchQuery("couldn't lift", "was so weak"))
    assert len(res) == 4
    assert res[3].matched_term_c == "lift" and res[3].matched_term_q == "weak"


def test_fixture_missing_key(data):
    assert fixture_search(data / "fixtures" / "lift_weak.jsonl", SearchQuery("a", "b")) == []


def test_fixture_drops_invalid(tmp_path):
    far = "She was upset " + "x" * 90 + " yell at"
    rec = {
        "term_c": "yell at",
        "term_q": "upset",
        "snippets": [{"text": YELL}, {"text": far}, {"text": "Winograd: " + YELL}],
    }
    p = tmp_path / "f.jsonl"
    p.write_text(json.dumps(rec) + "\n")
    prov = FixtureProvider(p)
    res = prov.search(SearchQuery("yell at", "upset", ("Winograd",)))
    assert len(res) == 1 and prov.dropped == 2


def test_fixture_malformed(tmp_path):
    p = tmp_path / "f.jsonl"
    p.write_text("{not json\n")
    with pytest.raises(FixtureError):
        FixtureProvider(p)
    p.write_text(json.dumps({"term_c": "a", "term_q": "b"}) + "\n")
    with pytest.raises(FixtureError):
        FixtureProvider(p)


def test_planted_single_snippet():
    rng = random.Random(3)
    words = "the a river stone walks quietly green under bright market".split()
    docs = [" ".join(rng.choice(words) for _ in range(12)).capitalize() + "." for _ in range(50)]
    docs[17] = "Yesterday she was upset so she started to yell at him."
    idx = index_of(*docs)
    res = search(idx, SearchQuery("yell at", "upset"))
    assert [s.doc_id for s in res] == ["d17"]


def test_parallel_queries_stable():
    idx = index_of(*(YELL.replace("her", f"her {i}") for i in range(30)))
    queries = [SearchQuery("yell at", "upset"), SearchQuery("yell", "upset"), SearchQuery("started", "upset")] * 5
    serial = [search(idx, q) for q in queries]
    with ThreadPoolExecutor(4) as pool:
        parallel = list(pool.map(lambda q: search(idx, q), queries))
    assert serial == parallel


_WORDS = ["he", "she", "was", "upset", "yell", "at", "him", "and", "then", "the", "Winograd", "it", "ran", "so"]


@st.composite
def corpora(draw):
    docs = []
    for _ in range(draw(st.integers(1, 6))):
        sents = []
        for _ in range(draw(st.integers(1, 4))):
            ws = draw(st.lists(st.sampled_from(_WORDS), min_size=1, max_size=25))
            sents.append(" ".join(ws).capitalize() + draw(st.sampled_from([".", "!", "?"])))
        docs.append(" ".join(sents))
    return docs


@settings(max_examples=150, deadline=None)
@given(corpora(), st.sampled_from(list(Ordering)), st.booleans())
def test_snippet_invariants(docs, ordering, exclude):
    idx = index_of(*docs)
    excl = ("Winograd",) if exclude else ()
    q = SearchQuery("yell at", "upset", excl, ordering)
    for s in search(idx, q):
        for span in (s.term_c_span, s.term_q_span):
            assert 0 <= span.start < span.end <= len(s.text)
        assert s.text[s.term_c_span.start : s.term_c_span.end].lower() == "yell at"
        assert s.gap <= MAX_GAP
        if exclude:
            assert not re.search(r"\bwinograd\b", s.text, re.I)
        if ordering == Ordering.C_BEFORE_Q:
            assert s.term_c_span.start < s.term_q_span.start
        if ordering == Ordering.Q_BEFORE_C:
            assert s.term_q_span.start < s.term_c_span.start
    assert search(idx, q) == search(idx, q)
