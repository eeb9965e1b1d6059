import json

import pytest
from hypothesis import given, strategies as st

from kimatch.knowledge import (
    EmptyLexicon,
    FormatError,
    Lexicon,
    load_category_dictionary,
    load_emotion_scale,
    match_concepts,
    parse_lexicon,
    serialize_lexicon,
)
from kimatch.tokenization import normalize_phrase, tokenize


def test_parse_lexicon_text_form():
    lex = parse_lexicon("panic attacks\nagoraphobia\non edge\n", name="anxiety")
    assert lex.concepts == {"panic attacks", "agoraphobia", "on edge"}


def test_parse_lexicon_normalization_dedupes():
    lex = parse_lexicon("Fear\nfear\nFEAR \n", name="x")
    assert lex.concepts == {"fear"}


def test_parse_lexicon_json_form():
    src = json.dumps({"name": "dep", "concepts": ["Apathy", "apathy", "low  spirits"]})
    lex = parse_lexicon(src)
    assert lex.name == "dep"
    assert lex.concepts == {"apathy", "low spirits"}


def test_parse_lexicon_fifty_line_fixture_matches_line_oracle():
    lines = [f"Concept Number {i}" for i in range(30)] + [f"concept  number {i}" for i in range(20)]
    source = "\n".join(lines) + "\n# trailing comment\n"
    # independent oracle: normalize each line by hand and count distinct
    oracle = set()
    for line in lines:
        oracle.add(" ".join(line.lower().split()))
    lex = parse_lexicon(source, name="fixture")
    assert len(lex) == len(oracle) == 30


def test_parse_lexicon_errors():
    with pytest.raises(EmptyLexicon):
        parse_lexicon("# nothing here\n\n", name="empty")
    with pytest.raises(FormatError):
        parse_lexicon('{"concepts": "not-a-list"}')
    with pytest.raises(FormatError):
        parse_lexicon("{broken json", name="x")


def test_match_concepts_paper_phrase(lexicons):
    tokens = tokenize("having panic attacks daily")
    found = match_concepts(tokens, lexicons["anxiety"])
    assert ("panic attacks", (1, 3)) in found


def test_match_concepts_empty():
    lex = parse_lexicon("fear", name="x")
    assert match_concepts([], lex) == set()


def test_match_concepts_longest_wins():
    lex = parse_lexicon("fear\nfear of eating in public", name="anx")
    tokens = tokenize("my fear of eating in public grew")
    found = match_concepts(tokens, lex)
    # oracle: enumerate every sub-phrase occurrence, keep only maximal ones
    all_matches = []
    for concept in lex.concepts:
        ctoks = concept.split()
        for i in range(len(tokens) - len(ctoks) + 1):
            if tokens[i : i + len(ctoks)] == ctoks:
                all_matches.append((concept, (i, i + len(ctoks))))
    maximal = [
        m for m in all_matches
        if not any(o != m and o[1][0] <= m[1][0] and m[1][1] <= o[1][1] for o in all_matches)
    ]
    assert found == set(maximal)
    assert found == {("fear of eating in public", (1, 6))}


def test_match_spans_never_overlap_and_bounded(lexicons):
    text = "fear fear of eating in public panic attacks fear agoraphobia panic"
    tokens = tokenize(text)
    found = match_concepts(tokens, lexicons["anxiety"])
    spans = sorted(span for _c, span in found)
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        assert e1 <= s2
    assert len(found) <= len(tokens)
    for concept, (s, e) in found:
        assert " ".join(tokens[s:e]) == concept


@given(st.lists(st.sampled_from(["fear", "tense", "calm", "panic", "attacks", "of", "edge", "on"]), max_size=30))
def test_match_count_bounded_by_tokens(tokens):
    lex = parse_lexicon("fear\npanic attacks\non edge\ntense", name="anx")
    assert len(match_concepts(tokens, lex)) <= max(len(tokens), 0)


@given(
    st.sets(
        st.text(alphabet="abcdefg ", min_size=1, max_size=12).filter(lambda s: normalize_phrase(s)),
        min_size=1,
        max_size=12,
    )
)
def test_parse_serialize_roundtrip(raw_concepts):
    lex = Lexicon(name="t", concepts=frozenset(normalize_phrase(c) for c in raw_concepts if normalize_phrase(c)))
    again = parse_lexicon(serialize_lexicon(lex))
    assert again.concepts == lex.concepts
    assert parse_lexicon(serialize_lexicon(again)).concepts == lex.concepts


@given(st.text(max_size=40))
def test_normalization_idempotent(phrase):
    once = normalize_phrase(phrase)
    assert normalize_phrase(once) == once


def test_category_dictionary_all_nine(categories):
    assert set(categories.categories) >= {
        "Emotional", "Social", "Biological", "Cognitive", "FocusFuture",
        "Modals", "InstADL", "BasicADL", "Equipment",
    }


def test_category_dictionary_duplicates_collapse():
    src = json.dumps({"categories": {c: [] for c in (
        "Emotional", "Social", "Biological", "Cognitive", "FocusFuture", "Modals",
        "InstADL", "BasicADL", "Equipment")} | {"Social": ["friend", "Friend", "FRIEND"]}})
    # dict union keeps the later Social entry
    d = load_category_dictionary(src)
    assert d.words("Social") == {"friend"}


def test_category_dictionary_lookup():
    src = json.dumps({"categories": {
        "Emotional": [], "Social": ["friend"], "Biological": [], "Cognitive": [],
        "FocusFuture": [], "Modals": ["will"], "InstADL": [], "BasicADL": [], "Equipment": [],
    }})
    d = load_category_dictionary(src)
    assert d.categories_of("will") == {"Modals"}
    assert d.categories_of("friend") == {"Social"}


def test_category_dictionary_missing_category_is_error():
    with pytest.raises(FormatError):
        load_category_dictionary(json.dumps({"categories": {"Social": ["friend"]}}))


def test_emotion_scale_parse_and_bounds():
    scale = load_emotion_scale("min=1.0\tmax=9.0\tneutral=5.0\nhappy\t8.3\nsad\t2.4\n")
    assert scale.scores["happy"] == 8.3
    assert scale.neutral == 5.0
    with pytest.raises(FormatError):
        load_emotion_scale("min=1.0\tmax=9.0\tneutral=5.0\nhappy\t12.0\n")
    with pytest.raises(FormatError):
        load_emotion_scale("max=9.0 neutral=5.0\nhappy\t8.0\n")


def test_default_emotion_scale_within_bounds(emotion_scale):
    assert all(emotion_scale.min_score <= s <= emotion_scale.max_score for s in emotion_scale.scores.values())
