import numpy as np
import pytest

from entrain.errors import ParseError
from entrain.lexicon import (
    DEFAULT_CATEGORY_TAGS,
    categories_of,
    load_default_lexicon,
    parse_lexicon,
    score_categories,
)

HEADER = (
    "%\n"
    "3\tppron\n"
    "9\tipron\n"
    "10\tarticle\n"
    "12\tauxverb\n"
    "16\tadverb\n"
    "17\tpreps\n"
    "18\tconj\n"
    "19\tnegate\n"
    "20\tquant\n"
    "%\n"
)


def make_lexicon(body: str):
    return parse_lexicon(HEADER + body)


def test_parse_minimal_entry():
    lex = make_lexicon("not\t19\n")
    assert [tag for _, tag in lex.categories] == sorted(DEFAULT_CATEGORY_TAGS, key=lambda t: {
        "ppron": 0, "ipron": 1, "article": 2, "auxverb": 3, "adverb": 4,
        "preps": 5, "conj": 6, "negate": 7, "quant": 8}[t])
    assert lex.exact_entries["not"] == {19}
    assert not lex.stem_entries


def test_parse_wildcard_entry():
    lex = make_lexicon("hundre*\t20\n")
    assert lex.stem_entries["hundre"] == {20}
    assert "hundre*" not in lex.exact_entries


def test_unknown_category_id_names_line():
    with pytest.raises(ParseError, match=r"line 12.*unknown category id 99"):
        make_lexicon("zork\t99\n")


def test_duplicate_category_id():
    bad = "%\n1\tppron\n1\tipron\n%\n"
    with pytest.raises(ParseError, match="duplicate category id 1"):
        parse_lexicon(bad)


def test_duplicate_category_tag():
    bad = "%\n1\tppron\n2\tppron\n%\n"
    with pytest.raises(ParseError, match="duplicate category tag"):
        parse_lexicon(bad)


def test_empty_entry_rejected():
    with pytest.raises(ParseError, match="empty entry"):
        make_lexicon("*\t20\n")


def test_malformed_header_line():
    with pytest.raises(ParseError, match="header line"):
        parse_lexicon("%\n1 ppron\n%\n")


def test_entry_without_categories():
    with pytest.raises(ParseError, match="entry line"):
        make_lexicon("word\n")


def test_interior_wildcard_rejected():
    with pytest.raises(ParseError, match="end of an entry"):
        make_lexicon("hu*nd\t20\n")


def test_missing_header_delimiters():
    with pytest.raises(ParseError):
        parse_lexicon("not\t19\n")


def test_comments_and_blank_lines_skipped():
    lex = parse_lexicon("# comment\n\n" + HEADER + "# another\nnot\t19\n\n")
    assert lex.exact_entries["not"] == {19}


def test_multiple_ids_merge():
    lex = make_lexicon("never\t16\t19\n")
    assert lex.exact_entries["never"] == {16, 19}


def test_categories_of_exact_hit():
    lex = make_lexicon("not\t19\n")
    assert categories_of(lex, "not") == {19}


def test_categories_of_stem_prefix():
    lex = make_lexicon("run*\t12\n")
    assert categories_of(lex, "running") == {12}
    assert categories_of(lex, "run") == {12}


def test_categories_of_exact_overrides_stem():
    # frozen against LIWC-compatible scoring on a two-entry toy dictionary:
    # the exact entry wins even when a stem also matches
    lex = make_lexicon("can\t12\ncan*\t20\n")
    assert categories_of(lex, "can") == {12}
    assert categories_of(lex, "candy") == {20}


def test_categories_of_longest_stem_wins():
    lex = make_lexicon("ru*\t17\nrunn*\t12\n")
    assert categories_of(lex, "running") == {12}
    assert categories_of(lex, "rust") == {17}


def test_categories_of_unknown_token_empty():
    lex = make_lexicon("not\t19\n")
    assert categories_of(lex, "zebra") == frozenset()


def test_score_one_negate_in_24_tokens():
    # worked percentage: 1 negate hit out of 24 tokens is 100/24 = 4.17
    # (the source text rounds this to a slightly different display value)
    lex = make_lexicon("not\t19\n")
    tokens = ["not"] + ["zzz"] * 23
    profile = score_categories(lex, tokens)
    negate_index = [tag for _, tag in lex.categories].index("negate")
    assert profile.percentages[negate_index] == pytest.approx(100.0 / 24.0)
    assert abs(profile.percentages[negate_index] - 4.17) < 0.005
    assert profile.token_count == 24


def test_score_empty_tokens():
    lex = make_lexicon("not\t19\n")
    profile = score_categories(lex, [])
    assert profile.token_count == 0
    assert all(p == 0.0 for p in profile.percentages)


def test_score_multi_category_words_exceed_100():
    # hand-count: every token carries two categories, so each of the two
    # category percentages is 100 and the total is 200
    lex = make_lexicon("never\t16\t19\nnor\t18\t19\n")
    profile = score_categories(lex, ["never", "nor", "never", "nor"])
    tags = [tag for _, tag in lex.categories]
    assert profile.percentages[tags.index("negate")] == 100.0
    assert profile.percentages[tags.index("adverb")] == 50.0
    assert profile.percentages[tags.index("conj")] == 50.0
    assert sum(profile.percentages) == 200.0


def test_score_order_invariance_and_doubling():
    lex = load_default_lexicon()
    rng = np.random.default_rng(11)
    vocab = sorted(lex.exact_entries)[:200] + ["zebra", "qux", "flotsam"]
    for _ in range(20):
        tokens = [vocab[i] for i in rng.integers(0, len(vocab), size=30)]
        shuffled = list(tokens)
        rng.shuffle(shuffled)
        base = score_categories(lex, tokens)
        assert score_categories(lex, shuffled).percentages == base.percentages
        doubled = score_categories(lex, tokens + tokens)
        assert doubled.token_count == 2 * base.token_count
        assert doubled.percentages == pytest.approx(base.percentages, abs=1e-12)


def test_score_concatenation_additivity():
    lex = load_default_lexicon()
    rng = np.random.default_rng(12)
    vocab = sorted(lex.exact_entries)[:100] + ["zebra"]
    for _ in range(10):
        part_a = [vocab[i] for i in rng.integers(0, len(vocab), size=17)]
        part_b = [vocab[i] for i in rng.integers(0, len(vocab), size=23)]
        prof_a = score_categories(lex, part_a)
        prof_b = score_categories(lex, part_b)
        whole = score_categories(lex, part_a + part_b)
        for pa, pb, pw in zip(prof_a.percentages, prof_b.percentages, whole.percentages):
            count_sum = pa * prof_a.token_count / 100 + pb * prof_b.token_count / 100
            assert count_sum == pytest.approx(pw * whole.token_count / 100, abs=1e-9)


def test_bundled_lexicon_shape():
    lex = load_default_lexicon()
    assert set(lex.category_tags) == DEFAULT_CATEGORY_TAGS
    assert len(lex.categories) == 9
    assert all(entry for entry in lex.exact_entries)
    assert all(entry for entry in lex.stem_entries)
    declared = set(lex.category_ids)
    for cats in list(lex.exact_entries.values()) + list(lex.stem_entries.values()):
        assert cats <= declared
