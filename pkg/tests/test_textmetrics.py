import pytest
from hypothesis import given
from hypothesis import strategies as st

from bonmt.textmetrics import (
    BleuConfig,
    ChrfConfig,
    bleu_corpus,
    chrf_words,
    chrfpp_corpus,
    default_bleu_config,
    tokenize_13a,
    tokenize_chars,
)

from helpers import load_fixture_json
from oracles import chrfpp_oracle


@pytest.fixture(scope="module")
def fixtures():
    return load_fixture_json("metric_fixtures.json")


class TestTokenizers:
    def test_13a_splits_punctuation(self):
        assert tokenize_13a("Hello, world!") == ["Hello", ",", "world", "!"]

    def test_13a_keeps_inword_hyphen(self):
        assert tokenize_13a("state-of-the-art") == ["state-of-the-art"]

    def test_13a_separates_digit_punct(self):
        assert tokenize_13a("1. item") == ["1", ".", "item"]

    def test_char_level_drops_whitespace(self):
        assert tokenize_chars("你好 世界") == ["你", "好", "世", "界"]

    def test_chrf_words_punctuation_standalone(self):
        assert chrf_words("Hi, there.") == ["Hi", ",", "there", "."]


class TestBleu:
    def test_identity_is_100(self):
        hyps = ["the cat sat on the mat", "a quick brown fox"]
        assert bleu_corpus(hyps, [[h] for h in hyps]) == pytest.approx(100.0)

    def test_disjoint_is_0(self):
        assert bleu_corpus(["aa bb cc dd"], [["ee ff gg hh"]]) == 0.0

    def test_zero_precision_without_smoothing_is_0(self):
        # 4-gram match is impossible; smoothing 'none' zeroes the whole score
        assert bleu_corpus(["a b c"], [["a b x"]]) == 0.0

    def test_add_k_smoothing_rescues(self):
        cfg = BleuConfig(smoothing="add_k")
        assert bleu_corpus(["a b c"], [["a b x"]], cfg) > 0.0

    def test_multi_ref_max_clip(self):
        # each ref alone misses; together they cover the hypothesis
        score_joint = bleu_corpus(["a b c d e"], [["a b c d e"]])
        score_multi = bleu_corpus(["a b c d e"], [["a b c d e", "z z z"]])
        assert score_multi == score_joint

    def test_brevity_penalty(self):
        long_ref = [["one two three four five six seven eight"]]
        full = bleu_corpus(["one two three four five six seven eight"], long_ref)
        short = bleu_corpus(["one two three four"], long_ref)
        assert short < full

    def test_latin_fixture_matches_reference_tool(self, fixtures):
        fx = fixtures["latin"]
        got = bleu_corpus(fx["hyps"], [[r] for r in fx["refs"]])
        assert got == pytest.approx(fx["bleu"], abs=0.1)

    def test_char_fixture_matches_reference_tool(self, fixtures):
        fx = fixtures["char"]
        cfg = BleuConfig(tokenizer="char_level")
        got = bleu_corpus(fx["hyps"], [[r] for r in fx["refs"]], cfg)
        assert got == pytest.approx(fx["bleu"], abs=0.1)

    def test_signature_mentions_choices(self):
        cfg = BleuConfig(smoothing="add_k", tokenizer="char_level")
        sig = cfg.signature
        assert "add_k" in sig and "char" in sig


class TestChrf:
    def test_identity_is_100(self):
        hyps = ["Der Hund schläft.", "Alles gut."]
        assert chrfpp_corpus(hyps, [[h] for h in hyps]) == pytest.approx(100.0)

    def test_disjoint_is_0(self):
        assert chrfpp_corpus(["aaaa"], [["zzzz"]]) == 0.0

    def test_fixtures_match_brute_force_oracle(self, fixtures):
        for name in ("latin", "char"):
            fx = fixtures[name]
            got = chrfpp_corpus(fx["hyps"], [[r] for r in fx["refs"]])
            assert got == pytest.approx(fx["chrfpp"], abs=0.1)
            # recompute the oracle live as well: frozen value and oracle agree
            assert chrfpp_oracle(fx["hyps"], fx["refs"]) == pytest.approx(fx["chrfpp"], abs=1e-9)

    def test_char_only_matches_reference_tool(self, fixtures):
        cfg = ChrfConfig(word_order=0)
        for name in ("latin", "char"):
            fx = fixtures[name]
            got = chrfpp_corpus(fx["hyps"], [[r] for r in fx["refs"]], cfg)
            assert got == pytest.approx(fx["chrf_char"], abs=0.1)

    def test_multi_ref_picks_best(self):
        hyp = ["Der Hund schläft auf dem Sofa."]
        good = "Der Hund schläft auf dem Sofa."
        bad = "Die Katze sitzt im Garten."
        assert chrfpp_corpus(hyp, [[bad, good]]) == pytest.approx(100.0)

    @given(st.text(min_size=1, max_size=40))
    def test_identity_always_100_or_0(self, text):
        # any text scores 100 against itself when it has letters; pure
        # whitespace yields no n-grams anywhere
        score = chrfpp_corpus([text], [[text]])
        assert score == pytest.approx(100.0) or score == 0.0


class TestDefaults:
    def test_char_level_for_han_kana(self):
        assert default_bleu_config("zh").tokenizer == "char_level"
        assert default_bleu_config("ja").tokenizer == "char_level"
        assert default_bleu_config("de").tokenizer == "intl_13a_compatible"
