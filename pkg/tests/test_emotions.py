import math

import numpy as np
import pytest

from storynets.emotions import (
    EMOTIONS,
    EmotionProfile,
    LexiconError,
    NullModelConfig,
    count_emotions,
    lexicon_from_tags,
    load_emotion_lexicon,
    profile_story,
    significant_emotions,
    zscore_profile,
)

JOY = EMOTIONS.index("joy")
ANGER = EMOTIONS.index("anger")
SADNESS = EMOTIONS.index("sadness")
FEAR = EMOTIONS.index("fear")


class TestLexicon:
    def test_priors_are_tag_fractions(self, tiny_lexicon):
        assert tiny_lexicon.priors["joy"] == pytest.approx(2 / 5)
        assert tiny_lexicon.priors["anger"] == pytest.approx(2 / 5)

    def test_all_tagged_prior_rejected(self):
        with pytest.raises(LexiconError):
            lexicon_from_tags({"a": {"joy"}, "b": {"joy"}})  # no joy-free entry

    def test_unknown_category_rejected(self):
        with pytest.raises(LexiconError):
            lexicon_from_tags({"a": {"verve"}})

    def test_file_flag_and_category_validation(self, tmp_path):
        p = tmp_path / "lex.tsv"
        p.write_text("word\tjoy\t2\n", encoding="utf-8")
        with pytest.raises(LexiconError, match="flag"):
            load_emotion_lexicon(p)
        p.write_text("word\tglee\t1\n", encoding="utf-8")
        with pytest.raises(LexiconError, match="category"):
            load_emotion_lexicon(p)

    def test_valence_map_modes(self, tiny_lexicon):
        vm = tiny_lexicon.valence_map()
        assert vm["joyful"] == "positive"
        assert vm["grim"] == "negative"
        assert vm["stone"] == "neutral"

    def test_shipped_lexicon_loads(self, resources_dir):
        lex = load_emotion_lexicon(resources_dir / "emotion_lexicon.tsv")
        assert all(0.0 < lex.priors[e] < 1.0 for e in EMOTIONS)


class TestCounting:
    def test_hand_tally(self, tiny_lexicon):
        lemmas = ["joyful", "stone", "grim", "grim", "missing"]
        counts, n = count_emotions(lemmas, tiny_lexicon)
        assert n == 4  # "missing" is not a lexicon entry
        assert counts[JOY] == 1
        assert counts[SADNESS] == 2
        assert counts[ANGER] == 2

    def test_empty_text(self, tiny_lexicon):
        counts, n = count_emotions([], tiny_lexicon)
        assert n == 0
        assert all(v == 0 for v in counts)


class TestZScores:
    def test_analytic_formula(self, tiny_lexicon):
        profile = profile_story(["joyful"] * 6 + ["stone"] * 4, tiny_lexicon,
                                NullModelConfig(mode="analytic"))
        n, p = 10, tiny_lexicon.priors["joy"]
        expected = (6 - n * p) / math.sqrt(n * p * (1 - p))
        assert profile.z[JOY] == pytest.approx(expected, abs=1e-12)
        assert not profile.low_coverage

    def test_zero_matches_gives_flagged_zeros(self, tiny_lexicon):
        profile = profile_story(["missing"], tiny_lexicon,
                                NullModelConfig(mode="analytic"))
        assert profile.z == (0.0,) * len(EMOTIONS)
        assert profile.low_coverage
        assert profile.n_lexicon_tokens == 0

    def test_low_coverage_below_five_tokens(self, tiny_lexicon):
        profile = profile_story(["joyful"] * 4, tiny_lexicon,
                                NullModelConfig(mode="analytic"))
        assert profile.low_coverage
        assert profile.n_lexicon_tokens == 4

    def test_monte_carlo_close_to_analytic(self, tiny_lexicon):
        mc = NullModelConfig(mode="monte_carlo", samples=100_000, seed=3)
        for n_tokens in (30, 100, 300):
            lemmas = (["joyful"] * (n_tokens // 3)
                      + ["grim"] * (n_tokens // 3)
                      + ["stone"] * (n_tokens - 2 * (n_tokens // 3)))
            analytic = profile_story(lemmas, tiny_lexicon,
                                     NullModelConfig(mode="analytic"))
            sampled = profile_story(lemmas, tiny_lexicon, mc)
            for k, emo in enumerate(EMOTIONS):
                assert sampled.z[k] == pytest.approx(
                    analytic.z[k], abs=0.05), (n_tokens, emo)

    def test_monte_carlo_deterministic_per_seed(self, tiny_lexicon):
        cfg = NullModelConfig(mode="monte_carlo", samples=500, seed=9)
        lemmas = ["joyful"] * 10
        a = profile_story(lemmas, tiny_lexicon, cfg)
        b = profile_story(lemmas, tiny_lexicon, cfg)
        assert a.z == b.z

    def test_null_calibration(self, tiny_lexicon):
        # texts drawn from the lexicon itself must average near z = 0
        rng = np.random.default_rng(17)
        words = sorted(tiny_lexicon.entries)
        sums = np.zeros(len(EMOTIONS))
        trials = 1000
        for _ in range(trials):
            lemmas = [words[i] for i in rng.integers(0, len(words), size=60)]
            profile = profile_story(lemmas, tiny_lexicon,
                                    NullModelConfig(mode="analytic"))
            sums += np.array(profile.z)
        assert np.abs(sums / trials).max() <= 0.1

    def test_counts_passed_through(self, tiny_lexicon):
        counts, n = count_emotions(["grim", "grim"], tiny_lexicon)
        profile = zscore_profile(counts, n, tiny_lexicon)
        assert profile.counts[SADNESS] == 2


class TestSignificance:
    def test_strict_threshold(self):
        z = [0.0] * len(EMOTIONS)
        z[JOY] = 1.96       # boundary: not significant
        z[FEAR] = 1.961
        z[SADNESS] = -2.5
        profile = EmotionProfile(
            z=tuple(z), counts=(0,) * len(EMOTIONS),
            n_lexicon_tokens=10, low_coverage=False)
        marked = significant_emotions(profile)
        assert ("joy", "over") not in marked
        assert ("fear", "over") in marked
        assert ("sadness", "under") in marked

    def test_profile_story_wraps_zscores(self, tiny_lexicon):
        profile = profile_story(["joyful"] * 8, tiny_lexicon,
                                NullModelConfig(mode="analytic"))
        assert profile.n_lexicon_tokens == 8
        assert len(profile.z) == len(EMOTIONS)

    def test_as_dict_follows_emotion_order(self, tiny_lexicon):
        profile = profile_story(["joyful"] * 8, tiny_lexicon,
                                NullModelConfig(mode="analytic"))
        assert list(profile.as_dict()) == list(EMOTIONS)


class TestNullModelConfig:
    def test_mode_validated(self):
        with pytest.raises(ValueError):
            NullModelConfig(mode="bootstrap")

    def test_sample_floor(self):
        with pytest.raises(ValueError):
            NullModelConfig(mode="monte_carlo", samples=10)
