import json

import pytest

from storynets.corpus import (
    CorpusError,
    RaterScore,
    RatingScheme,
    SchemeMismatchError,
    Story,
    bin_rating,
    filter_complete,
    load_corpus,
    save_corpus_csv,
    save_corpus_json,
    story_word_count,
)


def make_story(sid="s1", scores=(3, 4), kind="human"):
    return Story(
        id=sid, author_kind=kind, prompt=("stamp", "letter", "send"),
        text="A short tale.",
        ratings=tuple(RaterScore(f"rater{i+1}", s) for i, s in enumerate(scores)))


class TestStoryValidation:
    def test_score_bounds(self):
        with pytest.raises(CorpusError):
            RaterScore("rater1", 0)
        with pytest.raises(CorpusError):
            RaterScore("rater1", 6)

    def test_at_most_four_ratings(self):
        with pytest.raises(CorpusError):
            make_story(scores=(3, 3, 3, 3, 3))

    def test_author_kind_restricted(self):
        with pytest.raises(CorpusError):
            make_story(kind="robot")

    def test_empty_id_rejected(self):
        with pytest.raises(CorpusError):
            make_story(sid="")


class TestBinning:
    @pytest.mark.parametrize("score,expected", [
        (1, 0), (2, 0), (3, 1), (4, 2), (5, 2),
    ])
    def test_human_scale(self, score, expected):
        assert bin_rating(score, RatingScheme.HUMAN_SCALE) == expected

    @pytest.mark.parametrize("score,expected", [(3, 0), (4, 1), (5, 2)])
    def test_compressed_top(self, score, expected):
        assert bin_rating(score, RatingScheme.COMPRESSED_TOP) == expected

    @pytest.mark.parametrize("score", [1, 2])
    def test_compressed_top_undefined_below_three(self, score):
        with pytest.raises(SchemeMismatchError):
            bin_rating(score, RatingScheme.COMPRESSED_TOP)


class TestHelpers:
    def test_word_count_splits_on_whitespace(self):
        story = make_story()
        assert story_word_count(story) == 3

    def test_filter_complete_counts_distinct_raters(self):
        full = make_story("s1", scores=(1, 2, 3, 4))
        partial = make_story("s2", scores=(5,))
        kept = filter_complete([full, partial], 4)
        assert [s.id for s in kept] == ["s1"]

    def test_filter_requires_positive_threshold(self):
        with pytest.raises(ValueError):
            filter_complete([make_story()], 0)


class TestCsvRoundTrip:
    def test_three_row_csv(self, tmp_path):
        path = tmp_path / "corpus.csv"
        path.write_text(
            "story_id,author,prompt1,prompt2,prompt3,text,"
            "rater1,rater2,rater3,rater4\n"
            "a,human,x,y,z,one two,1,2,3,4\n"
            "b,llm,x,y,z,three,5,5,5,5\n"
            "c,human,x,y,z,four,3,,2,\n",
            encoding="utf-8")
        corpus = load_corpus(path)
        assert len(corpus) == 3
        assert len(corpus[0].ratings) == 4
        assert len(corpus[2].ratings) == 2
        assert corpus[1].author_kind == "llm"

    def test_round_trip_preserves_everything(self, tmp_path):
        original = [make_story("s1", (1, 5)), make_story("s2", (3,), "llm")]
        path = tmp_path / "c.csv"
        save_corpus_csv(original, path)
        loaded = load_corpus(path)
        assert loaded == original

    def test_header_mismatch_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,text\n1,hello\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="header"):
            load_corpus(path)

    def test_bad_score_names_row_and_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "story_id,author,prompt1,prompt2,prompt3,text,"
            "rater1,rater2,rater3,rater4\n"
            "a,human,x,y,z,t,9,,,\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="rater1"):
            load_corpus(path)

    def test_duplicate_ids_rejected(self, tmp_path):
        path = tmp_path / "dup.csv"
        path.write_text(
            "story_id,author,prompt1,prompt2,prompt3,text,"
            "rater1,rater2,rater3,rater4\n"
            "a,human,x,y,z,t,1,,,\n"
            "a,human,x,y,z,t,2,,,\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="duplicate"):
            load_corpus(path)


class TestJson:
    def test_json_round_trip(self, tmp_path):
        original = [make_story("s1", (2, 4))]
        path = tmp_path / "c.json"
        save_corpus_json(original, path)
        assert load_corpus(path) == original

    def test_malformed_json_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(CorpusError):
            load_corpus(path)

    def test_format_sniffing_by_extension(self, tmp_path):
        path = tmp_path / "c.json"
        save_corpus_json([make_story()], path)
        assert len(load_corpus(path)) == 1
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data[0]["story_id"] == "s1"
