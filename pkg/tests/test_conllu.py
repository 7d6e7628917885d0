import io

import numpy as np
import pytest

from oracles import oracle_tree_distance, random_dependency_sentence
from storynets.conllu import (
    ConlluParseError,
    Sentence,
    Token,
    TreeStructureError,
    parse_conllu,
    parse_conllu_file,
    tree_distance,
)

MINIMAL = """\
1\tPeter\tpeter\tPROPN\tNNP\t_\t2\tnsubj\t_\t_
2\tsleeps\tsleep\tVERB\tVBZ\t_\t0\troot\t_\t_
"""


def make_sentence(heads, upos=None):
    upos = upos or ["NOUN"] * len(heads)
    toks = [Token(index=i + 1, surface=f"w{i+1}", lemma=f"w{i+1}",
                  upos=upos[i], head=h, deprel="dep" if h else "root")
            for i, h in enumerate(heads)]
    return Sentence(toks)


class TestParsing:
    def test_minimal_two_token_block(self):
        sentences = parse_conllu(io.StringIO(MINIMAL))
        assert len(sentences) == 1
        sent = sentences[0]
        assert len(sent) == 2
        assert sent.root.surface == "sleeps"

    def test_comments_and_blank_lines_ignored(self):
        text = "# sent_id = 1\n" + MINIMAL + "\n\n# another\n" + MINIMAL
        sentences = parse_conllu(io.StringIO(text))
        assert len(sentences) == 2

    def test_peter_fixture(self, peter_sentence):
        assert len(peter_sentence) == 17
        assert peter_sentence.root.surface == "loves"

    def test_wrong_column_count_names_line(self):
        with pytest.raises(ConlluParseError, match="line 1"):
            parse_conllu(io.StringIO("1\tPeter\tpeter\n"))

    def test_non_integer_head_rejected(self):
        bad = "1\tA\ta\tNOUN\t_\t_\tx\tdep\t_\t_\n"
        with pytest.raises(ConlluParseError):
            parse_conllu(io.StringIO(bad))

    def test_multiword_token_lines_skipped(self):
        text = ("1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n"
                "1\tdo\tdo\tVERB\t_\t_\t0\troot\t_\t_\n"
                "2\tnot\tnot\tPART\t_\t_\t1\tadvmod\t_\t_\n")
        sentences = parse_conllu(io.StringIO(text))
        assert len(sentences[0]) == 2

    def test_file_loader(self, fixtures_dir):
        sentences = parse_conllu_file(fixtures_dir / "peter.conllu")
        assert len(sentences) == 1


class TestTreeValidation:
    def test_no_root_rejected(self):
        with pytest.raises(TreeStructureError):
            make_sentence([2, 1])

    def test_two_roots_rejected(self):
        with pytest.raises(TreeStructureError):
            make_sentence([0, 0])

    def test_cycle_rejected(self):
        with pytest.raises(TreeStructureError):
            make_sentence([0, 3, 2])

    def test_dangling_head_rejected(self):
        with pytest.raises(TreeStructureError):
            make_sentence([0, 9])

    def test_self_head_rejected(self):
        with pytest.raises(TreeStructureError):
            Token(index=1, surface="a", lemma="a", upos="NOUN",
                  head=1, deprel="dep")


class TestTreeDistance:
    def test_adjacent_tokens(self):
        sent = make_sentence([0, 1])
        assert sent.tree_distance(1, 2) == 1

    def test_same_token_is_zero(self):
        sent = make_sentence([0, 1])
        assert sent.tree_distance(2, 2) == 0

    def test_peter_to_loves_is_two(self, peter_sentence):
        idx = {t.surface: t.index for t in peter_sentence}
        assert peter_sentence.tree_distance(idx["Peter"], idx["loves"]) == 2

    def test_module_level_wrapper(self, peter_sentence):
        idx = {t.surface: t.index for t in peter_sentence}
        assert tree_distance(peter_sentence, idx["Peter"], idx["cheese"]) == 3

    def test_out_of_range_rejected(self):
        sent = make_sentence([0, 1])
        with pytest.raises(IndexError):
            sent.tree_distance(1, 5)

    def test_matches_bfs_oracle_on_random_trees(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            toks = random_dependency_sentence(rng)
            heads = [h for (_, _, _, h) in toks]
            sent = make_sentence(heads)
            n = len(heads)
            i = int(rng.integers(1, n + 1))
            j = int(rng.integers(1, n + 1))
            assert sent.tree_distance(i, j) == oracle_tree_distance(heads, i, j)

    def test_distances_from_agrees_with_pairwise(self, peter_sentence):
        src = 1
        dists = peter_sentence.distances_from(src)
        for t in peter_sentence:
            assert dists[t.index] == peter_sentence.tree_distance(src, t.index)
