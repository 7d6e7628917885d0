"""Forma mentis network construction from dependency-parsed stories.

Per sentence, content words within a bounded syntactic-tree distance are
linked; sentence edge lists merge into one simple graph per story, with
lemma normalisation, negation-driven antonym substitution and valence
labels on the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .conllu import ParsedStory, Sentence

CONTENT_UPOS = frozenset({"NOUN", "PROPN", "VERB", "ADJ", "ADV"})
NEGATOR_LEMMAS = frozenset({"not", "never", "no", "n't"})
DEFAULT_MAX_TREE_DISTANCE = 3

POSITIVE = "positive"
NEGATIVE = "negative"
NEUTRAL = "neutral"


@dataclass(frozen=True)
class StopList:
    words: frozenset[str]

    def __post_init__(self):
        if not self.words:
            raise ValueError("stoplist is empty")
        if any(w != w.lower() for w in self.words):
            raise ValueError("stoplist entries must be lowercase")

    def __contains__(self, word: str) -> bool:
        return word in self.words


@dataclass(frozen=True)
class AntonymLexicon:
    """Lemma -> antonym lemma map (not necessarily symmetric)."""

    entries: dict[str, str]

    def get(self, lemma: str) -> str | None:
        return self.entries.get(lemma)


def load_stoplist(path: str | Path) -> StopList:
    words = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word and not word.startswith("#"):
                words.add(word.lower())
    return StopList(frozenset(words))


def load_antonyms(path: str | Path) -> AntonymLexicon:
    entries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) != 2:
                raise ValueError(f"{path}:{line_num}: expected lemma<TAB>antonym")
            entries[cols[0].strip().lower()] = cols[1].strip().lower()
    return AntonymLexicon(entries)


class Tfmn:
    """Undirected simple graph of lemmas with a valence label per node."""

    def __init__(self):
        self.valence: dict[str, str] = {}  # node -> positive/negative/neutral
        self.edges: set[tuple[str, str]] = set()

    @property
    def nodes(self) -> set[str]:
        return set(self.valence)

    def add_node(self, lemma: str) -> None:
        self.valence.setdefault(lemma, NEUTRAL)

    def add_edge(self, a: str, b: str) -> None:
        if a == b:
            raise ValueError(f"self-loop on {a!r}")
        self.add_node(a)
        self.add_node(b)
        self.edges.add((a, b) if a < b else (b, a))

    def number_of_nodes(self) -> int:
        return len(self.valence)

    def number_of_edges(self) -> int:
        return len(self.edges)

    def neighbors(self) -> dict[str, set[str]]:
        adj: dict[str, set[str]] = {node: set() for node in self.valence}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj


def content_tokens(sentence: Sentence, stoplist: StopList) -> list[int]:
    """Indices of non-stopword content tokens (noun/verb/adj/adv classes)."""
    return [
        tok.index for tok in sentence
        if tok.upos in CONTENT_UPOS and tok.lemma.lower() not in stoplist
    ]


@dataclass
class NegationResult:
    """Effective lemma stream of a sentence's content tokens.

    ``lemmas[k]`` corresponds to the k-th content token; ``flipped`` holds the
    stream positions whose lemma was replaced by an antonym, ``unresolved``
    the negated lemmas that had no antonym entry and were kept as-is.
    """

    lemmas: list[str]
    flipped: list[int] = field(default_factory=list)
    unresolved: list[str] = field(default_factory=list)


def _negated_indices(sentence: Sentence) -> set[int]:
    """Token indices governed by a directly attached negator."""
    negated: set[int] = set()
    for tok in sentence:
        is_neg_rel = "neg" in tok.deprel.lower()
        is_neg_word = (
            tok.upos in ("ADV", "PART") and tok.lemma.lower() in NEGATOR_LEMMAS
        )
        if (is_neg_rel or is_neg_word) and tok.head != 0:
            negated.add(tok.head)
    return negated


def apply_negations(
    sentence: Sentence,
    stoplist: StopList,
    antonyms: AntonymLexicon,
) -> NegationResult:
    """Replace negated content lemmas with their antonyms where known."""
    negated = _negated_indices(sentence)
    tokens = {tok.index: tok for tok in sentence}
    result = NegationResult(lemmas=[])
    for pos, idx in enumerate(content_tokens(sentence, stoplist)):
        lemma = tokens[idx].lemma.lower()
        if idx in negated:
            antonym = antonyms.get(lemma)
            if antonym is not None:
                result.lemmas.append(antonym)
                result.flipped.append(pos)
                continue
            result.unresolved.append(lemma)
        result.lemmas.append(lemma)
    return result


def build_sentence_edges(
    sentence: Sentence,
    stoplist: StopList,
    max_dist: int = DEFAULT_MAX_TREE_DISTANCE,
    lemmas: Sequence[str] | None = None,
) -> list[tuple[str, str]]:
    """Lemma pairs of content tokens within ``max_dist`` tree edges.

    ``lemmas`` optionally overrides the content tokens' own lemmas (one per
    content token, e.g. after negation substitution). Pairs whose lemmas
    coincide are dropped; pair order within each tuple is sorted.
    """
    if max_dist < 1:
        raise ValueError("max_dist must be >= 1")
    indices = content_tokens(sentence, stoplist)
    if lemmas is None:
        tokens = {tok.index: tok for tok in sentence}
        lemmas = [tokens[i].lemma.lower() for i in indices]
    elif len(lemmas) != len(indices):
        raise ValueError(
            f"lemma override length {len(lemmas)} != {len(indices)} content tokens")
    edges: list[tuple[str, str]] = []
    for a in range(len(indices)):
        dist = sentence.distances_from(indices[a])
        for b in range(a + 1, len(indices)):
            if dist[indices[b]] <= max_dist and lemmas[a] != lemmas[b]:
                pair = (lemmas[a], lemmas[b])
                edges.append(pair if pair[0] < pair[1] else (pair[1], pair[0]))
    return edges


def merge_story_network(
    edge_lists: Iterable[Sequence[tuple[str, str]]],
    isolated_lemmas: Iterable[str] = (),
) -> Tfmn:
    """Union all sentence edge lists into one deduplicated simple graph.

    ``isolated_lemmas`` are content lemmas that acquired no edge anywhere in
    the story; they are kept as isolated nodes.
    """
    g = Tfmn()
    for edges in edge_lists:
        for a, b in edges:
            if a != b:
                g.add_edge(a, b)
    for lemma in isolated_lemmas:
        g.add_node(lemma)
    return g


def label_valence(g: Tfmn, valence_lexicon: dict[str, str]) -> Tfmn:
    """Assign lexicon valences to nodes, defaulting to neutral."""
    out = Tfmn()
    out.edges = set(g.edges)
    for node in g.valence:
        out.valence[node] = valence_lexicon.get(node, NEUTRAL)
    return out


@dataclass
class StoryNetwork:
    """Per-story build output: the graph plus diagnostics for the run report."""

    story_id: str
    graph: Tfmn
    effective_lemmas: list[str]  # negation-adjusted content lemma stream
    flipped_count: int
    unresolved_negations: list[str]
    isolated_nodes: int


def build_story_network(
    parsed: ParsedStory,
    stoplist: StopList,
    antonyms: AntonymLexicon,
    valence_lexicon: dict[str, str] | None = None,
    max_dist: int = DEFAULT_MAX_TREE_DISTANCE,
) -> StoryNetwork:
    """Run the full per-story pipeline: link, merge, substitute, label."""
    edge_lists: list[list[tuple[str, str]]] = []
    stream: list[str] = []
    flipped = 0
    unresolved: list[str] = []
    for sentence in parsed.sentences:
        neg = apply_negations(sentence, stoplist, antonyms)
        edge_lists.append(
            build_sentence_edges(sentence, stoplist, max_dist, lemmas=neg.lemmas))
        stream.extend(neg.lemmas)
        flipped += len(neg.flipped)
        unresolved.extend(neg.unresolved)
    linked = {node for edges in edge_lists for pair in edges for node in pair}
    isolated = [lemma for lemma in dict.fromkeys(stream) if lemma not in linked]
    graph = merge_story_network(edge_lists, isolated_lemmas=isolated)
    if valence_lexicon is not None:
        graph = label_valence(graph, valence_lexicon)
    return StoryNetwork(
        story_id=parsed.story_id,
        graph=graph,
        effective_lemmas=stream,
        flipped_count=flipped,
        unresolved_negations=unresolved,
        isolated_nodes=len(isolated),
    )


def write_edge_list(g: Tfmn, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a, b in sorted(g.edges):
            fh.write(f"{a}\t{b}\n")


def write_node_table(g: Tfmn, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for node in sorted(g.valence):
            fh.write(f"{node}\t{g.valence[node]}\n")
