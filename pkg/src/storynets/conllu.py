"""CoNLL-U dependency parses: validated sentence trees and tree distances."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable


class ConlluParseError(ValueError):
    """Malformed CoNLL-U input (message carries the offending line number)."""


class TreeStructureError(ValueError):
    """Head pointers of a sentence do not form a single tree."""


@dataclass(frozen=True)
class Token:
    index: int  # 1-based position within the sentence
    surface: str
    lemma: str
    upos: str
    head: int  # 0 = syntactic root
    deprel: str

    def __post_init__(self):
        if self.index < 1:
            raise TreeStructureError(f"token index {self.index} < 1")
        if self.head < 0:
            raise TreeStructureError(f"token {self.index}: head {self.head} < 0")
        if self.head == self.index:
            raise TreeStructureError(f"token {self.index} is its own head")


class Sentence:
    """An ordered token list whose head pointers form a single tree."""

    def __init__(self, tokens: Iterable[Token], origin: str = ""):
        self.tokens: tuple[Token, ...] = tuple(tokens)
        self.origin = origin
        self._validate()
        self._adjacency = self._build_adjacency()

    def _validate(self) -> None:
        n = len(self.tokens)
        where = f" in {self.origin}" if self.origin else ""
        if n == 0:
            raise TreeStructureError(f"empty sentence{where}")
        for pos, tok in enumerate(self.tokens, start=1):
            if tok.index != pos:
                raise TreeStructureError(
                    f"sentence{where}: token ids not contiguous at position {pos}")
            if tok.head > n:
                raise TreeStructureError(
                    f"sentence{where}: token {pos} heads nonexistent token {tok.head}")
        roots = [t.index for t in self.tokens if t.head == 0]
        if len(roots) != 1:
            raise TreeStructureError(
                f"sentence{where}: expected exactly one root, found {len(roots)}")
        # Reachability from the root proves the heads are acyclic and connected.
        children: dict[int, list[int]] = {i: [] for i in range(0, n + 1)}
        for tok in self.tokens:
            children[tok.head].append(tok.index)
        reached = set()
        stack = [roots[0]]
        while stack:
            node = stack.pop()
            reached.add(node)
            stack.extend(children[node])
        if len(reached) != n:
            raise TreeStructureError(
                f"sentence{where}: head pointers contain a cycle or detached tokens")

    def _build_adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(len(self.tokens) + 1)]
        for tok in self.tokens:
            if tok.head != 0:
                adj[tok.index].append(tok.head)
                adj[tok.head].append(tok.index)
        return adj

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def root(self) -> Token:
        return next(t for t in self.tokens if t.head == 0)

    def tree_distance(self, i: int, j: int) -> int:
        """Edges on the unique undirected path between tokens ``i`` and ``j``."""
        n = len(self.tokens)
        if not (1 <= i <= n and 1 <= j <= n):
            raise IndexError(f"token index out of range: ({i}, {j}), sentence has {n}")
        if i == j:
            return 0
        dist = {i: 0}
        queue = deque([i])
        while queue:
            node = queue.popleft()
            for nb in self._adjacency[node]:
                if nb not in dist:
                    dist[nb] = dist[node] + 1
                    if nb == j:
                        return dist[nb]
                    queue.append(nb)
        raise TreeStructureError(f"no path between tokens {i} and {j}")  # unreachable

    def distances_from(self, i: int) -> dict[int, int]:
        """BFS distances from token ``i`` to every token of the sentence."""
        dist = {i: 0}
        queue = deque([i])
        while queue:
            node = queue.popleft()
            for nb in self._adjacency[node]:
                if nb not in dist:
                    dist[nb] = dist[node] + 1
                    queue.append(nb)
        return dist


@dataclass(frozen=True)
class ParsedStory:
    story_id: str
    sentences: tuple[Sentence, ...]


def tree_distance(sentence: Sentence, i: int, j: int) -> int:
    return sentence.tree_distance(i, j)


def parse_conllu(stream: Iterable[str], origin: str = "") -> list[Sentence]:
    """Parse CoNLL-U text into validated sentences.

    Multiword-token ranges (``i-j`` ids) and empty nodes (``i.j`` ids) are
    skipped; the ID, FORM, LEMMA, UPOS, HEAD and DEPREL columns are kept.
    """
    sentences: list[Sentence] = []
    tokens: list[Token] = []

    def flush(line_num: int) -> None:
        nonlocal tokens
        if tokens:
            where = f"{origin}:" if origin else "line "
            try:
                sentences.append(Sentence(tokens, origin=origin))
            except TreeStructureError as exc:
                raise TreeStructureError(
                    f"sentence ending at {where}{line_num}: {exc}") from None
            tokens = []

    line_num = 0
    for line_num, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush(line_num)
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluParseError(
                f"line {line_num}: expected 10 tab-separated columns, got {len(cols)}")
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue  # multiword range / empty node
        try:
            index = int(tok_id)
        except ValueError:
            raise ConlluParseError(f"line {line_num}: non-integer ID {tok_id!r}") from None
        head_col = cols[6]
        try:
            head = int(head_col)
        except ValueError:
            raise ConlluParseError(
                f"line {line_num}: non-integer HEAD {head_col!r}") from None
        try:
            tokens.append(Token(
                index=index, surface=cols[1], lemma=cols[2],
                upos=cols[3], head=head, deprel=cols[7],
            ))
        except TreeStructureError as exc:
            raise ConlluParseError(f"line {line_num}: {exc}") from None
    flush(line_num + 1)
    return sentences


def parse_conllu_file(path: str | Path) -> list[Sentence]:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return parse_conllu(fh, origin=str(path))


def load_parsed_story(directory: str | Path, story_id: str) -> ParsedStory:
    """Read ``<story_id>.conllu`` from a directory of per-story parses."""
    path = Path(directory) / f"{story_id}.conllu"
    if not path.exists():
        raise FileNotFoundError(f"no parse file for story {story_id!r}: {path}")
    return ParsedStory(story_id=story_id, sentences=tuple(parse_conllu_file(path)))
