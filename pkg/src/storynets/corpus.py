"""Story corpora: loading, validation, rating filters and 3-class binning."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

CSV_FIELDS = [
    "story_id", "author", "prompt1", "prompt2", "prompt3", "text",
    "rater1", "rater2", "rater3", "rater4",
]
RATER_COLUMNS = ["rater1", "rater2", "rater3", "rater4"]
AUTHOR_KINDS = ("human", "llm")


class CorpusError(ValueError):
    """Malformed corpus file or record (message names row/column)."""


class SchemeMismatchError(ValueError):
    """A rating score is outside the domain of the chosen binning scheme."""


class RatingScheme(Enum):
    """How 1-5 rating scores condense into the 3 creativity classes.

    HUMAN_SCALE: {1,2} -> 0, {3} -> 1, {4,5} -> 2.
    COMPRESSED_TOP: {3} -> 0, {4} -> 1, {5} -> 2; undefined for scores 1-2
    (used for corpora whose raters never assigned the bottom scores).
    """

    HUMAN_SCALE = "human-scale"
    COMPRESSED_TOP = "compressed-top"


@dataclass(frozen=True)
class RaterScore:
    rater_id: str
    score: int

    def __post_init__(self):
        if self.score not in (1, 2, 3, 4, 5):
            raise CorpusError(
                f"rater {self.rater_id!r}: score {self.score} outside 1..5")


@dataclass(frozen=True)
class Story:
    """One rated text with author provenance and its three-word prompt."""

    id: str
    author_kind: str
    prompt: tuple[str, str, str]
    text: str
    ratings: tuple[RaterScore, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.id.strip():
            raise CorpusError("story id must be non-empty")
        if self.author_kind not in AUTHOR_KINDS:
            raise CorpusError(
                f"story {self.id!r}: author must be one of {AUTHOR_KINDS}, "
                f"got {self.author_kind!r}")
        if not self.text.strip():
            raise CorpusError(f"story {self.id!r}: empty text")
        if len(self.prompt) != 3 or any(not w.strip() for w in self.prompt):
            raise CorpusError(f"story {self.id!r}: prompt must be 3 non-empty words")
        if len(self.ratings) > 4:
            raise CorpusError(f"story {self.id!r}: more than 4 ratings")


Corpus = list[Story]


def bin_rating(score: int, scheme: RatingScheme) -> int:
    """Map a 1-5 score to creativity class 0/1/2 under the given scheme."""
    if score not in (1, 2, 3, 4, 5):
        raise CorpusError(f"score {score} outside 1..5")
    if scheme is RatingScheme.HUMAN_SCALE:
        return 0 if score <= 2 else 1 if score == 3 else 2
    if score < 3:
        raise SchemeMismatchError(
            f"score {score} is undefined under the compressed-top scheme "
            "(corpus contains bottom scores; use the human-scale scheme)")
    return score - 3


def story_word_count(story: Story) -> int:
    """Whitespace token count of the raw text (pre-NLP story length)."""
    return len(story.text.split())


def filter_complete(corpus: Corpus, required_raters: int) -> Corpus:
    """Keep stories with at least ``required_raters`` distinct rater scores."""
    if required_raters < 1:
        raise ValueError("required_raters must be >= 1")
    out = []
    for story in corpus:
        if len({r.rater_id for r in story.ratings}) >= required_raters:
            out.append(story)
    return out


def _parse_score(raw: str, row_num: int, column: str) -> int:
    try:
        score = int(raw)
    except ValueError:
        raise CorpusError(
            f"row {row_num}, column {column!r}: rating {raw!r} is not an integer"
        ) from None
    if score not in (1, 2, 3, 4, 5):
        raise CorpusError(
            f"row {row_num}, column {column!r}: score {score} outside 1..5")
    return score


def _build_story(record: dict, row_num: int, ratings: tuple[RaterScore, ...]) -> Story:
    try:
        return Story(
            id=record["story_id"],
            author_kind=record["author"],
            prompt=(record["prompt1"], record["prompt2"], record["prompt3"]),
            text=record["text"],
            ratings=ratings,
        )
    except CorpusError as exc:
        raise CorpusError(f"row {row_num}: {exc}") from None


def _load_csv(path: Path) -> Corpus:
    stories: Corpus = []
    seen: set[str] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != CSV_FIELDS:
            raise CorpusError(
                f"{path}: header must be exactly {','.join(CSV_FIELDS)}, "
                f"got {reader.fieldnames}")
        for row_num, row in enumerate(reader, start=2):
            if any(row.get(f) is None for f in CSV_FIELDS):
                raise CorpusError(f"{path}: row {row_num}: wrong number of fields")
            ratings = []
            for column in RATER_COLUMNS:
                cell = (row[column] or "").strip()
                if cell == "":  # missing rating
                    continue
                ratings.append(RaterScore(column, _parse_score(cell, row_num, column)))
            story = _build_story(row, row_num, tuple(ratings))
            if story.id in seen:
                raise CorpusError(f"{path}: row {row_num}: duplicate story id {story.id!r}")
            seen.add(story.id)
            stories.append(story)
    return stories


def _load_json(path: Path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        try:
            records = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(records, list):
        raise CorpusError(f"{path}: top level must be an array of story objects")
    stories: Corpus = []
    seen: set[str] = set()
    for row_num, record in enumerate(records, start=1):
        if not isinstance(record, dict):
            raise CorpusError(f"{path}: record {row_num} is not an object")
        missing = {"story_id", "author", "prompt1", "prompt2", "prompt3", "text"} - set(record)
        if missing:
            raise CorpusError(
                f"{path}: record {row_num}: missing fields {sorted(missing)}")
        ratings = []
        for entry in record.get("ratings", []):
            if not isinstance(entry, dict) or "rater_id" not in entry or "score" not in entry:
                raise CorpusError(
                    f"{path}: record {row_num}: ratings entries need rater_id and score")
            score = entry["score"]
            if not isinstance(score, int) or score not in (1, 2, 3, 4, 5):
                raise CorpusError(
                    f"{path}: record {row_num}, rater {entry['rater_id']!r}: "
                    f"score {score!r} outside 1..5")
            ratings.append(RaterScore(str(entry["rater_id"]), score))
        story = _build_story(record, row_num, tuple(ratings))
        if story.id in seen:
            raise CorpusError(f"{path}: record {row_num}: duplicate story id {story.id!r}")
        seen.add(story.id)
        stories.append(story)
    return stories


def load_corpus(path: str | Path, format: str | None = None) -> Corpus:
    """Load and validate a story corpus from CSV or JSON.

    ``format`` is 'csv' or 'json'; inferred from the suffix when omitted.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    fmt = format or path.suffix.lstrip(".").lower()
    if fmt == "csv":
        return _load_csv(path)
    if fmt == "json":
        return _load_json(path)
    raise CorpusError(f"unsupported corpus format {fmt!r} (expected csv or json)")


def save_corpus_csv(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back out in the canonical CSV schema."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for story in corpus:
            by_rater = {r.rater_id: r.score for r in story.ratings}
            cells = [story.id, story.author_kind, *story.prompt, story.text]
            if set(by_rater) <= set(RATER_COLUMNS):
                cells += [str(by_rater.get(c, "")) for c in RATER_COLUMNS]
            else:  # non-positional rater ids (e.g. llm-judge-k): keep order
                scores = [str(r.score) for r in story.ratings[:4]]
                cells += scores + [""] * (4 - len(scores))
            writer.writerow(cells)


def save_corpus_json(corpus: Corpus, path: str | Path) -> None:
    records = []
    for story in corpus:
        records.append({
            "story_id": story.id,
            "author": story.author_kind,
            "prompt1": story.prompt[0],
            "prompt2": story.prompt[1],
            "prompt3": story.prompt[2],
            "text": story.text,
            "ratings": [{"rater_id": r.rater_id, "score": r.score} for r in story.ratings],
        })
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(records, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
