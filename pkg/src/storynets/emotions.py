"""Plutchik emotion counts and z-scores against a random-lexicon null model."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

EMOTIONS = (
    "anger", "anticipation", "disgust", "fear",
    "joy", "sadness", "surprise", "trust",
)
VALENCE_FLAGS = ("positive", "negative")
LEXICON_CATEGORIES = frozenset(EMOTIONS) | frozenset(VALENCE_FLAGS)

# |z| beyond this marks an emotion as significantly over/under-represented
# (two-sided 0.05 level); the boundary itself is not significant.
SIGNIFICANCE_Z = 1.96

# Below this many lexicon-matched tokens, z-scores are computed but flagged.
LOW_COVERAGE_N = 5


class LexiconError(ValueError):
    """Malformed emotion-lexicon file."""


@dataclass(frozen=True)
class EmotionLexicon:
    """Word -> emotion/valence associations plus per-emotion base rates.

    ``entries`` maps every lexicon word (even fully untagged ones) to the set
    of categories flagged 1 for it. ``priors[e]`` is the fraction of distinct
    entries tagged with emotion ``e``.
    """

    entries: dict[str, frozenset[str]]
    priors: dict[str, float]

    def __post_init__(self):
        if not self.entries:
            raise LexiconError("emotion lexicon is empty")
        for emo in EMOTIONS:
            p = self.priors[emo]
            if not 0.0 < p < 1.0:
                raise LexiconError(
                    f"prior for {emo!r} is {p}; every emotion needs at least one "
                    "tagged and one untagged entry")

    def __contains__(self, lemma: str) -> bool:
        return lemma in self.entries

    def tags(self, lemma: str) -> frozenset[str]:
        return self.entries.get(lemma, frozenset())

    def valence_map(self) -> dict[str, str]:
        """Node-label map: positive/negative when exactly one flag is set."""
        out = {}
        for word, tags in self.entries.items():
            pos, neg = "positive" in tags, "negative" in tags
            if pos and not neg:
                out[word] = "positive"
            elif neg and not pos:
                out[word] = "negative"
            else:
                out[word] = "neutral"
        return out


def lexicon_from_tags(tagged: dict[str, Iterable[str]]) -> EmotionLexicon:
    """Build a lexicon from word -> categories (tests and programmatic use)."""
    entries = {}
    for word, tags in tagged.items():
        tags = frozenset(tags)
        unknown = tags - LEXICON_CATEGORIES
        if unknown:
            raise LexiconError(f"unknown categories for {word!r}: {sorted(unknown)}")
        entries[word.lower()] = tags
    n = len(entries)
    priors = {
        emo: sum(1 for tags in entries.values() if emo in tags) / n if n else 0.0
        for emo in EMOTIONS
    }
    return EmotionLexicon(entries=entries, priors=priors)


def load_emotion_lexicon(path: str | Path) -> EmotionLexicon:
    """Load an association-format lexicon: ``word<TAB>category<TAB>flag``."""
    tagged: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line_num, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) != 3:
                raise LexiconError(
                    f"{path}:{line_num}: expected word<TAB>category<TAB>flag")
            word, category, flag = cols[0].strip().lower(), cols[1].strip().lower(), cols[2].strip()
            if category not in LEXICON_CATEGORIES:
                raise LexiconError(
                    f"{path}:{line_num}: unknown category {category!r}")
            if flag not in ("0", "1"):
                raise LexiconError(f"{path}:{line_num}: flag must be 0 or 1")
            tagged.setdefault(word, set())
            if flag == "1":
                tagged[word].add(category)
    if not tagged:
        raise LexiconError(f"{path}: no lexicon entries")
    return lexicon_from_tags(tagged)


@dataclass(frozen=True)
class NullModelConfig:
    """How expected emotion counts are estimated.

    ``analytic`` treats each emotion count as Binomial(N, prior); the
    ``monte_carlo`` mode draws ``samples`` random multisets of N lexicon
    entries instead (slower, used as a fidelity check).
    """

    mode: str = "analytic"
    samples: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("analytic", "monte_carlo"):
            raise ValueError(f"unknown null-model mode {self.mode!r}")
        if self.mode == "monte_carlo" and self.samples < 100:
            raise ValueError("monte_carlo needs at least 100 samples")


@dataclass(frozen=True)
class EmotionProfile:
    """Eight z-scores with the raw counts behind them."""

    z: tuple[float, ...]
    counts: tuple[int, ...]
    n_lexicon_tokens: int
    low_coverage: bool

    def as_dict(self) -> dict[str, float]:
        return dict(zip(EMOTIONS, self.z))


def count_emotions(
    effective_lemmas: Sequence[str], lexicon: EmotionLexicon
) -> tuple[list[int], int]:
    """Token-level emotion counts over the lexicon-matched occurrences."""
    counts = [0] * len(EMOTIONS)
    n_matched = 0
    for lemma in effective_lemmas:
        if lemma not in lexicon:
            continue
        n_matched += 1
        tags = lexicon.tags(lemma)
        for k, emo in enumerate(EMOTIONS):
            if emo in tags:
                counts[k] += 1
    return counts, n_matched


def _monte_carlo_stats(
    n: int, lexicon: EmotionLexicon, samples: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Mean/std (ddof=1) of per-emotion counts over random N-token draws."""
    words = sorted(lexicon.entries)
    membership = np.zeros((len(words), len(EMOTIONS)), dtype=np.uint8)
    for row, word in enumerate(words):
        tags = lexicon.entries[word]
        for k, emo in enumerate(EMOTIONS):
            if emo in tags:
                membership[row, k] = 1
    rng = np.random.default_rng(seed)
    totals = np.zeros(len(EMOTIONS))
    totals_sq = np.zeros(len(EMOTIONS))
    chunk = max(1, min(samples, 4_000_000 // max(n, 1)))
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        idx = rng.integers(0, len(words), size=(m, n))
        counts = membership[idx].sum(axis=1, dtype=np.int64)
        totals += counts.sum(axis=0)
        totals_sq += (counts.astype(np.float64) ** 2).sum(axis=0)
        done += m
    mean = totals / samples
    var = (totals_sq - samples * mean**2) / (samples - 1)
    return mean, np.sqrt(np.maximum(var, 0.0))


def zscore_profile(
    counts: Sequence[int],
    n_lexicon_tokens: int,
    lexicon: EmotionLexicon,
    cfg: NullModelConfig = NullModelConfig(),
) -> EmotionProfile:
    """Standardise emotion counts against the random-sampling null model."""
    n = n_lexicon_tokens
    if n == 0:
        return EmotionProfile(
            z=(0.0,) * len(EMOTIONS), counts=tuple(counts),
            n_lexicon_tokens=0, low_coverage=True)
    low = n < LOW_COVERAGE_N
    z = []
    if cfg.mode == "analytic":
        for k, emo in enumerate(EMOTIONS):
            p = lexicon.priors[emo]
            z.append((counts[k] - n * p) / np.sqrt(n * p * (1.0 - p)))
    else:
        mean, std = _monte_carlo_stats(n, lexicon, cfg.samples, cfg.seed)
        for k in range(len(EMOTIONS)):
            if std[k] == 0.0:
                z.append(0.0)
                low = True
            else:
                z.append((counts[k] - mean[k]) / std[k])
    return EmotionProfile(
        z=tuple(float(v) for v in z), counts=tuple(counts),
        n_lexicon_tokens=n, low_coverage=low)


def significant_emotions(profile: EmotionProfile) -> set[tuple[str, str]]:
    """Emotions whose |z| strictly exceeds the 1.96 threshold, with direction."""
    out = set()
    for emo, z in zip(EMOTIONS, profile.z):
        if z > SIGNIFICANCE_Z:
            out.add((emo, "over"))
        elif z < -SIGNIFICANCE_Z:
            out.add((emo, "under"))
    return out


def profile_story(
    effective_lemmas: Sequence[str],
    lexicon: EmotionLexicon,
    cfg: NullModelConfig = NullModelConfig(),
) -> EmotionProfile:
    counts, n = count_emotions(effective_lemmas, lexicon)
    return zscore_profile(counts, n, lexicon, cfg)
