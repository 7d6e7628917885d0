#!/usr/bin/env python3
"""Regenerate the committed 40-story fixture corpus (seed-pinned).

Emits tests/fixtures/corpus40/corpus.csv plus one hand-shaped CoNLL-U parse
per story. Stories carry a latent quality level 0/1/2 that drives vocabulary
diversity and the four rater scores, so the fixture has learnable class
signal under the human-scale binning. Run from the repository root:

    python scripts/build_fixture_corpus.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from storynets.corpus import RaterScore, Story, bin_rating, save_corpus_csv
from storynets.corpus import RatingScheme

SEED = 2024
OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "corpus40"

# lemma pools; surface == lemma except sentence-initial capitalization
NOUNS = [
    "garden", "storm", "friend", "enemy", "gift", "journey", "monster",
    "mother", "doctor", "house", "river", "mountain", "letter", "candle",
    "mirror", "bridge", "village", "island", "forest", "shadow", "treasure",
    "dream", "nightmare", "funeral", "birthday", "music", "silence", "door",
    "window", "key", "boat", "horse", "bird", "cat", "dog", "cheese",
    "danger", "hope", "sorrow", "miracle", "stranger", "child", "winter",
    "summer", "rain", "snow", "fire", "stone", "tower", "market",
]
VERBS = [
    "love", "hate", "fear", "trust", "attack", "protect", "destroy", "build",
    "laugh", "cry", "smile", "scream", "whisper", "celebrate", "mourn",
    "escape", "hide", "discover", "betray", "forgive", "wait", "wander",
    "remember", "forget", "promise", "dance", "sing", "fight", "win", "lose",
]
ADJS = [
    "happy", "sad", "dark", "bright", "strange", "beautiful", "ugly",
    "brave", "cowardly", "quiet", "loud", "ancient", "new", "broken",
    "gentle", "cruel", "lonely", "warm", "cold", "sweet", "bitter",
    "hollow", "golden", "distant", "sudden", "secret", "heavy", "light",
]
ADVS = ["slowly", "quickly", "quietly", "suddenly", "gently", "finally"]
DETS = ["the", "a"]
ADPS = ["in", "on", "under", "near", "through", "with"]
PRONS = ["she", "he", "they", "it"]

# lemmas with antonym entries, used as negation targets
NEGATABLE = ["love", "hate", "trust", "fear", "win", "lose", "happy", "sad",
             "warm", "brave", "laugh", "cry", "hide", "forget", "remember"]

PROMPTS = [
    ("stamp", "letter", "send"),
    ("petal", "bloom", "garden"),
    ("organ", "empire", "comply"),
    ("statement", "stealth", "detect"),
    ("belief", "faith", "sing"),
]


def _quality(story_index: int) -> int:
    return story_index % 3


def _pick(rng: np.random.Generator, pool: list[str], diversity: float) -> str:
    """Low diversity narrows the effective pool, forcing repetition."""
    span = min(len(pool), max(3, int(len(pool) * diversity)))
    return pool[int(rng.integers(0, span))]


def _sentence(rng: np.random.Generator, diversity: float) -> list[tuple[str, str, str]]:
    """Return (surface, lemma, upos) triples for one sentence, no final dot."""
    toks: list[tuple[str, str, str]] = []
    subj = _pick(rng, PRONS, 1.0) if rng.random() < 0.3 else None
    if subj is not None:
        toks.append((subj, subj, "PRON"))
    else:
        toks.append((_pick(rng, DETS, 1.0), "the", "DET"))
        if rng.random() < 0.7:
            adj = _pick(rng, ADJS, diversity)
            toks.append((adj, adj, "ADJ"))
        noun = _pick(rng, NOUNS, diversity)
        toks.append((noun, noun, "NOUN"))
    negate = rng.random() < 0.18
    if negate:
        toks.append(("not", "not", "PART"))
        verb = NEGATABLE[int(rng.integers(0, len(NEGATABLE)))]
        if verb in ADJS:
            toks.append((verb, verb, "ADJ"))
        else:
            toks.append((verb, verb, "VERB"))
    else:
        verb = _pick(rng, VERBS, diversity)
        toks.append((verb, verb, "VERB"))
    if rng.random() < 0.5:
        adv = _pick(rng, ADVS, diversity)
        toks.append((adv, adv, "ADV"))
    toks.append((_pick(rng, DETS, 1.0), "the", "DET"))
    if rng.random() < 0.6:
        adj = _pick(rng, ADJS, diversity)
        toks.append((adj, adj, "ADJ"))
    noun = _pick(rng, NOUNS, diversity)
    toks.append((noun, noun, "NOUN"))
    if rng.random() < 0.55:
        adp = _pick(rng, ADPS, 1.0)
        toks.append((adp, adp, "ADP"))
        toks.append((_pick(rng, DETS, 1.0), "the", "DET"))
        noun = _pick(rng, NOUNS, diversity)
        toks.append((noun, noun, "NOUN"))
    return toks


def _conllu_sentence(rng: np.random.Generator,
                     toks: list[tuple[str, str, str]]) -> list[str]:
    """Random local-attachment tree; verb (or first token) is the root."""
    n = len(toks)
    root = next((i for i, t in enumerate(toks) if t[2] == "VERB"), 0)
    lines = []
    for i, (surface, lemma, upos) in enumerate(toks):
        if i == root:
            head, rel = 0, "root"
        else:
            lo = max(0, i - 4)
            candidates = [j for j in range(lo, min(n, i + 4)) if j != i]
            head = int(candidates[int(rng.integers(0, len(candidates)))]) + 1
            rel = "advmod" if upos == "PART" else "dep"
        if i == 0:
            surface = surface.capitalize()
        lines.append(f"{i + 1}\t{surface}\t{lemma}\t{upos}\t_\t_\t{head}\t{rel}\t_\t_")
    dot = n + 1
    lines.append(f"{dot}\t.\t.\tPUNCT\t_\t_\t{root + 1}\tpunct\t_\t_")
    return lines


def _fix_tree(lines: list[str]) -> list[str]:
    """Break head cycles by re-rooting any token trapped in one."""
    heads = [int(line.split("\t")[6]) for line in lines]
    root = heads.index(0) + 1
    fixed = []
    for i, line in enumerate(lines):
        cols = line.split("\t")
        seen = {i + 1}
        h = heads[i]
        while h != 0:
            if h in seen:  # cycle: reattach to the root
                cols[6] = str(root)
                break
            seen.add(h)
            h = heads[h - 1]
        fixed.append("\t".join(cols))
    return fixed


def build(seed: int = SEED) -> None:
    rng = np.random.default_rng(seed)
    conllu_dir = OUT_DIR / "conllu"
    conllu_dir.mkdir(parents=True, exist_ok=True)
    stories = []
    for kind, count in (("human", 20), ("llm", 20)):
        for i in range(count):
            q = _quality(i)
            diversity = (0.25, 0.6, 1.0)[q]
            n_sentences = 3 + q + int(rng.integers(0, 2))
            sent_toks = [_sentence(rng, diversity) for _ in range(n_sentences)]
            text = []
            blocks = []
            for toks in sent_toks:
                words = [t[0] for t in toks]
                words[0] = words[0].capitalize()
                text.append(" ".join(words) + " .")
                blocks.append("\n".join(_fix_tree(_conllu_sentence(rng, toks))))
            sid = f"{kind}-{i + 1:04d}"
            ratings = []
            for r in range(4):
                raw = 1.5 + 1.5 * q + rng.normal(0.0, 0.45)
                score = int(min(5, max(1, round(raw))))
                ratings.append(RaterScore(f"rater{r + 1}", score))
            stories.append(Story(
                id=sid, author_kind=kind,
                prompt=PROMPTS[i % len(PROMPTS)],
                text=" ".join(text),
                ratings=tuple(ratings)))
            (conllu_dir / f"{sid}.conllu").write_text(
                "\n\n".join(blocks) + "\n", encoding="utf-8")

    counts = {0: 0, 1: 0, 2: 0}
    for story in stories:
        for r in story.ratings:
            counts[bin_rating(r.score, RatingScheme.HUMAN_SCALE)] += 1
    assert all(v >= 8 for v in counts.values()), counts
    save_corpus_csv(stories, OUT_DIR / "corpus.csv")
    print(f"wrote {len(stories)} stories, stacked class counts {counts}")


if __name__ == "__main__":
    build()
