"""Chat-completions client for story generation and multi-judge rating.

Speaks the standard messages-array protocol against any compatible endpoint.
Each simulated writer gets one running conversation; each (story, judge)
rating gets a fresh one. Replies are parsed strictly first (a bare integer),
then leniently (a unique integer between 1 and 5 anywhere in the text).
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import httpx
import numpy as np

from .corpus import Corpus, CorpusError, RaterScore, Story

log = logging.getLogger(__name__)

MIN_SCORE = 1
MAX_SCORE = 5


class RaterTransportError(RuntimeError):
    def __init__(self, status: int, detail: str = ""):
        self.status = status
        super().__init__(f"endpoint failure (HTTP {status}){': ' + detail if detail else ''}")


class RatingParseFailure(RuntimeError):
    """No usable integer in any reply for one (story, judge) pair."""


@dataclass(frozen=True)
class RaterConfig:
    endpoint_url: str
    model_name: str
    temperature: float | None = None
    api_key_env_var: str = "STORYNETS_API_KEY"
    max_retries: int = 3
    request_timeout: float = 30.0
    judges: int = 4
    max_in_flight: int = 4
    backoff_base: float = 0.5

    def __post_init__(self):
        if self.judges < 1:
            raise ValueError("judges must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")


DEFAULT_GENERATION_TEMPLATE = (
    "Here are three prompt words: {words}. Write a short story of four to "
    "six sentences that uses all three of these words. Every time you get a "
    "new set of prompt words, write a new distinct story instead of "
    "continuing any earlier one."
)

DEFAULT_RATING_TEMPLATE = (
    "Below is a short story. Judge how creative it is on a scale from 1 to "
    "5, where 1 means very uncreative and 5 means very creative. Reply with "
    "a single integer from 1 to 5 and nothing else.\n\nStory:\n{story}"
)


@dataclass(frozen=True)
class PromptTemplates:
    generation_instructions: str = DEFAULT_GENERATION_TEMPLATE
    rating_instructions: str = DEFAULT_RATING_TEMPLATE

    def __post_init__(self):
        if "distinct" not in self.generation_instructions:
            raise ValueError("generation template must ask for distinct stories")
        if "{words}" not in self.generation_instructions:
            raise ValueError("generation template must have a {words} slot")
        lowered = self.rating_instructions.lower()
        if "integer" not in lowered or "1" not in lowered or "5" not in lowered:
            raise ValueError("rating template must demand an integer from 1 to 5")
        if "{story}" not in self.rating_instructions:
            raise ValueError("rating template must have a {story} slot")


@dataclass(frozen=True)
class GenerationGap:
    participant: int
    prompt: tuple[str, str, str]
    reason: str


@dataclass(frozen=True)
class GenerationResult:
    stories: list[Story]
    gaps: list[GenerationGap]


@dataclass(frozen=True)
class RatingFailure:
    story_id: str
    judge: int
    reason: str


@dataclass(frozen=True)
class RatingResult:
    corpus: Corpus
    failures: list[RatingFailure]


@dataclass
class _LogSink:
    """Collects request/response events; flushed sorted for determinism."""

    entries: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def add(self, entry: dict) -> None:
        with self.lock:
            self.entries.append(entry)

    def flush(self, path: str | Path) -> None:
        ordered = sorted(
            self.entries,
            key=lambda e: (e.get("story_id", ""), e.get("judge", -1),
                           e.get("participant", -1), e.get("attempt", 0)))
        with open(path, "w", encoding="utf-8") as fh:
            for entry in ordered:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")


def _validate_messages(messages: list[dict]) -> None:
    for msg in messages:
        if set(msg) != {"role", "content"}:
            raise ValueError("each message needs exactly role and content")
        if msg["role"] not in ("system", "user", "assistant"):
            raise ValueError(f"bad message role {msg['role']!r}")
        if not isinstance(msg["content"], str):
            raise ValueError("message content must be a string")


def _headers(cfg: RaterConfig) -> dict[str, str]:
    headers = {"Content-Type": "application/json"}
    key = os.environ.get(cfg.api_key_env_var, "")
    if key:
        headers["Authorization"] = f"Bearer {key}"
    return headers


def _chat(client: httpx.Client, cfg: RaterConfig,
          messages: list[dict]) -> str:
    """One completion with retry on 429/5xx and connection failures."""
    _validate_messages(messages)
    payload: dict = {"model": cfg.model_name, "messages": messages}
    if cfg.temperature is not None:
        payload["temperature"] = cfg.temperature
    last_status = 0
    detail = "retries exhausted"
    for attempt in range(cfg.max_retries + 1):
        if attempt:
            time.sleep(cfg.backoff_base * 2 ** (attempt - 1))
        try:
            resp = client.post(cfg.endpoint_url, json=payload,
                               headers=_headers(cfg),
                               timeout=cfg.request_timeout)
        except httpx.TransportError as exc:
            last_status = 0
            detail = str(exc)
            continue
        if resp.status_code == 200:
            try:
                return resp.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, ValueError) as exc:
                raise RaterTransportError(200, f"malformed completion body: {exc}")
        last_status = resp.status_code
        detail = resp.text[:200]
        if resp.status_code != 429 and resp.status_code < 500:
            break  # auth and client errors are not retryable
    raise RaterTransportError(last_status, detail)


def parse_rating(reply: str) -> tuple[int, bool]:
    """(score, used_lenient_parse); raises ValueError when unparseable."""
    stripped = reply.strip()
    if re.fullmatch(r"[1-5]", stripped):
        return int(stripped), False
    candidates = {int(tok) for tok in re.findall(r"\d+", stripped)
                  if MIN_SCORE <= int(tok) <= MAX_SCORE}
    if len(candidates) == 1:
        return candidates.pop(), True
    raise ValueError(f"no unique integer {MIN_SCORE}-{MAX_SCORE} in reply: {reply!r}")


def generate_stories(
    prompts: Sequence[tuple[str, str, str]],
    participants: int,
    cfg: RaterConfig,
    templates: PromptTemplates = PromptTemplates(),
    client: httpx.Client | None = None,
    seed: int = 0,
    sink: _LogSink | None = None,
    log_path: str | Path | None = None,
) -> GenerationResult:
    """One story per (participant, prompt triplet), prompts shuffled per
    writer, one running conversation per writer."""
    if not prompts:
        raise ValueError("prompts must be non-empty")
    if sink is None and log_path is not None:
        sink = _LogSink()
    rng = np.random.default_rng(seed)
    own_client = client is None
    client = client or httpx.Client()
    stories: list[Story] = []
    gaps: list[GenerationGap] = []
    try:
        for p in range(participants):
            order = rng.permutation(len(prompts))
            messages: list[dict] = []
            for t in order:
                triplet = tuple(prompts[t])
                prompt_text = templates.generation_instructions.format(
                    words=", ".join(triplet))
                messages.append({"role": "user", "content": prompt_text})
                text = ""
                for attempt in range(cfg.max_retries + 1):
                    text = _chat(client, cfg, messages).strip()
                    if sink is not None:
                        sink.add({"participant": p, "prompt": list(triplet),
                                  "attempt": attempt, "reply": text,
                                  "story_id": f"llm-p{p + 1:04d}-s{t + 1}"})
                    if text:
                        break
                if not text:
                    gaps.append(GenerationGap(
                        participant=p, prompt=triplet,
                        reason="empty completion after retries"))
                    messages.pop()
                    continue
                messages.append({"role": "assistant", "content": text})
                stories.append(Story(
                    id=f"llm-p{p + 1:04d}-s{t + 1}",
                    author_kind="llm",
                    prompt=triplet,
                    text=text,
                ))
    finally:
        if own_client:
            client.close()
    if sink is not None and log_path is not None:
        sink.flush(log_path)
    stories.sort(key=lambda s: s.id)
    return GenerationResult(stories=stories, gaps=gaps)


def rate_story(
    story: Story,
    judge_index: int,
    cfg: RaterConfig,
    templates: PromptTemplates = PromptTemplates(),
    client: httpx.Client | None = None,
    sink: _LogSink | None = None,
) -> int:
    """One judge's 1-5 score in a fresh conversation; retried on bad replies."""
    own_client = client is None
    client = client or httpx.Client()
    try:
        prompt = templates.rating_instructions.format(story=story.text)
        last_reason = "no reply"
        for attempt in range(cfg.max_retries + 1):
            reply = _chat(client, cfg, [{"role": "user", "content": prompt}])
            entry = {"story_id": story.id, "judge": judge_index,
                     "attempt": attempt, "reply": reply}
            try:
                score, lenient = parse_rating(reply)
            except ValueError as exc:
                last_reason = str(exc)
                if sink is not None:
                    sink.add({**entry, "outcome": "unparseable"})
                continue
            if lenient:
                log.warning("lenient parse for story %s judge %d: %r",
                            story.id, judge_index, reply)
            if sink is not None:
                sink.add({**entry, "outcome": "parsed", "score": score,
                          "lenient": lenient})
            return score
        raise RatingParseFailure(
            f"story {story.id}, judge {judge_index}: {last_reason}")
    finally:
        if own_client:
            client.close()


def rate_corpus(
    corpus: Corpus,
    cfg: RaterConfig,
    templates: PromptTemplates = PromptTemplates(),
    client: httpx.Client | None = None,
    log_path: str | Path | None = None,
    replace_existing: bool = False,
) -> RatingResult:
    """Attach `judges` independent scores per story as llm-judge-<k> raters.

    A story holds at most 4 scores; rating an already-rated corpus requires
    ``replace_existing`` so the old scores are dropped rather than mixed.
    """
    if not replace_existing:
        for story in corpus:
            if len(story.ratings) + cfg.judges > 4:
                raise CorpusError(
                    f"story {story.id!r} already has {len(story.ratings)} "
                    f"ratings; adding {cfg.judges} judge scores would exceed "
                    "the 4-rating capacity (pass replace_existing to rerate)")
    sink = _LogSink() if log_path is not None else None
    own_client = client is None
    client = client or httpx.Client()
    scores: dict[tuple[str, int], int] = {}
    failures: list[RatingFailure] = []
    lock = threading.Lock()

    def work(story: Story, judge: int) -> None:
        try:
            score = rate_story(story, judge, cfg, templates, client, sink)
        except (RatingParseFailure, RaterTransportError) as exc:
            with lock:
                failures.append(RatingFailure(
                    story_id=story.id, judge=judge, reason=str(exc)))
            return
        with lock:
            scores[(story.id, judge)] = score

    try:
        with ThreadPoolExecutor(max_workers=cfg.max_in_flight) as pool:
            futures = [pool.submit(work, story, judge)
                       for story in corpus
                       for judge in range(1, cfg.judges + 1)]
            for fut in futures:
                fut.result()
    finally:
        if own_client:
            client.close()

    rated: Corpus = []
    for story in corpus:
        new_scores = tuple(
            RaterScore(rater_id=f"llm-judge-{judge}",
                       score=scores[(story.id, judge)])
            for judge in range(1, cfg.judges + 1)
            if (story.id, judge) in scores)
        kept = () if replace_existing else story.ratings
        rated.append(replace(story, ratings=kept + new_scores))
    failures.sort(key=lambda f: (f.story_id, f.judge))
    if sink is not None:
        sink.flush(log_path)
    if failures:
        log.warning("%d rating failures across %d stories",
                    len(failures), len({f.story_id for f in failures}))
    return RatingResult(corpus=rated, failures=failures)
