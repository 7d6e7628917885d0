import json
from pathlib import Path

import httpx
import pytest

from storynets.conllu import parse_conllu_file
from storynets.emotions import lexicon_from_tags
from storynets.tfmn import AntonymLexicon, StopList

FIXTURES = Path(__file__).parent / "fixtures"
RESOURCES = Path(__file__).parent.parent / "src" / "storynets" / "resources"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def resources_dir() -> Path:
    return RESOURCES


@pytest.fixture(scope="session")
def corpus40_csv() -> Path:
    return FIXTURES / "corpus40" / "corpus.csv"


@pytest.fixture(scope="session")
def corpus40_conllu() -> Path:
    return FIXTURES / "corpus40" / "conllu"


@pytest.fixture(scope="session")
def peter_sentence():
    sentences = parse_conllu_file(FIXTURES / "peter.conllu")
    assert len(sentences) == 1
    return sentences[0]


@pytest.fixture()
def tiny_stoplist() -> StopList:
    return StopList(frozenset({
        "the", "a", "of", "and", "his", "not", "no", "never", "it", "she",
        "he", "they", "in", "on", "under", "with", "near", "through", "over",
    }))


@pytest.fixture()
def tiny_antonyms() -> AntonymLexicon:
    return AntonymLexicon({
        "happy": "sad", "sad": "happy",
        "love": "hate", "hate": "love",
        "good": "bad", "bad": "good",
        "warm": "cold", "cold": "warm",
    })


@pytest.fixture()
def tiny_lexicon():
    # 4 entries; priors: joy 1/4, sadness 1/4, anger 1/4, others via overlap
    return lexicon_from_tags({
        "joyful": {"joy", "positive", "trust", "anticipation", "surprise"},
        "grim": {"sadness", "negative", "fear", "disgust", "anger"},
        "cheer": {"joy", "positive", "anticipation", "trust", "surprise"},
        "dull": {"anger", "sadness", "fear", "disgust", "negative"},
        "stone": set(),
    })


class ScriptedTransport(httpx.BaseTransport):
    """Chat-completions stub: pops replies from a queue, records requests."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.requests: list[dict] = []

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        payload = json.loads(request.content.decode("utf-8"))
        self.requests.append({
            "url": str(request.url),
            "headers": dict(request.headers),
            "payload": payload,
        })
        if not self.replies:
            raise AssertionError("transport queue exhausted")
        item = self.replies.pop(0)
        if isinstance(item, Exception):
            raise item
        if isinstance(item, int):  # bare status code
            return httpx.Response(item, json={"error": "scripted"})
        return httpx.Response(200, json={
            "choices": [{"message": {"role": "assistant", "content": item}}]
        })


@pytest.fixture()
def scripted_transport():
    return ScriptedTransport
