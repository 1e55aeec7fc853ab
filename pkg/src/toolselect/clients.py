"""LLM and embedding providers.

The engine only sees the two protocols in rerank.py, so anything with a
`complete` / `embed` method plugs in. The mock client and dict embedder run
benchmarks offline and deterministically; the HTTP pair talks to any
chat-completions / embeddings endpoint with the usual JSON layout.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Mapping, Sequence

import httpx
import numpy as np

from .rerank import SERVER_LABEL, TOOL_LABEL

DEFAULT_TIMEOUT_S = 60.0


def format_ideal_completion(server_text: str, tool_text: str) -> str:
    """Render the two-line response format the parser expects."""
    return f"{SERVER_LABEL}: {server_text}\n{TOOL_LABEL}: {tool_text}"


class MockLlmClient:
    """Table-driven offline stand-in for a chat model.

    Rules map a lowercase substring of the user prompt to the pair of ideal
    descriptions; the first matching rule (in table order) wins and the
    default pair answers everything else.
    """

    def __init__(
        self,
        rules: Sequence[tuple[str, str, str]] = (),
        default: tuple[str, str] = ("a general purpose server", "a general purpose tool"),
    ):
        self.rules = [(k.lower(), s, t) for k, s, t in rules]
        self.default = default
        self.calls = 0

    def complete(self, system: str, user: str) -> str:
        self.calls += 1
        haystack = user.lower()
        for key, server_text, tool_text in self.rules:
            if key in haystack:
                return format_ideal_completion(server_text, tool_text)
        return format_ideal_completion(*self.default)

    @classmethod
    def from_json(cls, path: str | Path) -> "MockLlmClient":
        """Load rules from {"rules": [[substring, server, tool], ...],
        "default": [server, tool]}; both keys optional."""
        spec = json.loads(Path(path).read_text())
        rules = [tuple(r) for r in spec.get("rules", [])]
        default = tuple(spec.get("default", ("a general purpose server", "a general purpose tool")))
        return cls(rules=rules, default=default)


class DictEmbedder:
    """Exact-match text -> vector lookup for offline runs.

    Unknown texts raise KeyError naming the text so a missing benchmark
    fixture fails loudly instead of silently embedding garbage.
    """

    def __init__(self, table: Mapping[str, np.ndarray]):
        self.table = {k: np.asarray(v, dtype=np.float64) for k, v in table.items()}

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        out = []
        for text in texts:
            if text not in self.table:
                raise KeyError(f"no embedding registered for text: {text!r}")
            out.append(self.table[text].copy())
        return out

    @classmethod
    def from_json(cls, path: str | Path) -> "DictEmbedder":
        """Load a flat {text: [floats]} mapping."""
        return cls(json.loads(Path(path).read_text()))


class OpenAiChatClient:
    """Chat-completions client for OpenAI-compatible endpoints.

    Reads the bearer token from LLM_API_KEY unless one is passed in.
    Temperature defaults to 0 so repeated runs are as stable as the
    provider allows.
    """

    def __init__(
        self,
        model: str,
        base_url: str = "https://api.openai.com/v1",
        api_key: str | None = None,
        temperature: float = 0.0,
        timeout_s: float = DEFAULT_TIMEOUT_S,
    ):
        self.model = model
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get("LLM_API_KEY", "")
        self.temperature = temperature
        self.timeout_s = timeout_s

    def complete(self, system: str, user: str) -> str:
        resp = httpx.post(
            f"{self.base_url}/chat/completions",
            headers={"Authorization": f"Bearer {self.api_key}"},
            json={
                "model": self.model,
                "temperature": self.temperature,
                "messages": [
                    {"role": "system", "content": system},
                    {"role": "user", "content": user},
                ],
            },
            timeout=self.timeout_s,
        )
        resp.raise_for_status()
        return resp.json()["choices"][0]["message"]["content"]


class HttpEmbedder:
    """Embeddings client for OpenAI-compatible endpoints.

    Reads the bearer token from EMBEDDINGS_API_KEY (falling back to
    LLM_API_KEY) unless one is passed in.
    """

    def __init__(
        self,
        model: str,
        base_url: str = "https://api.openai.com/v1",
        api_key: str | None = None,
        timeout_s: float = DEFAULT_TIMEOUT_S,
    ):
        self.model = model
        self.base_url = base_url.rstrip("/")
        if api_key is None:
            api_key = os.environ.get("EMBEDDINGS_API_KEY") or os.environ.get("LLM_API_KEY", "")
        self.api_key = api_key
        self.timeout_s = timeout_s

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        resp = httpx.post(
            f"{self.base_url}/embeddings",
            headers={"Authorization": f"Bearer {self.api_key}"},
            json={"model": self.model, "input": list(texts)},
            timeout=self.timeout_s,
        )
        resp.raise_for_status()
        data = sorted(resp.json()["data"], key=lambda item: item["index"])
        return [np.asarray(item["embedding"], dtype=np.float64) for item in data]
