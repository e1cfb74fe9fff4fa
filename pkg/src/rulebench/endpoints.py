"""Chat-completion-style endpoints with pluggable backends.

Every model-facing step (generation, judging, scoring, coexistence checks,
evaluation) talks to a ``ChatEndpoint``: one ``complete`` call taking a
prompt (optionally with image attachments) and returning raw text. Three
backends ship:

* ``StubEndpoint``   -- deterministic callable or canned text, for CI;
* ``ReplayEndpoint`` -- responses keyed by request id, loaded from a file;
* ``HttpEndpoint``   -- remote chat-completions API, decoding parameters
  pinned to temperature 0, top_p 1, top_k 1.
"""

from __future__ import annotations

import base64
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Protocol, Sequence

PINNED_DECODING = {"temperature": 0, "top_p": 1, "top_k": 1}


class EndpointError(RuntimeError):
    """Transport-level failure talking to a model endpoint."""


@dataclass(frozen=True)
class ChatRequest:
    prompt: str
    system: str = ""
    images: tuple[str, ...] = ()
    request_id: str = ""


class ChatEndpoint(Protocol):
    def complete(self, request: ChatRequest) -> str: ...


@dataclass
class StubEndpoint:
    """Deterministic endpoint: a fixed reply or a reply function."""

    reply: str | Callable[[ChatRequest], str] = ""

    def complete(self, request: ChatRequest) -> str:
        if callable(self.reply):
            return self.reply(request)
        return self.reply


class ReplayEndpoint:
    """Replays recorded responses keyed by ``request_id``.

    The replay file is JSON Lines; each line holds ``{"request_id": ...,
    "response": ...}``. A request with no recorded response raises
    ``EndpointError`` (a transport failure from the caller's viewpoint).
    """

    def __init__(self, responses: dict[str, str]):
        self._responses = dict(responses)

    @classmethod
    def from_file(cls, path: str | Path) -> "ReplayEndpoint":
        responses: dict[str, str] = {}
        for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                responses[record["request_id"]] = record["response"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{line_no}: bad replay record: {exc}") from exc
        return cls(responses)

    def complete(self, request: ChatRequest) -> str:
        if request.request_id not in self._responses:
            raise EndpointError(f"no recorded response for request {request.request_id!r}")
        return self._responses[request.request_id]


@dataclass
class HttpEndpoint:
    """OpenAI-style chat-completions endpoint over HTTP.

    Credentials come from the environment (``credential_env``), never from
    config files. Decoding parameters are pinned and not overridable.
    """

    base_url: str
    model: str
    credential_env: str = ""
    timeout_s: float = 60.0
    _client: object = field(default=None, repr=False, compare=False)

    def _payload(self, request: ChatRequest) -> dict:
        content: list | str
        if request.images:
            content = [{"type": "text", "text": request.prompt}]
            for image_path in request.images:
                data = base64.b64encode(Path(image_path).read_bytes()).decode("ascii")
                content.append(
                    {"type": "image_url", "image_url": {"url": f"data:image/png;base64,{data}"}}
                )
        else:
            content = request.prompt
        messages = []
        if request.system:
            messages.append({"role": "system", "content": request.system})
        messages.append({"role": "user", "content": content})
        return {"model": self.model, "messages": messages, **PINNED_DECODING}

    def complete(self, request: ChatRequest) -> str:
        import httpx

        headers = {}
        if self.credential_env:
            token = os.environ.get(self.credential_env, "")
            if not token:
                raise EndpointError(f"credential env var {self.credential_env} is not set")
            headers["Authorization"] = f"Bearer {token}"
        try:
            response = httpx.post(
                self.base_url.rstrip("/") + "/chat/completions",
                json=self._payload(request),
                headers=headers,
                timeout=self.timeout_s,
            )
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except EndpointError:
            raise
        except Exception as exc:
            raise EndpointError(f"endpoint request failed: {exc}") from exc


# A bare 0/1 that is not part of an identifier or a decimal number
# ("1." at sentence end still counts, "0.8" does not).
_BINARY_TOKEN_RE = re.compile(r"(?<![\w.])([01])(?!\.?\d)(?!\w)")
_SCORE_RE = re.compile(r"(?<![\w.])(\d+(?:\.\d+)?|\.\d+)(?![\w.])")


def first_binary_token(text: str) -> Optional[int]:
    """First standalone 0/1 in a judge or oracle reply, else None."""
    match = _BINARY_TOKEN_RE.search(text)
    if match is None:
        return None
    return int(match.group(1))


def parse_score(text: str) -> Optional[float]:
    """First standalone number in a scorer reply, None when absent."""
    match = _SCORE_RE.search(text)
    if match is None:
        return None
    return float(match.group(1))


def images_supported(endpoint: ChatEndpoint) -> bool:
    """Whether an endpoint accepts image attachments (text-only stubs do)."""
    return not getattr(endpoint, "text_only", False)
