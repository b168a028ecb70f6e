"""Chat-completion client for a remote composition backend.

Single request per document (system = instruction, user = remaining
sections), temperature 0, with bounded retries and exponential backoff on
transient failures. The credential comes from the environment and is never
logged. In-flight requests are capped by a semaphore.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass

import requests

from .document import DEFAULT_INSTRUCTION, PromptDocument

API_KEY_ENV = "ANAT_LLM_API_KEY"
RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


class RemoteBackendError(Exception):
    """Base for remote-backend failures; carries a machine-readable code."""

    code = "remote_error"


class MissingCredentialError(RemoteBackendError):
    code = "missing_credential"


class RemoteTransportError(RemoteBackendError):
    code = "transport_error"


class RemoteTimeoutError(RemoteBackendError):
    code = "timeout"


@dataclass
class RemoteConfig:
    endpoint: str
    model: str
    timeout: float = 60.0
    max_attempts: int = 3
    backoff_base: float = 0.5
    max_concurrent: int = 4
    api_key_env: str = API_KEY_ENV


class RemoteLlmClient:
    def __init__(self, config: RemoteConfig, session: requests.Session | None = None):
        if config.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        self.config = config
        self._session = session if session is not None else requests.Session()
        self._slots = threading.Semaphore(config.max_concurrent)

    def _credential(self) -> str:
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise MissingCredentialError(
                f"no credential in environment variable {self.config.api_key_env}"
            )
        return key

    def _messages(self, doc: PromptDocument) -> list[dict]:
        system = doc.instruction or DEFAULT_INSTRUCTION
        return [
            {"role": "system", "content": system},
            {"role": "user", "content": doc.body_without_instruction()},
        ]

    def complete(self, doc: PromptDocument) -> str:
        """Return the backend's reply text for the assembled document."""
        key = self._credential()  # fail before any network traffic
        body = {
            "model": self.config.model,
            "messages": self._messages(doc),
            "temperature": 0,
        }
        headers = {"Authorization": f"Bearer {key}"}

        last_error: RemoteBackendError | None = None
        with self._slots:
            for attempt in range(1, self.config.max_attempts + 1):
                if attempt > 1:
                    time.sleep(self.config.backoff_base * (2 ** (attempt - 2)))
                try:
                    response = self._session.post(
                        self.config.endpoint, json=body, headers=headers,
                        timeout=self.config.timeout,
                    )
                except requests.Timeout as exc:
                    last_error = RemoteTimeoutError(
                        f"request timed out after {self.config.timeout}s (attempt {attempt})"
                    )
                    last_error.__cause__ = exc
                    continue
                except requests.RequestException as exc:
                    last_error = RemoteTransportError(f"connection failed: {exc}")
                    continue

                if response.status_code in RETRYABLE_STATUS:
                    last_error = RemoteTransportError(
                        f"backend returned {response.status_code} (attempt {attempt})"
                    )
                    continue
                if response.status_code != 200:
                    raise RemoteTransportError(
                        f"backend returned {response.status_code}: {response.text[:200]}"
                    )
                try:
                    payload = response.json()
                    return payload["choices"][0]["message"]["content"]
                except (ValueError, KeyError, IndexError, TypeError) as exc:
                    raise RemoteTransportError(f"malformed backend reply: {exc}") from exc

        assert last_error is not None
        raise last_error
