"""LLM composition: prompt assembly, backends, and report parsing."""

from .document import (
    DEFAULT_INSTRUCTION,
    PRESETS,
    Ablation,
    PromptDocument,
    assemble_prompt,
    context_to_lines,
    preset,
)
from .mock_backend import mock_llm
from .remote import (
    API_KEY_ENV,
    MissingCredentialError,
    RemoteBackendError,
    RemoteConfig,
    RemoteLlmClient,
    RemoteTimeoutError,
    RemoteTransportError,
)
from .report import ReportSection, StructuredReport, parse_report, render_report

__all__ = [
    "API_KEY_ENV",
    "Ablation",
    "DEFAULT_INSTRUCTION",
    "MissingCredentialError",
    "PRESETS",
    "PromptDocument",
    "RemoteBackendError",
    "RemoteConfig",
    "RemoteLlmClient",
    "RemoteTimeoutError",
    "RemoteTransportError",
    "ReportSection",
    "StructuredReport",
    "assemble_prompt",
    "context_to_lines",
    "mock_llm",
    "parse_report",
    "preset",
    "render_report",
]
