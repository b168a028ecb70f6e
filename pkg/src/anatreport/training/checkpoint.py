"""Whole-pipeline checkpoints on top of the shared fragment format.

The header carries the stage, the decoder configuration, the token
vocabulary, and both vocabulary hashes; arrays follow in sorted name order.
Loading rebuilds a fresh state and validates every shape; a region-hash
mismatch warns by default and raises under ``strict``.
"""

from __future__ import annotations

import logging

import numpy as np

from ..data.regions import region_vocab_hash
from ..data.tokenizer import Vocabulary
from ..generator import DecoderConfig, SentenceDecoder
from ..nncore import CheckpointError, DenseLayer, read_fragment, write_fragment
from ..prompts import ClassifierHead
from .state import PipelineState

logger = logging.getLogger(__name__)


def _activation_tags(state: PipelineState) -> dict[str, str]:
    tags: dict[str, str] = {}

    def visit(module):
        if isinstance(module, DenseLayer):
            tags[module.name] = module.activation

    for head in (state.sentence_head, state.abnormal_head):
        for layer in head.layers:
            visit(layer)
    if state.decoder is not None:
        visit(state.decoder.visual_proj)
        visit(state.decoder.lm_head)
        for block in state.decoder.blocks:
            for module in block.modules():
                visit(module)
    return tags


def save_checkpoint(state: PipelineState, path, train_config: dict | None = None) -> None:
    tags = _activation_tags(state)
    arrays = []
    for name, param in sorted(state.parameters().items()):
        record: dict = {"name": name, "value": param.value}
        layer_name = name.rsplit(".", 1)[0]
        if layer_name in tags:
            record["activation"] = tags[layer_name]
        arrays.append(record)
    meta = {
        "stage": state.stage,
        "region_vocab_hash": state.region_hash,
        "vocab_hash": state.vocab.content_hash(),
        "vocab_tokens": state.vocab.tokens,
        "decoder_config": state.decoder.config.to_dict() if state.decoder else None,
        "train_config": train_config,
    }
    write_fragment(path, arrays, meta)


def load_checkpoint(path, strict: bool = False) -> PipelineState:
    """Rebuild a pipeline state; no partial state escapes on failure."""
    header, arrays = read_fragment(path)
    try:
        vocab = Vocabulary(list(header["vocab_tokens"]))
        stage = int(header["stage"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: invalid pipeline header: {exc}") from exc

    stored_hash = header.get("region_vocab_hash", "")
    if stored_hash and stored_hash != region_vocab_hash():
        message = (
            f"{path}: checkpoint was written against a different region vocabulary "
            f"(hash {stored_hash[:12]}... != {region_vocab_hash()[:12]}...)"
        )
        if strict:
            raise CheckpointError(message)
        logger.warning(message)

    rng = np.random.default_rng(0)
    state = PipelineState(
        sentence_head=ClassifierHead(rng, name="sentence_head"),
        abnormal_head=ClassifierHead(rng, name="abnormal_head"),
        vocab=vocab,
        stage=stage,
        region_hash=stored_hash or region_vocab_hash(),
    )
    if header.get("decoder_config"):
        config = DecoderConfig.from_dict(header["decoder_config"])
        state.decoder = SentenceDecoder(config, rng)

    params = state.parameters()
    missing = set(params) - set(arrays)
    extra = set(arrays) - set(params)
    if missing or extra:
        raise CheckpointError(
            f"{path}: array set mismatch (missing {sorted(missing)[:3]}, "
            f"unexpected {sorted(extra)[:3]})"
        )
    for name, value in arrays.items():
        if value.shape != params[name].value.shape:
            raise CheckpointError(
                f"{path}: array {name} has shape {value.shape}, "
                f"model expects {params[name].value.shape}"
            )
        params[name].value = value.astype(np.float64)
        params[name].grad = np.zeros_like(params[name].value)
    return state
