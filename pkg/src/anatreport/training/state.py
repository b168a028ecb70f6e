"""Pipeline state: the trainable pieces plus the vocabulary they share."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data.regions import region_vocab_hash
from ..data.schema import DatasetSplit
from ..data.tokenizer import Vocabulary
from ..generator import DecoderConfig, SentenceDecoder
from ..nncore import Parameter
from ..prompts import ClassifierHead


@dataclass
class PipelineState:
    """Heads, optional decoder, vocabulary, and provenance hashes."""

    sentence_head: ClassifierHead
    abnormal_head: ClassifierHead
    vocab: Vocabulary
    decoder: SentenceDecoder | None = None
    stage: int = 0
    region_hash: str = ""

    def __post_init__(self):
        if not self.region_hash:
            self.region_hash = region_vocab_hash()

    def parameters(self) -> dict[str, Parameter]:
        out: dict[str, Parameter] = {}
        out.update(self.sentence_head.parameters())
        out.update(self.abnormal_head.parameters())
        if self.decoder is not None:
            out.update(self.decoder.parameters())
        return out

    def snapshot(self) -> dict[str, np.ndarray]:
        return {k: p.value.copy() for k, p in self.parameters().items()}

    def restore(self, snapshot: dict[str, np.ndarray]) -> None:
        params = self.parameters()
        for key, value in snapshot.items():
            params[key].value[...] = value

    def ensure_decoder(self, config: DecoderConfig, seed: int) -> SentenceDecoder:
        if self.decoder is None:
            if config.vocab_size == 0:
                config = DecoderConfig(**{**config.to_dict(), "vocab_size": len(self.vocab)})
            if config.vocab_size != len(self.vocab):
                raise ValueError(
                    f"decoder vocab_size {config.vocab_size} != vocabulary size {len(self.vocab)}"
                )
            self.decoder = SentenceDecoder(config, np.random.default_rng([seed, 3]))
        return self.decoder


def init_state(train_split: DatasetSplit, seed: int) -> PipelineState:
    """Fresh heads and vocabulary for a training run; decoder comes at stage 3."""
    vocab = Vocabulary.build_from_split(train_split)
    return PipelineState(
        sentence_head=ClassifierHead(np.random.default_rng([seed, 1]), name="sentence_head"),
        abnormal_head=ClassifierHead(np.random.default_rng([seed, 2]), name="abnormal_head"),
        vocab=vocab,
    )
