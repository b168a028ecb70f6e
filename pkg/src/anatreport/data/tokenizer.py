"""Whitespace/punctuation tokenizer and the decoder vocabulary.

Lowercase, split punctuation into standalone tokens, split on whitespace.
Reserved ids are fixed: pad=0, bos=1, eos=2, unk=3.
"""

from __future__ import annotations

import hashlib
import re

PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3
RESERVED = ("<pad>", "<bos>", "<eos>", "<unk>")

_PUNCT = re.compile(r"([^\w\s])")


def tokenize(text: str) -> list[str]:
    return _PUNCT.sub(r" \1 ", text.lower()).split()


class Vocabulary:
    """Token list with fixed reserved prefix; ids are assignment order."""

    def __init__(self, tokens: list[str]):
        if tuple(tokens[:4]) != RESERVED:
            raise ValueError(f"vocabulary must start with reserved tokens {RESERVED}")
        self.tokens = list(tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValueError("vocabulary contains duplicate tokens")

    def __len__(self) -> int:
        return len(self.tokens)

    @classmethod
    def build(cls, texts) -> "Vocabulary":
        """Vocabulary over every token seen, in first-appearance order."""
        tokens = list(RESERVED)
        seen = set(RESERVED)
        for text in texts:
            for tok in tokenize(text):
                if tok not in seen:
                    seen.add(tok)
                    tokens.append(tok)
        return cls(tokens)

    @classmethod
    def build_from_split(cls, split) -> "Vocabulary":
        """Vocabulary from a training split's gold region sentences."""
        def sentences():
            for sample in split.samples:
                for record in sample.regions_in_order():
                    if record.gold_sentence:
                        yield record.gold_sentence
        return cls.build(sentences())

    def encode(self, text: str) -> list[int]:
        return [self.index.get(tok, UNK_ID) for tok in tokenize(text)]

    def decode(self, ids) -> str:
        words = [self.tokens[i] for i in ids if i >= len(RESERVED)]
        return " ".join(words)

    def content_hash(self) -> str:
        return hashlib.sha256("\n".join(self.tokens).encode("utf-8")).hexdigest()
