"""Language generation metrics: BLEU-1..4, ROUGE-L, and a METEOR variant.

METEOR here uses exact plus light suffix-stripped unigram matching (no
synonym lexicon): Fmean = 10PR/(R+9P), chunk penalty 0.5*(chunks/matches)^3.
ROUGE-L combines LCS precision/recall as a balanced F-measure (beta = 1).
Corpus BLEU sums clipped counts before dividing.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from ..data.tokenizer import tokenize


@dataclass
class NlgScores:
    bleu1: float
    bleu2: float
    bleu3: float
    bleu4: float
    meteor: float
    rouge_l: float

    def __post_init__(self):
        for name, value in self.to_dict().items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} outside [0, 1]: {value}")

    def to_dict(self) -> dict[str, float]:
        return {
            "bleu1": self.bleu1, "bleu2": self.bleu2, "bleu3": self.bleu3,
            "bleu4": self.bleu4, "meteor": self.meteor, "rouge_l": self.rouge_l,
        }

    def mean_nlg(self) -> float:
        values = self.to_dict().values()
        return sum(values) / len(values)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(candidates: list[str], references_list: list[list[str]],
                max_n: int = 4) -> list[float]:
    """BLEU-1..max_n with clipped counts summed over the whole corpus."""
    if len(candidates) != len(references_list):
        raise ValueError("candidates and references are not aligned")
    if any(not refs for refs in references_list):
        raise ValueError("every candidate needs at least one reference")

    matched = [0] * max_n
    total = [0] * max_n
    cand_len = 0
    ref_len = 0
    for candidate, references in zip(candidates, references_list):
        c_toks = tokenize(candidate)
        r_toks_list = [tokenize(r) for r in references]
        cand_len += len(c_toks)
        # Effective reference length: closest to the candidate, shorter wins ties.
        ref_len += min((abs(len(r) - len(c_toks)), len(r)) for r in r_toks_list)[1]
        for n in range(1, max_n + 1):
            cand_grams = _ngrams(c_toks, n)
            if not cand_grams:
                continue
            best = Counter()
            for r_toks in r_toks_list:
                ref_grams = _ngrams(r_toks, n)
                for gram, count in ref_grams.items():
                    best[gram] = max(best[gram], count)
            matched[n - 1] += sum(min(count, best[gram]) for gram, count in cand_grams.items())
            total[n - 1] += sum(cand_grams.values())

    if cand_len == 0:
        return [0.0] * max_n
    brevity = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    scores = []
    for n in range(1, max_n + 1):
        precisions = []
        for k in range(n):
            if total[k] == 0 or matched[k] == 0:
                precisions = None
                break
            precisions.append(matched[k] / total[k])
        if precisions is None:
            scores.append(0.0)
        else:
            scores.append(brevity * math.exp(sum(math.log(p) for p in precisions) / n))
    return scores


def bleu(candidate: str, references: list[str], max_n: int = 4) -> list[float]:
    """Sentence-level BLEU-1..max_n (corpus formula on a single pair)."""
    return corpus_bleu([candidate], [references], max_n=max_n)


def rouge_l(candidate: str, reference: str) -> float:
    c = tokenize(candidate)
    r = tokenize(reference)
    if not c or not r:
        return 0.0
    # Standard LCS dynamic program over token sequences.
    prev = [0] * (len(r) + 1)
    for tok in c:
        row = [0]
        for j, rtok in enumerate(r, start=1):
            row.append(prev[j - 1] + 1 if tok == rtok else max(row[-1], prev[j]))
        prev = row
    lcs = prev[-1]
    if lcs == 0:
        return 0.0
    precision = lcs / len(c)
    recall = lcs / len(r)
    return 2 * precision * recall / (precision + recall)


_SUFFIXES = ("ing", "ed", "es", "s")


def _stem(token: str) -> str:
    for suffix in _SUFFIXES:
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            return token[: -len(suffix)]
    return token


def _align(c_toks: list[str], r_toks: list[str]) -> list[tuple[int, int]]:
    """Greedy unigram alignment: exact pass, then suffix-stripped pass.

    Each reference position is used at most once; when several positions
    match, the one adjacent to the previous match is preferred to keep the
    chunk count near its minimum.
    """
    used = [False] * len(r_toks)
    pairs: dict[int, int] = {}
    for keyfn in (lambda t: t, _stem):
        r_keys = [keyfn(t) for t in r_toks]
        last_j = -2
        for i, tok in enumerate(c_toks):
            if i in pairs:
                last_j = pairs[i]
                continue
            key = keyfn(tok)
            options = [j for j, rk in enumerate(r_keys) if rk == key and not used[j]]
            if not options:
                continue
            j = last_j + 1 if last_j + 1 in options else options[0]
            pairs[i] = j
            used[j] = True
            last_j = j
    return sorted(pairs.items())


def meteor(candidate: str, reference: str) -> float:
    c_toks = tokenize(candidate)
    r_toks = tokenize(reference)
    if not c_toks or not r_toks:
        return 0.0
    pairs = _align(c_toks, r_toks)
    m = len(pairs)
    if m == 0:
        return 0.0
    precision = m / len(c_toks)
    recall = m / len(r_toks)
    fmean = 10 * precision * recall / (recall + 9 * precision)
    chunks = 0
    prev = None
    for ci, rj in pairs:
        if prev is None or ci != prev[0] + 1 or rj != prev[1] + 1:
            chunks += 1
        prev = (ci, rj)
    penalty = 0.5 * (chunks / m) ** 3
    return fmean * (1.0 - penalty)


def nlg_scores(candidates: list[str], references: list[str]) -> NlgScores:
    """Corpus scores: BLEU from summed counts, METEOR/ROUGE-L averaged."""
    if len(candidates) != len(references) or not candidates:
        raise ValueError("need equal, nonempty candidate and reference lists")
    b = corpus_bleu(candidates, [[r] for r in references], max_n=4)
    met = sum(meteor(c, r) for c, r in zip(candidates, references)) / len(candidates)
    rl = sum(rouge_l(c, r) for c, r in zip(candidates, references)) / len(candidates)
    return NlgScores(bleu1=b[0], bleu2=b[1], bleu3=b[2], bleu4=b[3], meteor=met, rouge_l=rl)
