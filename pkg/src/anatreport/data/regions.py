"""The 29-entry anatomical region vocabulary.

Ships as a data file (one name per line, index = line number) so deployments
can swap region sets; checkpoints record its hash to catch mismatches.
"""

from __future__ import annotations

import hashlib
from functools import lru_cache
from importlib import resources

REGION_COUNT = 29


def _resource_text(filename: str) -> str:
    return resources.files("anatreport.resources").joinpath(filename).read_text("utf-8")


@lru_cache(maxsize=None)
def region_names() -> tuple[str, ...]:
    names = tuple(line.strip() for line in _resource_text("regions.txt").splitlines() if line.strip())
    if len(names) != REGION_COUNT:
        raise ValueError(f"region vocabulary must list {REGION_COUNT} names, found {len(names)}")
    return names


@lru_cache(maxsize=None)
def region_index() -> dict[str, int]:
    return {name: i for i, name in enumerate(region_names())}


def region_vocab_hash() -> str:
    joined = "\n".join(region_names()).encode("utf-8")
    return hashlib.sha256(joined).hexdigest()
