"""Dataset schema, loaders, tokenizer, and the synthetic corpus generator."""

from .regions import REGION_COUNT, region_index, region_names, region_vocab_hash
from .schema import (
    FEATURE_DIM,
    Box,
    ClinicalContext,
    DatasetError,
    DatasetSplit,
    RegionRecord,
    Sample,
)
from .tokenizer import BOS_ID, EOS_ID, PAD_ID, RESERVED, UNK_ID, Vocabulary, tokenize
from .synthetic import (
    CONTEXT_POOL,
    IMAGE_SIZE,
    anatomy_layout,
    build_reference_report,
    format_section_line,
    generate_synthetic,
    layout_box_pixels,
)
from .jsonl import load_dataset, save_split

__all__ = [
    "BOS_ID",
    "Box",
    "CONTEXT_POOL",
    "ClinicalContext",
    "DatasetError",
    "DatasetSplit",
    "EOS_ID",
    "FEATURE_DIM",
    "IMAGE_SIZE",
    "PAD_ID",
    "REGION_COUNT",
    "RESERVED",
    "RegionRecord",
    "Sample",
    "UNK_ID",
    "Vocabulary",
    "anatomy_layout",
    "build_reference_report",
    "format_section_line",
    "generate_synthetic",
    "layout_box_pixels",
    "load_dataset",
    "region_index",
    "region_names",
    "region_vocab_hash",
    "save_split",
    "tokenize",
]
