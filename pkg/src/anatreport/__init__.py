"""anatreport: anatomy-guided structured chest X-ray report generation.

A desk-scale pipeline: per-region visual features drive a region-conditioned
sentence generator and dual binary classifiers, whose outputs become textual
prompts that are composed with clinical context into an LLM request yielding
a structured, region-anchored report.
"""

__version__ = "0.1.0"

SCHEMA_VERSION = 1
