"""Seeded synthetic corpus with linearly separable region states.

Per region a latent state in {silent, normal, abnormal} is drawn. The
feature vector is region basis + state direction + Gaussian noise, with the
basis/direction geometry derived from a fixed constant seed so every split
shares the same feature space regardless of its own seed. Gold sentences
come from a small template grammar keyed on (region family, state); each
family has three normal and three abnormal templates that differ in exactly
one word, so the conditional structure is learnable from the feature alone
up to that one branch token.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import numpy as np

from .regions import REGION_COUNT, region_names
from .schema import FEATURE_DIM, ClinicalContext, DatasetSplit, RegionRecord, Sample

# Feature-space geometry is fixed across datasets; only sample draws vary.
_GEOMETRY_SEED = 727144
IMAGE_SIZE = 1024

STATE_SILENT, STATE_NORMAL, STATE_ABNORMAL = "silent", "normal", "abnormal"

FAMILY_OF_REGION = {
    "right lung": "lung",
    "right upper lung zone": "lung",
    "right mid lung zone": "lung",
    "right lower lung zone": "lung",
    "right hilar structures": "lung",
    "right apical zone": "lung",
    "left lung": "lung",
    "left upper lung zone": "lung",
    "left mid lung zone": "lung",
    "left lower lung zone": "lung",
    "left hilar structures": "lung",
    "left apical zone": "lung",
    "right costophrenic angle": "pleural",
    "right hemidiaphragm": "pleural",
    "left costophrenic angle": "pleural",
    "left hemidiaphragm": "pleural",
    "spine": "bone",
    "right clavicle": "bone",
    "left clavicle": "bone",
    "cardiac silhouette": "cardiac",
    "right atrium": "cardiac",
    "cavoatrial junction": "cardiac",
    "svc": "cardiac",
    "trachea": "mediastinal",
    "mediastinum": "mediastinal",
    "upper mediastinum": "mediastinal",
    "aortic arch": "mediastinal",
    "carina": "mediastinal",
    "abdomen": "abdomen",
}

NORMAL_TEMPLATES = {
    "lung": [
        "the {region} is clear without focal consolidation or pulmonary edema .",
        "the {region} appears clear without focal consolidation or pulmonary edema .",
        "the {region} remains clear without focal consolidation or pulmonary edema .",
    ],
    "pleural": [
        "the {region} is sharp without pleural effusion or pneumothorax .",
        "the {region} appears sharp without pleural effusion or pneumothorax .",
        "the {region} remains sharp without pleural effusion or pneumothorax .",
    ],
    "bone": [
        "the {region} is intact without acute fracture or displacement .",
        "the {region} appears intact without acute fracture or displacement .",
        "the {region} remains intact without acute fracture or displacement .",
    ],
    "cardiac": [
        "the {region} is normal in size and contour without cardiomegaly .",
        "the {region} appears normal in size and contour without cardiomegaly .",
        "the {region} remains normal in size and contour without cardiomegaly .",
    ],
    "mediastinal": [
        "the {region} is unremarkable with no widening or adenopathy identified .",
        "the {region} appears unremarkable with no widening or adenopathy identified .",
        "the {region} remains unremarkable with no widening or adenopathy identified .",
    ],
    "abdomen": [
        "the visualized {region} is unremarkable without free intraperitoneal air .",
        "the visualized {region} appears unremarkable without free intraperitoneal air .",
        "the visualized {region} remains unremarkable without free intraperitoneal air .",
    ],
}

ABNORMAL_TEMPLATES = {
    "lung": [
        "there is patchy opacity within the {region} concerning for pneumonia .",
        "there is confluent opacity within the {region} concerning for pneumonia .",
        "there is hazy opacity within the {region} concerning for pneumonia .",
    ],
    "pleural": [
        "there is a small pleural effusion layering near the {region} .",
        "there is a moderate pleural effusion layering near the {region} .",
        "there is a large pleural effusion layering near the {region} .",
    ],
    "bone": [
        "there is a displaced fracture involving the {region} on the current study .",
        "there is a subtle fracture involving the {region} on the current study .",
        "there is a healing fracture involving the {region} on the current study .",
    ],
    "cardiac": [
        "the {region} is enlarged consistent with moderate cardiomegaly on this exam .",
        "the {region} is enlarged consistent with stable cardiomegaly on this exam .",
        "the {region} is enlarged consistent with progressive cardiomegaly on this exam .",
    ],
    "mediastinal": [
        "the {region} is mildly widened with an enlarged cardiomediastinal contour .",
        "the {region} is diffusely widened with an enlarged cardiomediastinal contour .",
        "the {region} is newly widened with an enlarged cardiomediastinal contour .",
    ],
    "abdomen": [
        "there is a nasogastric tube projecting over the {region} in expected position .",
        "there is a feeding tube projecting over the {region} in expected position .",
        "there is a weighted tube projecting over the {region} in expected position .",
    ],
}

CONTEXT_POOL = [
    ClinicalContext("cough and fever for three days", "evaluate for pneumonia",
                    "rule out acute cardiopulmonary process"),
    ClinicalContext("chronic obstructive pulmonary disease", "shortness of breath",
                    "assess for pulmonary edema"),
    ClinicalContext("recent cardiac surgery", "post operative check",
                    "evaluate line and tube placement"),
    ClinicalContext("", "chest pain", "rule out pneumothorax"),
    ClinicalContext("long term smoker", "annual screening follow up",
                    "evaluate known opacity"),
    ClinicalContext("fall from standing height", "left sided rib pain",
                    "assess for fracture"),
]


@lru_cache(maxsize=None)
def feature_geometry() -> tuple[np.ndarray, np.ndarray]:
    """Fixed (region_basis [29,1024], state_directions [3,1024]) unit vectors."""
    rng = np.random.default_rng(_GEOMETRY_SEED)
    basis = rng.normal(size=(REGION_COUNT, FEATURE_DIM))
    basis /= np.linalg.norm(basis, axis=1, keepdims=True)
    directions = rng.normal(size=(3, FEATURE_DIM))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    return basis, directions


@lru_cache(maxsize=None)
def anatomy_layout() -> dict[str, tuple[float, float, float, float]]:
    """Region name -> normalized [0,1]^2 box from the shipped layout table."""
    raw = resources.files("anatreport.resources").joinpath("region_layout.json").read_text("utf-8")
    layout = {name: tuple(box) for name, box in json.loads(raw).items()}
    missing = set(region_names()) - set(layout)
    if missing:
        raise ValueError(f"layout table missing regions: {sorted(missing)}")
    return layout


def layout_box_pixels(name: str, image_size: int = IMAGE_SIZE) -> tuple[float, float, float, float]:
    x1, y1, x2, y2 = anatomy_layout()[name]
    return (x1 * image_size, y1 * image_size, x2 * image_size, y2 * image_size)


def format_section_line(region_name: str, text: str) -> str:
    return f"{region_name[:1].upper()}{region_name[1:]}: {text}"


def build_reference_report(records: list[RegionRecord]) -> str:
    lines = [
        format_section_line(r.region_name, r.gold_sentence)
        for r in records
        if r.has_sentence and r.gold_sentence
    ]
    return "\n".join(lines)


def generate_synthetic(
    n: int,
    seed: int,
    abnormal_rate: float = 0.25,
    silent_rate: float = 0.3,
    noise_sigma: float = 0.1,
    name: str = "train",
) -> DatasetSplit:
    """Draw ``n`` fully deterministic synthetic samples.

    States are linearly separable by construction: the three state
    directions are far apart relative to ``noise_sigma``, so a linear probe
    on (feature -> is_abnormal) is near-perfect and downstream training
    targets are achievable.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 <= abnormal_rate <= 1.0 and 0.0 <= silent_rate <= 1.0):
        raise ValueError("rates must lie in [0, 1]")
    if abnormal_rate + silent_rate > 1.0:
        raise ValueError("abnormal_rate + silent_rate must not exceed 1")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")

    basis, directions = feature_geometry()
    state_row = {STATE_SILENT: 0, STATE_NORMAL: 1, STATE_ABNORMAL: 2}
    rng = np.random.default_rng(seed)
    names = region_names()

    samples = []
    for i in range(n):
        records = []
        for rid, region in enumerate(names):
            u = rng.random()
            if u < abnormal_rate:
                state = STATE_ABNORMAL
            elif u < abnormal_rate + silent_rate:
                state = STATE_SILENT
            else:
                state = STATE_NORMAL
            noise = rng.normal(scale=noise_sigma, size=FEATURE_DIM) if noise_sigma else 0.0
            feature = (basis[rid] + directions[state_row[state]] + noise).astype(np.float32)

            gold = None
            if state != STATE_SILENT:
                family = FAMILY_OF_REGION[region]
                pool = ABNORMAL_TEMPLATES[family] if state == STATE_ABNORMAL else NORMAL_TEMPLATES[family]
                gold = pool[int(rng.integers(len(pool)))].format(region=region)

            records.append(RegionRecord(
                region_id=rid,
                region_name=region,
                feature=feature,
                box=layout_box_pixels(region),
                gold_sentence=gold,
                has_sentence=state != STATE_SILENT,
                is_abnormal=state == STATE_ABNORMAL,
            ))

        context = CONTEXT_POOL[int(rng.integers(len(CONTEXT_POOL)))]
        samples.append(Sample(
            sample_id=f"synth-{seed}-{i:05d}",
            regions=records,
            clinical_context=ClinicalContext(**context.to_dict()),
            reference_report=build_reference_report(records),
        ))

    split = DatasetSplit(name=name, samples=samples)
    split.validate()
    return split
