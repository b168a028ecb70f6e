"""HTTP service backing the steering UI.

Read-only over a loaded checkpoint and dataset splits: browse samples,
regenerate reports with edited context / region toggles / ablation presets,
and score candidate text. Every generate response embeds the exact prompt
document sent to the backend so the UI can surface full traceability.
"""

from __future__ import annotations

import colorsys
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from . import SCHEMA_VERSION
from .compose import Ablation, PRESETS, RemoteBackendError, RemoteConfig, RemoteLlmClient
from .data.regions import REGION_COUNT, region_names
from .data.schema import ClinicalContext, DatasetSplit
from .metrics import extract_labels, nlg_scores
from .pipeline import generate_report
from .training.state import PipelineState


def region_color(index: int) -> str:
    """Deterministic hex color per region index (golden-angle hue walk)."""
    hue = (index * 137.508) % 360.0
    r, g, b = colorsys.hls_to_rgb(hue / 360.0, 0.55, 0.65)
    return f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"


@dataclass
class ServiceContext:
    state: PipelineState
    splits: dict[str, DatasetSplit]
    remote_config: RemoteConfig | None = None
    detect_jitter: float = 0.0
    detect_seed: int = 0
    _index: dict[str, tuple[str, object]] = field(default_factory=dict)

    def __post_init__(self):
        for split_name, split in self.splits.items():
            for sample in split.samples:
                self._index[sample.sample_id] = (split_name, sample)

    def lookup(self, sample_id: str):
        return self._index.get(sample_id)


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


class ContextModel(BaseModel):
    history: str = ""
    indication: str = ""
    reason_for_exam: str = ""

    def to_clinical(self) -> ClinicalContext:
        return ClinicalContext(self.history, self.indication, self.reason_for_exam)


class AblationModel(BaseModel):
    l1: bool = True
    l2: bool = True
    p1: bool = True
    p2: bool = True
    p3: bool = True
    c: bool = True

    def to_ablation(self) -> Ablation:
        return Ablation(**self.model_dump())


class GenerateRequest(BaseModel):
    sample_id: str
    backend: str = "mock"
    preset: str | None = "f"
    ablation: AblationModel | None = None
    clinical_context: ContextModel | None = None
    region_mask: list[bool] | None = Field(default=None)
    include_metrics: bool = False

    @field_validator("backend")
    @classmethod
    def _backend_known(cls, value):
        if value not in ("mock", "remote"):
            raise ValueError("backend must be 'mock' or 'remote'")
        return value

    @field_validator("preset")
    @classmethod
    def _preset_known(cls, value):
        if value is not None and value not in PRESETS:
            raise ValueError(f"preset must be one of {sorted(PRESETS)}")
        return value

    @field_validator("region_mask")
    @classmethod
    def _mask_length(cls, value):
        if value is not None and len(value) != REGION_COUNT:
            raise ValueError(f"region_mask must have exactly {REGION_COUNT} entries")
        return value


class EvaluateRequest(BaseModel):
    candidate: str
    reference: str


def _sample_payload(sample, split_name: str, include_features: bool = False) -> dict:
    regions = []
    for record in sample.regions_in_order():
        entry = {
            "region_id": record.region_id,
            "region_name": record.region_name,
            "box": list(record.box) if record.box else None,
            "gold_sentence": record.gold_sentence,
            "has_sentence": record.has_sentence,
            "is_abnormal": record.is_abnormal,
            "color": region_color(record.region_id),
        }
        regions.append(entry)
    return {
        "sample_id": sample.sample_id,
        "split": split_name,
        "clinical_context": sample.clinical_context.to_dict(),
        "reference_report": sample.reference_report,
        "regions": regions,
    }


def create_app(context: ServiceContext) -> FastAPI:
    app = FastAPI(title="anatreport service", version="0.1.0")

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"schema_version": SCHEMA_VERSION,
                     "error": {"code": exc.code, "message": exc.message}},
        )

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"schema_version": SCHEMA_VERSION,
                     "error": {"code": "invalid_request", "message": str(exc.errors())}},
        )

    @app.get("/api/health")
    def health():
        return {
            "schema_version": SCHEMA_VERSION,
            "status": "ok",
            "stage": context.state.stage,
            "splits": {name: len(split) for name, split in context.splits.items()},
        }

    @app.get("/api/regions")
    def regions():
        return {
            "schema_version": SCHEMA_VERSION,
            "regions": [
                {"region_id": i, "region_name": name, "color": region_color(i)}
                for i, name in enumerate(region_names())
            ],
        }

    @app.get("/api/samples")
    def list_samples(split: str = "test"):
        if split not in context.splits:
            raise ServiceError(404, "unknown_split",
                               f"split {split!r} not loaded (have {sorted(context.splits)})")
        entries = [
            {
                "sample_id": s.sample_id,
                "num_with_sentence": sum(r.has_sentence for r in s.regions),
                "num_abnormal": sum(r.is_abnormal for r in s.regions),
            }
            for s in context.splits[split].samples
        ]
        return {"schema_version": SCHEMA_VERSION, "split": split, "samples": entries}

    @app.get("/api/samples/{sample_id}")
    def get_sample(sample_id: str):
        hit = context.lookup(sample_id)
        if hit is None:
            raise ServiceError(404, "unknown_sample", f"no sample with id {sample_id!r}")
        split_name, sample = hit
        return {"schema_version": SCHEMA_VERSION, **_sample_payload(sample, split_name)}

    @app.post("/api/generate")
    def generate(request: GenerateRequest):
        hit = context.lookup(request.sample_id)
        if hit is None:
            raise ServiceError(404, "unknown_sample", f"no sample with id {request.sample_id!r}")
        split_name, sample = hit

        ablation = request.ablation.to_ablation() if request.ablation else PRESETS[request.preset or "f"]
        remote_client = None
        if request.backend == "remote":
            if context.remote_config is None:
                raise ServiceError(502, "remote_backend_failure",
                                   "service started without a remote backend configuration")
            remote_client = RemoteLlmClient(context.remote_config)

        try:
            result = generate_report(
                context.state, sample,
                ablation=ablation,
                backend=request.backend,
                region_mask=request.region_mask,
                context_override=(request.clinical_context.to_clinical()
                                  if request.clinical_context else None),
                remote_client=remote_client,
                jitter=context.detect_jitter,
                detect_seed=context.detect_seed,
            )
        except RemoteBackendError as exc:
            raise ServiceError(502, exc.code, str(exc)) from exc

        names = region_names()
        payload = {
            "schema_version": SCHEMA_VERSION,
            "sample_id": sample.sample_id,
            "split": split_name,
            "backend": request.backend,
            "ablation": ablation.to_dict(),
            "region_sentences": [
                {"region_id": i, "region_name": names[i], "sentence": result.sentences[i],
                 "color": region_color(i)}
                for i in range(REGION_COUNT)
            ],
            "flags": {
                "p_sentence": [float(v) for v in result.flags.p_sentence],
                "p_abnormal": [float(v) for v in result.flags.p_abnormal],
                "selected": [bool(v) for v in result.flags.selected],
                "abnormal": [bool(v) for v in result.flags.abnormal],
                "threshold": result.flags.threshold,
            },
            "prompts": {
                "location": result.prompts.location_prompts,
                "abnormality": result.prompts.abnormality_prompts,
            },
            "prompt_document": result.document.render(),
            "report": result.report.to_dict(),
            "boxes": [list(b) for b in result.boxes],
        }
        if request.include_metrics and sample.reference_report:
            scores = nlg_scores([result.report.raw_text], [sample.reference_report])
            payload["metrics"] = {
                "nlg": scores.to_dict(),
                "candidate_labels": extract_labels(result.report.raw_text).to_dict(),
                "reference_labels": extract_labels(sample.reference_report).to_dict(),
            }
        return payload

    @app.post("/api/evaluate")
    def evaluate(request: EvaluateRequest):
        scores = nlg_scores([request.candidate], [request.reference])
        return {
            "schema_version": SCHEMA_VERSION,
            "nlg": scores.to_dict(),
            "candidate_labels": extract_labels(request.candidate).to_dict(),
            "reference_labels": extract_labels(request.reference).to_dict(),
        }

    return app
