// Session state for the steering loop: sample selection, editable context,
// region toggles, ablation preset, and an append-only history of
// (request, response) pairs. Pure functions so the flow is unit-testable
// without a DOM.

import type {
  ClinicalContext,
  GenerateRequest,
  GenerateResponse,
  PresetName,
  SamplePayload,
} from "./types";
import { REGION_COUNT } from "./types";

export interface HistoryEntry {
  request: GenerateRequest;
  response: GenerateResponse;
}

export interface SessionState {
  sample: SamplePayload | null;
  context: ClinicalContext;
  regionEnabled: boolean[];
  preset: PresetName;
  history: HistoryEntry[];
  pending: boolean;
}

export function createSession(): SessionState {
  return {
    sample: null,
    context: { history: "", indication: "", reason_for_exam: "" },
    regionEnabled: Array(REGION_COUNT).fill(true),
    preset: "f",
    history: [],
    pending: false,
  };
}

export function selectSample(state: SessionState, sample: SamplePayload): SessionState {
  return {
    ...state,
    sample,
    context: { ...sample.clinical_context },
    regionEnabled: Array(REGION_COUNT).fill(true),
    history: [],
  };
}

export function toggleRegion(state: SessionState, regionId: number): SessionState {
  if (regionId < 0 || regionId >= REGION_COUNT) {
    throw new Error(`region id ${regionId} out of range`);
  }
  const regionEnabled = state.regionEnabled.slice();
  regionEnabled[regionId] = !regionEnabled[regionId];
  return { ...state, regionEnabled };
}

export function editContext(
  state: SessionState,
  patch: Partial<ClinicalContext>,
): SessionState {
  return { ...state, context: { ...state.context, ...patch } };
}

export function choosePreset(state: SessionState, preset: PresetName): SessionState {
  return { ...state, preset };
}

export function buildRequest(state: SessionState): GenerateRequest {
  if (!state.sample) throw new Error("no sample selected");
  const request: GenerateRequest = {
    sample_id: state.sample.sample_id,
    backend: "mock",
    preset: state.preset,
    clinical_context: { ...state.context },
  };
  if (state.regionEnabled.some((on) => !on)) {
    request.region_mask = state.regionEnabled.slice();
  }
  return request;
}

export function appendResult(
  state: SessionState,
  request: GenerateRequest,
  response: GenerateResponse,
): SessionState {
  // History is append-only within a session; prior entries never mutate.
  return { ...state, history: [...state.history, { request, response }], pending: false };
}

export function latestEntry(state: SessionState): HistoryEntry | null {
  return state.history.length ? state.history[state.history.length - 1] : null;
}

/** True when a regenerate produced the same report as the previous entry. */
export function isIdempotentRepeat(state: SessionState): boolean {
  const n = state.history.length;
  if (n < 2) return false;
  return (
    state.history[n - 1].response.report.raw_text ===
    state.history[n - 2].response.report.raw_text
  );
}
