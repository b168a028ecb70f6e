// App bootstrap: wire the session state, API client, and renderers.

import { ApiClient, ApiError } from "./api";
import { diffReports } from "./diff";
import {
  appendResult,
  buildRequest,
  choosePreset,
  createSession,
  editContext,
  isIdempotentRepeat,
  latestEntry,
  selectSample,
  toggleRegion,
  type SessionState,
} from "./state";
import {
  renderDiff,
  renderIdempotenceBanner,
  renderOverlay,
  renderPromptPanel,
  renderRegionRows,
  renderReport,
  renderSampleList,
} from "./render";
import { PRESETS, type PresetName } from "./types";

const api = new ApiClient("");
let state: SessionState = createSession();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function repaint(): void {
  const generateButton = el<HTMLButtonElement>("generate-button");
  generateButton.disabled = state.pending || !state.sample;

  if (!state.sample) return;
  const latest = latestEntry(state);
  renderRegionRows(el("region-rows"), state.sample, latest?.response ?? null,
                   state.regionEnabled, onToggleRegion);
  renderOverlay(el<HTMLCanvasElement>("overlay"), state.sample.regions, state.regionEnabled);

  (el<HTMLInputElement>("context-history")).value = state.context.history;
  (el<HTMLInputElement>("context-indication")).value = state.context.indication;
  (el<HTMLInputElement>("context-reason")).value = state.context.reason_for_exam;

  if (latest) {
    renderReport(el("report-view"), latest.response.report);
    renderPromptPanel(el("prompt-panel"), latest.response.prompt_document);
    renderIdempotenceBanner(el("idempotence-banner"), isIdempotentRepeat(state));
    const entries = state.history;
    if (entries.length >= 2) {
      renderDiff(el("diff-view"), diffReports(
        entries[entries.length - 2].response.report,
        entries[entries.length - 1].response.report,
      ));
    }
  }
}

function onToggleRegion(regionId: number): void {
  state = toggleRegion(state, regionId);
  repaint();
}

async function onSelectSample(sampleId: string): Promise<void> {
  try {
    const sample = await api.getSample(sampleId);
    state = selectSample(state, sample);
    el("status-line").textContent = `Loaded ${sampleId}`;
    repaint();
  } catch (error) {
    showError(error);
  }
}

async function onGenerate(): Promise<void> {
  if (state.pending || !state.sample) return;
  state = { ...state, pending: true };
  repaint();
  const request = buildRequest(state);
  try {
    const response = await api.generate(request);
    state = appendResult(state, request, response);
    el("status-line").textContent =
      `Report ${state.history.length} generated (${response.report.sections.length} sections)`;
  } catch (error) {
    // Keep the prior state intact; only surface the failure.
    state = { ...state, pending: false };
    showError(error);
  }
  repaint();
}

function showError(error: unknown): void {
  const line = el("status-line");
  if (error instanceof ApiError) {
    line.textContent = `Error ${error.status} (${error.code}): ${error.message}`;
  } else {
    line.textContent = `Error: ${String(error)}`;
  }
}

async function boot(): Promise<void> {
  const presetSelect = el<HTMLSelectElement>("preset-select");
  for (const preset of PRESETS) {
    const option = document.createElement("option");
    option.value = preset;
    option.textContent = `preset ${preset}`;
    if (preset === "f") option.selected = true;
    presetSelect.appendChild(option);
  }
  presetSelect.addEventListener("change", () => {
    state = choosePreset(state, presetSelect.value as PresetName);
  });

  for (const [id, key] of [
    ["context-history", "history"],
    ["context-indication", "indication"],
    ["context-reason", "reason_for_exam"],
  ] as const) {
    el<HTMLInputElement>(id).addEventListener("input", (event) => {
      state = editContext(state, { [key]: (event.target as HTMLInputElement).value });
    });
  }

  el("generate-button").addEventListener("click", () => void onGenerate());

  try {
    const health = await api.health();
    const split = Object.keys(health.splits).includes("test") ? "test"
      : Object.keys(health.splits)[0];
    const samples = await api.listSamples(split);
    renderSampleList(el("sample-list"), samples, (id) => void onSelectSample(id));
    el("status-line").textContent = `Connected; ${samples.length} samples in ${split}`;
  } catch (error) {
    showError(error);
  }
}

if (typeof document !== "undefined" && document.getElementById("sample-list")) {
  void boot();
}
