// @vitest-environment node
//
// Contract tests against a live mock-backend service. The suite builds a
// small checkpoint through the backend CLI (cached across runs), starts the
// HTTP service, and drives it through the same state/request machinery the
// UI uses.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { existsSync, mkdirSync } from "node:fs";
import { join } from "node:path";
import { Window } from "happy-dom";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { renderPromptPanel } from "../src/render";
import {
  appendResult,
  buildRequest,
  choosePreset,
  createSession,
  editContext,
  isIdempotentRepeat,
  selectSample,
  toggleRegion,
  type SessionState,
} from "../src/state";

const FIXTURE_DIR = "/tmp/anatreport-ui-fixture";
const PORT = 8731;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
const api = new ApiClient(BASE);

function run(args: string[]): void {
  const result = spawnSync("python3", ["-m", "anatreport.cli", ...args], {
    stdio: "pipe",
    encoding: "utf-8",
    timeout: 300_000,
  });
  if (result.status !== 0) {
    throw new Error(`CLI ${args[0]} failed: ${result.stderr || result.stdout}`);
  }
}

function buildFixture(): { checkpoint: string; dataset: string } {
  mkdirSync(FIXTURE_DIR, { recursive: true });
  const train = join(FIXTURE_DIR, "train.jsonl");
  const val = join(FIXTURE_DIR, "validation.jsonl");
  const test = join(FIXTURE_DIR, "test.jsonl");
  const stage2 = join(FIXTURE_DIR, "stage2.ckpt");
  const stage3 = join(FIXTURE_DIR, "stage3.ckpt");
  if (!existsSync(stage3)) {
    run(["synth", "--n", "16", "--seed", "7", "--out", train]);
    run(["synth", "--n", "6", "--seed", "17", "--split", "validation", "--out", val]);
    run(["synth", "--n", "6", "--seed", "27", "--split", "test", "--out", test]);
    run(["train", "--stage", "2", "--train", train, "--val", val,
         "--epochs", "2", "--batch-size", "64", "--seed", "7", "--out", stage2]);
    run(["train", "--stage", "3", "--train", train, "--val", val,
         "--epochs", "3", "--batch-size", "32", "--seed", "7",
         "--from-checkpoint", stage2, "--out", stage3]);
  }
  return { checkpoint: stage3, dataset: test };
}

async function waitForHealth(timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/api/health`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
  throw new Error("service did not become healthy in time");
}

beforeAll(async () => {
  const { checkpoint, dataset } = buildFixture();
  server = spawn("python3", [
    "-m", "anatreport.cli", "serve",
    "--checkpoint", checkpoint, "--data", dataset,
    "--host", "127.0.0.1", "--port", String(PORT),
  ], { stdio: "ignore" });
  await waitForHealth(60_000);
}, 420_000);

afterAll(() => {
  server?.kill("SIGTERM");
});

async function freshSession(): Promise<SessionState> {
  const samples = await api.listSamples("test");
  const payload = await api.getSample(samples[0].sample_id);
  return selectSample(createSession(), payload);
}

describe("UI contract against the live service", () => {
  it("region toggle removes the region from the generated report", async () => {
    let state = await freshSession();
    const baseline = await api.generate(buildRequest(state));
    expect(baseline.report.sections.length).toBeGreaterThan(0);
    const target = baseline.report.sections[0].region_name;
    const targetId = baseline.region_sentences.find(
      (s) => s.region_name === target,
    )!.region_id;

    state = toggleRegion(state, targetId);
    const regenerated = await api.generate(buildRequest(state));
    const regions = regenerated.report.sections.map((s) => s.region_name);
    expect(regions).not.toContain(target);
  }, 60_000);

  it("clinical-context edit propagates to the context summary", async () => {
    let state = await freshSession();
    state = editContext(state, { indication: "worsening cough overnight" });
    const response = await api.generate(buildRequest(state));
    expect(response.report.context_summary).toContain("worsening cough overnight");
  }, 60_000);

  it("prompt-document panel equals the API's embedded document byte-for-byte", async () => {
    const state = await freshSession();
    const response = await api.generate(buildRequest(state));
    const window = new Window();
    const panel = window.document.createElement("pre");
    renderPromptPanel(panel as unknown as HTMLElement, response.prompt_document);
    expect(panel.textContent).toBe(response.prompt_document);
  }, 60_000);

  it("unchanged state regenerates an identical report (idempotence banner)", async () => {
    let state = await freshSession();
    const request = buildRequest(state);
    const first = await api.generate(request);
    state = appendResult(state, request, first);
    const second = await api.generate(buildRequest(state));
    state = appendResult(state, buildRequest(state), second);
    expect(second.report.raw_text).toBe(first.report.raw_text);
    expect(isIdempotentRepeat(state)).toBe(true);
  }, 60_000);

  it("region colors match between sample payload and generate payload", async () => {
    const state = await freshSession();
    const response = await api.generate(buildRequest(state));
    for (const region of state.sample!.regions) {
      const generated = response.region_sentences.find(
        (s) => s.region_id === region.region_id,
      );
      expect(generated?.color).toBe(region.color);
    }
  }, 60_000);

  it("replaying a history request reproduces the identical mock report", async () => {
    let state = await freshSession();
    state = editContext(state, { history: "prior cabg" });
    state = toggleRegion(state, 2);
    const request = buildRequest(state);
    const original = await api.generate(request);
    // A reloaded session replaying the stored request gets the same bytes.
    const replay = await api.generate(JSON.parse(JSON.stringify(request)));
    expect(JSON.stringify(replay)).toBe(JSON.stringify(original));
  }, 60_000);

  it("switching preset e to f makes the prompt panel gain anatomy sections", async () => {
    let state = await freshSession();
    state = choosePreset(state, "e");
    const docE = (await api.generate(buildRequest(state))).prompt_document;
    state = choosePreset(state, "f");
    const docF = (await api.generate(buildRequest(state))).prompt_document;
    expect(docE).not.toContain("## Anatomy prompts");
    expect(docF).toContain("## Anatomy prompts");
  }, 60_000);

  it("errors surface with machine-readable codes and retain nothing", async () => {
    await expect(api.getSample("no-such-sample")).rejects.toMatchObject({
      status: 404,
      code: "unknown_sample",
    });
  }, 60_000);
});
