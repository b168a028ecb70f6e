// Wire types for the report-generation service JSON API.

export interface ClinicalContext {
  history: string;
  indication: string;
  reason_for_exam: string;
}

export interface RegionInfo {
  region_id: number;
  region_name: string;
  box: number[] | null;
  gold_sentence: string | null;
  has_sentence: boolean;
  is_abnormal: boolean;
  color: string;
}

export interface SamplePayload {
  schema_version: number;
  sample_id: string;
  split: string;
  clinical_context: ClinicalContext;
  reference_report: string;
  regions: RegionInfo[];
}

export interface SampleListEntry {
  sample_id: string;
  num_with_sentence: number;
  num_abnormal: number;
}

export interface ReportSection {
  region_name: string;
  text: string;
  abnormal: boolean;
}

export interface StructuredReport {
  sections: ReportSection[];
  context_summary: string | null;
  raw_text: string;
  unstructured: boolean;
}

export interface RegionSentence {
  region_id: number;
  region_name: string;
  sentence: string;
  color: string;
}

export interface GenerateResponse {
  schema_version: number;
  sample_id: string;
  backend: string;
  ablation: Record<string, boolean>;
  region_sentences: RegionSentence[];
  flags: {
    p_sentence: number[];
    p_abnormal: number[];
    selected: boolean[];
    abnormal: boolean[];
    threshold: number;
  };
  prompts: { location: string[]; abnormality: string[] };
  prompt_document: string;
  report: StructuredReport;
  boxes: number[][];
}

export interface GenerateRequest {
  sample_id: string;
  backend: string;
  preset: string;
  clinical_context?: ClinicalContext;
  region_mask?: boolean[];
  include_metrics?: boolean;
}

export const PRESETS = ["a", "b", "c", "d", "e", "f"] as const;
export type PresetName = (typeof PRESETS)[number];

export const REGION_COUNT = 29;
