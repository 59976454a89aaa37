// Response shapes of the evaluation service (numbers travel as decimal text).

export interface ModelResponse {
  document: {
    name: string;
    nodes: { id: number; kind: string; r: number; parents: number[] }[];
    utilities: { id: number; parents: number[] }[];
    specs?: Record<string, SpecDocument>;
    policies?: Record<string, unknown>;
  };
  derived: {
    decisionSequence: string;
    utilityAnchors: number[];
    relevanceScopes: Record<string, number[]>;
    parameters: string[];
    resolvedSpecs?: Record<string, Record<string, string>>;
    diagnostics: string[];
  };
}

export interface SpecDocument {
  numeric: Record<string, number | string>;
  relations: Record<string, string>;
  free: string[];
}

export interface EvaluateEntry {
  config: Record<string, number>;
  polynomial: string;
  value: string | null;
}

export interface EvaluateResponse {
  stage: number;
  scope: string[];
  entries: EvaluateEntry[];
}

export interface PolicyRow {
  block: Record<string, number>;
  bestAction: number;
  value: string;
  runnerUp: string | null;
  margin: string | null;
}

export interface PolicyTableResponse {
  decision: number;
  rows: PolicyRow[];
  diagnostics: string[];
}

export interface AxisSpec {
  name: string;
  lo: number | string;
  hi: number | string;
  steps: number;
}

export interface SweepCell {
  idx: number[];
  center: string[];
  label: string;
  values: string[];
}

export interface SweepResponse {
  labels: string[];
  axes: AxisSpec[];
  cells: SweepCell[];
}

export interface InlineSpec {
  numeric: Record<string, string>;
  relations: Record<string, string>;
  free: string[];
}
