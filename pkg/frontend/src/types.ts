// Payload shapes of the /v1 gateway. These mirror the server responses
// field for field; the UI never reshapes them beyond presentation.

export interface LogSummary {
  id: string;
  name: string;
  trace_count: number;
  event_count: number;
}

export interface AttributeProfile {
  name: string;
  scope: "trace" | "event";
  kind: string;
  distinct_count: number;
  [extra: string]: unknown;
}

export interface LogStats {
  trace_count: number;
  event_count: number;
  event_classes: string[];
  trace_length: { min: number; mean: number; max: number };
  span: { start: string; end: string };
  attributes: AttributeProfile[];
}

export interface UploadedLog extends LogSummary {
  stats: LogStats;
}

export interface OrderingDoc {
  kind: string;
  seed: number;
}

export interface SplitSpecDoc {
  log_ref: string;
  name: string;
  train_fraction: number;
  ordering?: OrderingDoc;
}

export interface SplitRecord {
  split_key: string;
  log_ref: string;
  name: string;
  spec: SplitSpecDoc;
  train_traces: number;
  test_traces: number;
}

// ---- training requests ------------------------------------------------

export interface PrefixSpecDoc {
  mode: string;
  length: number;
  short_traces?: string;
}

export interface LabelDoc {
  kind: string;
  attribute?: string | null;
  threshold?: string | null;
  threshold_value?: number | null;
}

export interface OptimDoc {
  method: string;
  budget?: number;
  metric?: string | null;
  validation_fraction?: number;
  seed?: number;
}

export interface TrainingRequestDoc {
  split_key: string;
  prediction_method: string;
  algorithms: string[];
  encodings: string[];
  prefix_specs: PrefixSpecDoc[];
  label: LabelDoc;
  optim?: OptimDoc;
  intercase?: boolean;
}

export interface JobResultEntry {
  prefix: string;
  prefix_length: number;
  task_identity: string;
  model: string;
  report: string;
  [extra: string]: unknown;
}

export interface JobDoc {
  id: string;
  status: "created" | "queued" | "running" | "completed" | "error";
  config: {
    split_key: string;
    prefix: PrefixSpecDoc;
    label: LabelDoc;
    encoding: { method: string; padded_length: number; intercase: boolean };
    model: { family: string; algorithm: string; [extra: string]: unknown };
    [extra: string]: unknown;
  };
  result: JobResultEntry[] | null;
  error_detail: string | null;
  timestamps: Record<string, string | null>;
}

export interface SubmitResponse {
  jobs: JobDoc[];
}

// ---- results ----------------------------------------------------------

export interface EvaluationDoc {
  model_fingerprint: string;
  family: "classification" | "regression";
  metrics: Record<string, number | null>;
  timing: { training_time: number; prediction_time: number; elapsed_total: number };
  per_prefix: Record<string, Record<string, number | null>>;
  row_count: number;
}

export interface ResultRow {
  id: string;
  job_id: string;
  model_fingerprint: string;
  task_identity: string;
  algorithm: string;
  encoding: string;
  prefix: string;
  family: "classification" | "regression";
  report: EvaluationDoc;
}

export interface ComparisonRow {
  task_identity: string;
  algorithm: string;
  encoding: string;
  prefix: string;
  row_count: number;
  [metric: string]: string | number | null;
}

export type SeriesPoint = [number, number | null];

export interface BubblePoint {
  x: number;
  y: number;
  size: number;
  label: string;
  group: string;
}

export interface ComparisonDoc {
  family: "classification" | "regression";
  rows: ComparisonRow[];
  per_prefix_series: Record<string, Record<string, SeriesPoint[]>>;
  radar: { metrics: string[]; polygons: Record<string, number[]> };
  bubble: Record<string, BubblePoint[]> | null;
}

// ---- predictions and explanations --------------------------------------

export interface PredictionDoc {
  family: "classification" | "regression";
  classes?: string[];
  scores?: number[][];
  labels?: string[];
  values?: number[];
}

export interface PredictResponse {
  fingerprint: string;
  trace_id: string;
  prefix_length: number;
  used_events: number;
  prediction: PredictionDoc;
  explanation?: EventExplanation;
}

export interface AttributionDoc {
  feature_names: string[];
  values: number[];
  base_value: number;
  instance_output: number;
}

export interface EventExplanation {
  level: "event";
  attribution: AttributionDoc;
  display: string[];
}

export interface TraceExplanation {
  level: "trace";
  prefix_lengths: number[];
  series: Record<string, number[]>;
}

export interface LogExplanationGroup {
  value: string;
  mean_output: number;
  count: number;
}

export interface LogExplanation {
  level: "log";
  feature: string;
  groups: LogExplanationGroup[];
}

export type ExplanationDoc = EventExplanation | TraceExplanation | LogExplanation;

export interface ExplanationRequest {
  level: "event" | "trace" | "log";
  model: string;
  trace_id?: string;
  feature?: string;
  part?: string;
  lengths?: number[];
}

export interface ApiErrorDoc {
  code: string;
  message: string;
  detail: unknown;
}
