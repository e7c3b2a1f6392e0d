// Hand-frozen payloads for the contract tests. Shapes mirror the live
// gateway responses field for field; the values are arbitrary but fixed,
// so tests can assert exact equality between payload and rendering.

import type {
  ComparisonDoc,
  ComparisonRow,
  EventExplanation,
  LogExplanation,
  LogStats,
  LogSummary,
  ResultRow,
  SeriesPoint,
  SplitRecord,
  TraceExplanation,
} from "../src/types.js";

export const LOGS: LogSummary[] = [
  { id: "log-1", name: "clinic.xes", trace_count: 120, event_count: 612 },
];

export const STATS: LogStats = {
  trace_count: 120,
  event_count: 612,
  event_classes: ["register", "triage", "treat", "discharge"],
  trace_length: { min: 3, mean: 5.1, max: 8 },
  span: { start: "2026-01-05T08:00:00+00:00", end: "2026-03-20T17:30:00+00:00" },
  attributes: [
    { name: "outcome", scope: "trace", kind: "string", distinct_count: 2 },
    { name: "age", scope: "event", kind: "number", distinct_count: 55 },
  ],
};

export const SPLITS: SplitRecord[] = [
  {
    split_key: "c9f2a75d1e884b0c",
    log_ref: "log-1",
    name: "clinic-temporal",
    spec: {
      log_ref: "log-1",
      name: "clinic-temporal",
      train_fraction: 0.75,
      ordering: { kind: "temporal_start", seed: 0 },
    },
    train_traces: 90,
    test_traces: 30,
  },
];

// One row per trained task: 2 algorithms x 2 encodings x 2 prefix lengths.
// Columns after the identity triple follow the CSV export order:
// accuracy, precision, recall, f1, auc, training_time, prediction_time, elapsed_total.
const REPORT_TABLE: ReadonlyArray<
  readonly [string, string, number, number, number, number, number, number, number, number, number]
> = [
  ["decision_tree", "boolean", 2, 0.8125, 0.7917, 0.8261, 0.8085, 0.8624, 0.0042, 0.0007, 0.0151],
  ["decision_tree", "boolean", 5, 0.8438, 0.8261, 0.8519, 0.8388, 0.8915, 0.0058, 0.0008, 0.0192],
  ["decision_tree", "simple_index", 2, 0.7812, 0.75, 0.8, 0.7742, 0.8291, 0.0036, 0.0006, 0.0128],
  ["decision_tree", "simple_index", 5, 0.8594, 0.85, 0.88, 0.8647, 0.9034, 0.0061, 0.0009, 0.0204],
  ["random_forest", "boolean", 2, 0.875, 0.8696, 0.8889, 0.8791, 0.9212, 0.0311, 0.0041, 0.0587],
  ["random_forest", "boolean", 5, 0.9062, 0.8966, 0.9231, 0.9096, 0.9533, 0.0428, 0.0052, 0.0754],
  ["random_forest", "simple_index", 2, 0.8438, 0.84, 0.8636, 0.8516, 0.9078, 0.0295, 0.0039, 0.0542],
  ["random_forest", "simple_index", 5, 0.9375, 0.9259, 0.9444, 0.9351, 0.9712, 0.0453, 0.0056, 0.0816],
];

const ROW_COUNT = 40;
const METRIC_NAMES = ["accuracy", "precision", "recall", "f1", "auc"] as const;
const SERIES_METRICS = [
  ...METRIC_NAMES, "training_time", "prediction_time", "elapsed_total",
] as const;

function rowOf(entry: (typeof REPORT_TABLE)[number], index: number): ResultRow {
  const [algorithm, encoding, length, acc, prec, rec, f1, auc, ttime, ptime, etotal] = entry;
  const identity = `${algorithm}|${encoding}|fixed:${length}`;
  const metrics = { accuracy: acc, precision: prec, recall: rec, f1, auc };
  return {
    id: `r${index + 1}`,
    job_id: `job-fixture-${index + 1}`,
    model_fingerprint: `fp-${index + 1}`,
    task_identity: identity,
    algorithm,
    encoding,
    prefix: `fixed:${length}`,
    family: "classification",
    report: {
      model_fingerprint: `fp-${index + 1}`,
      family: "classification",
      metrics,
      timing: { training_time: ttime, prediction_time: ptime, elapsed_total: etotal },
      per_prefix: { [String(length)]: metrics },
      row_count: ROW_COUNT,
    },
  };
}

export const CLASSIFICATION_RESULTS: ResultRow[] = REPORT_TABLE.map(rowOf);

export const REGRESSION_RESULT: ResultRow = {
  id: "r9",
  job_id: "job-fixture-9",
  model_fingerprint: "fp-9",
  task_identity: "linear_sgd|simple_index|fixed:2",
  algorithm: "linear_sgd",
  encoding: "simple_index",
  prefix: "fixed:2",
  family: "regression",
  report: {
    model_fingerprint: "fp-9",
    family: "regression",
    metrics: { mae: 412.5, rmse: 603.2, r2: 0.71 },
    timing: { training_time: 0.0104, prediction_time: 0.0012, elapsed_total: 0.0388 },
    per_prefix: { "2": { mae: 412.5, rmse: 603.2, r2: 0.71 } },
    row_count: ROW_COUNT,
  },
};

export const RESULT_ROWS: ResultRow[] = [...CLASSIFICATION_RESULTS, REGRESSION_RESULT];

function comparisonRows(): ComparisonRow[] {
  return REPORT_TABLE.map((entry) => {
    const [algorithm, encoding, length, acc, prec, rec, f1, auc, ttime, ptime, etotal] = entry;
    return {
      task_identity: `${algorithm}|${encoding}|fixed:${length}`,
      algorithm,
      encoding,
      prefix: `fixed:${length}`,
      accuracy: acc,
      precision: prec,
      recall: rec,
      f1,
      auc,
      training_time: ttime,
      prediction_time: ptime,
      elapsed_total: etotal,
      row_count: ROW_COUNT,
    };
  });
}

function perPrefixSeries(): Record<string, Record<string, SeriesPoint[]>> {
  const byMetric: Record<string, Record<string, SeriesPoint[]>> = {};
  SERIES_METRICS.forEach((metric, column) => {
    const series: Record<string, SeriesPoint[]> = {};
    for (const entry of REPORT_TABLE) {
      const key = `${entry[0]}|${entry[1]}`;
      (series[key] ??= []).push([entry[2], entry[3 + column] as number]);
    }
    for (const points of Object.values(series)) points.sort((a, b) => a[0] - b[0]);
    byMetric[metric] = series;
  });
  return byMetric;
}

function normalized(values: number[], invert: boolean): number[] {
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  if (hi === lo) return values.map(() => 1);
  return values.map((v) => (invert ? (hi - v) / (hi - lo) : (v - lo) / (hi - lo)));
}

function radarPolygons(): Record<string, number[]> {
  // min-max per axis across the selected rows; time axis inverted so that
  // outward always means better
  const rows = comparisonRows();
  const axes = [...METRIC_NAMES, "elapsed_total"] as const;
  const byAxis = axes.map((axis) =>
    normalized(rows.map((row) => row[axis] as number), axis === "elapsed_total"));
  const polygons: Record<string, number[]> = {};
  rows.forEach((row, i) => {
    polygons[row.task_identity] = byAxis.map((axis) => axis[i] as number);
  });
  return polygons;
}

export const COMPARISON_8: ComparisonDoc = {
  family: "classification",
  rows: comparisonRows(),
  per_prefix_series: perPrefixSeries(),
  radar: {
    metrics: [...METRIC_NAMES, "elapsed_total"],
    polygons: radarPolygons(),
  },
  bubble: {
    algorithm: comparisonRows().map((row) => ({
      x: row.auc as number,
      y: row.f1 as number,
      size: row.elapsed_total as number,
      label: row.task_identity,
      group: row.algorithm,
    })),
    encoding: comparisonRows().map((row) => ({
      x: row.auc as number,
      y: row.f1 as number,
      size: row.elapsed_total as number,
      label: row.task_identity,
      group: row.encoding,
    })),
  },
};

// ---- explanations --------------------------------------------------------

export const EVENT_EXPLANATION: EventExplanation = {
  level: "event",
  attribution: {
    feature_names: ["pos_1", "pos_2", "age"],
    values: [0.0518, -0.2146, 0.1327],
    base_value: 0.5224,
    instance_output: 0.4923,
  },
  display: ["pos_1=register", "pos_2=triage", "age=61"],
};

export const TRACE_EXPLANATION: TraceExplanation = {
  level: "trace",
  prefix_lengths: [1, 2, 3, 4, 5],
  series: {
    "Age=20": [0.0812, 0.0812, 0.0734, 0.0691, 0.0655],
    "Weight=50": [-0.0403, -0.0377, -0.0377, -0.0412, -0.0389],
    "Rehabilitation Prescription=false": [0.2954, 0.3128, 0.3128, 0.3355, 0.3411],
  },
};

export const SINGLE_PREFIX_TRACE: TraceExplanation = {
  level: "trace",
  prefix_lengths: [3],
  series: {
    "Age=20": [0.0734],
    "Weight=50": [-0.0377],
  },
};

export const LOG_EXPLANATION: LogExplanation = {
  level: "log",
  feature: "pos_2",
  groups: [
    { value: "triage_fast", mean_output: 0.9173, count: 13 },
    { value: "triage_slow", mean_output: 0.1872, count: 17 },
  ],
};
