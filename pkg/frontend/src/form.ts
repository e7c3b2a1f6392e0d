import { ApiError, GatewayClient, NetworkError } from "./api.js";
import { clear, el } from "./dom.js";
import type { JobDoc, SplitRecord, TrainingRequestDoc } from "./types.js";

// The training form. Field layout follows the request document: one widget
// group per axis, label and search settings below, submit at the end.

export const PREDICTION_METHODS = ["outcome", "numeric", "next_activity"] as const;

export const METHOD_LABEL_KINDS: Record<string, string[]> = {
  outcome: ["categorical_attribute", "duration_binary", "numeric_attribute_binary"],
  numeric: ["remaining_time", "duration_value", "numeric_attribute_value"],
  next_activity: ["next_activity"],
};

export const ALGORITHMS = [
  "decision_tree",
  "random_forest",
  "gradient_boosted_trees",
  "linear_sgd",
  "knn",
] as const;

export const ENCODINGS = ["boolean", "simple_index", "complex_index"] as const;

const BINARY_KINDS = new Set(["duration_binary", "numeric_attribute_binary"]);
const ATTRIBUTE_KINDS = new Set([
  "categorical_attribute",
  "numeric_attribute_binary",
  "numeric_attribute_value",
]);

export interface FieldError {
  field: string;
  message: string;
}

interface FormOptions {
  splits: SplitRecord[];
  onSubmitted?: (jobs: JobDoc[]) => void;
}

function checkboxGroup(name: string, values: readonly string[]): HTMLElement {
  const group = el("div", { class: "checkbox-group", "data-field": name });
  for (const value of values) {
    const input = el("input", { type: "checkbox", value, name });
    group.append(el("label", { class: "checkbox" }, input, value));
  }
  return group;
}

function checkedValues(group: HTMLElement): string[] {
  return [...group.querySelectorAll<HTMLInputElement>("input:checked")].map((i) => i.value);
}

export class TrainingForm {
  readonly root: HTMLElement;

  private readonly client: GatewayClient;
  private readonly onSubmitted?: (jobs: JobDoc[]) => void;

  private splitSelect!: HTMLSelectElement;
  private methodSelect!: HTMLSelectElement;
  private labelKindSelect!: HTMLSelectElement;
  private attributeInput!: HTMLInputElement;
  private thresholdSelect!: HTMLSelectElement;
  private thresholdValueInput!: HTMLInputElement;
  private algorithmsGroup!: HTMLElement;
  private encodingsGroup!: HTMLElement;
  private prefixLengthsInput!: HTMLInputElement;
  private prefixModeSelect!: HTMLSelectElement;
  private shortTracesSelect!: HTMLSelectElement;
  private optimMethodSelect!: HTMLSelectElement;
  private budgetInput!: HTMLInputElement;
  private metricInput!: HTMLInputElement;
  private validationFractionInput!: HTMLInputElement;
  private seedInput!: HTMLInputElement;
  private intercaseInput!: HTMLInputElement;
  private submitButton!: HTMLButtonElement;
  private expansionNote!: HTMLElement;
  private banner!: HTMLElement;
  private statusArea!: HTMLElement;

  constructor(client: GatewayClient, options: FormOptions) {
    this.client = client;
    this.onSubmitted = options.onSubmitted;
    this.root = this.build(options.splits);
    this.refresh();
  }

  private field(name: string, label: string, widget: HTMLElement): HTMLElement {
    return el(
      "div",
      { class: "field", "data-field": name },
      el("label", { class: "field-label" }, label),
      widget,
      el("div", { class: "field-error", "data-field": name }),
    );
  }

  private build(splits: SplitRecord[]): HTMLElement {
    this.splitSelect = el("select", { name: "split_key" });
    for (const split of splits) {
      this.splitSelect.append(el("option", { value: split.split_key },
        `${split.name} (${split.train_traces}/${split.test_traces})`));
    }

    this.methodSelect = el("select", { name: "prediction_method" });
    for (const method of PREDICTION_METHODS) {
      this.methodSelect.append(el("option", { value: method }, method));
    }

    this.labelKindSelect = el("select", { name: "label_kind" });
    this.attributeInput = el("input", { type: "text", name: "label_attribute", placeholder: "attribute name" });
    this.thresholdSelect = el("select", { name: "label_threshold" });
    for (const choice of ["log_mean", "custom"]) {
      this.thresholdSelect.append(el("option", { value: choice }, choice));
    }
    this.thresholdValueInput = el("input", {
      type: "number", name: "label_threshold_value", step: "any", placeholder: "threshold",
    });

    this.algorithmsGroup = checkboxGroup("algorithms", ALGORITHMS);
    this.encodingsGroup = checkboxGroup("encodings", ENCODINGS);

    this.prefixLengthsInput = el("input", {
      type: "text", name: "prefix_lengths", placeholder: "e.g. 2, 5, 8",
    });
    this.prefixModeSelect = el("select", { name: "prefix_mode" });
    for (const mode of ["fixed", "up_to"]) {
      this.prefixModeSelect.append(el("option", { value: mode }, mode));
    }
    this.shortTracesSelect = el("select", { name: "short_traces" });
    for (const policy of ["discard", "zero_pad"]) {
      this.shortTracesSelect.append(el("option", { value: policy }, policy));
    }

    this.optimMethodSelect = el("select", { name: "optim_method" });
    for (const method of ["none", "grid", "random"]) {
      this.optimMethodSelect.append(el("option", { value: method }, method));
    }
    this.budgetInput = el("input", { type: "number", name: "optim_budget", value: "10", min: "1" });
    this.metricInput = el("input", { type: "text", name: "optim_metric", placeholder: "default for task" });
    this.validationFractionInput = el("input", {
      type: "number", name: "optim_validation_fraction", value: "0.2", step: "0.05", min: "0.05", max: "0.95",
    });
    this.seedInput = el("input", { type: "number", name: "optim_seed", value: "0", min: "0" });
    this.intercaseInput = el("input", { type: "checkbox", name: "intercase" });

    this.submitButton = el("button", { class: "submit", type: "button", disabled: true }, "Submit");
    this.expansionNote = el("span", { class: "expansion-note" });
    this.banner = el("div", { class: "banner", hidden: true });
    this.statusArea = el("div", { class: "submitted" });

    const root = el(
      "form",
      { class: "training-form" },
      this.banner,
      this.field("split_key", "Split", this.splitSelect),
      this.field("prediction_method", "Prediction method", this.methodSelect),
      this.field("algorithms", "Algorithms", this.algorithmsGroup),
      this.field("encodings", "Encodings", this.encodingsGroup),
      this.field(
        "prefix_specs",
        "Prefix lengths",
        el("div", { class: "prefix-row" },
          this.prefixLengthsInput, this.prefixModeSelect, this.shortTracesSelect),
      ),
      this.field(
        "label",
        "Label",
        el("div", { class: "label-row" },
          this.labelKindSelect, this.attributeInput,
          this.thresholdSelect, this.thresholdValueInput),
      ),
      this.field(
        "optim",
        "Hyperparameter search",
        el("div", { class: "optim-row" },
          this.optimMethodSelect, this.budgetInput, this.metricInput,
          this.validationFractionInput, this.seedInput),
      ),
      this.field("intercase", "Intercase features", el("label", { class: "checkbox" },
        this.intercaseInput, "include open-case counts and event rates")),
      el("div", { class: "submit-row" }, this.submitButton, this.expansionNote),
      this.statusArea,
    );

    root.addEventListener("submit", (event) => event.preventDefault());
    root.addEventListener("input", () => this.refresh());
    root.addEventListener("change", () => this.refresh());
    this.submitButton.addEventListener("click", () => void this.submit());
    return root;
  }

  // ---- state -----------------------------------------------------------

  private prefixLengths(): number[] {
    return this.prefixLengthsInput.value
      .split(",")
      .map((part) => part.trim())
      .filter((part) => part.length > 0)
      .map((part) => Number(part));
  }

  private labelKind(): string {
    return this.labelKindSelect.value;
  }

  /** Rebuild dependent widgets and the submit gate after any edit. */
  private refresh(): void {
    const method = this.methodSelect.value;
    const kinds = METHOD_LABEL_KINDS[method] ?? [];
    const current = this.labelKindSelect.value;
    if (!kinds.includes(current)) {
      clear(this.labelKindSelect);
      for (const kind of kinds) {
        this.labelKindSelect.append(el("option", { value: kind }, kind));
      }
    }

    const kind = this.labelKind();
    this.attributeInput.hidden = !ATTRIBUTE_KINDS.has(kind);
    const binary = BINARY_KINDS.has(kind);
    this.thresholdSelect.hidden = !binary;
    this.thresholdValueInput.hidden = !binary || this.thresholdSelect.value !== "custom";

    const searching = this.optimMethodSelect.value !== "none";
    this.budgetInput.disabled = !searching;
    this.metricInput.disabled = !searching;
    this.validationFractionInput.disabled = !searching;
    this.seedInput.disabled = !searching;

    const nAlgorithms = checkedValues(this.algorithmsGroup).length;
    const nEncodings = checkedValues(this.encodingsGroup).length;
    const nPrefixes = this.prefixLengths().length;
    const count = nAlgorithms * nEncodings * nPrefixes;
    this.expansionNote.textContent = count > 0 ? `will create ${count} job${count === 1 ? "" : "s"}` : "";
    // axes must all be non-empty before submit is possible at all
    this.submitButton.disabled = count === 0 || !this.splitSelect.value;
  }

  validate(): FieldError[] {
    const errors: FieldError[] = [];
    if (!this.splitSelect.value) errors.push({ field: "split_key", message: "pick a split" });
    if (checkedValues(this.algorithmsGroup).length === 0) {
      errors.push({ field: "algorithms", message: "pick at least one algorithm" });
    }
    if (checkedValues(this.encodingsGroup).length === 0) {
      errors.push({ field: "encodings", message: "pick at least one encoding" });
    }
    const lengths = this.prefixLengths();
    if (lengths.length === 0) {
      errors.push({ field: "prefix_specs", message: "give at least one prefix length" });
    } else if (lengths.some((n) => !Number.isInteger(n) || n < 1)) {
      errors.push({ field: "prefix_specs", message: "prefix lengths must be positive integers" });
    }

    const kind = this.labelKind();
    if (ATTRIBUTE_KINDS.has(kind) && !this.attributeInput.value.trim()) {
      errors.push({ field: "label", message: "this label kind needs an attribute name" });
    }
    if (BINARY_KINDS.has(kind) && this.thresholdSelect.value === "custom") {
      const raw = this.thresholdValueInput.value.trim();
      if (raw === "" || Number.isNaN(Number(raw))) {
        errors.push({ field: "label", message: "a custom threshold needs a numeric value" });
      }
    }

    if (this.optimMethodSelect.value !== "none") {
      const budget = Number(this.budgetInput.value);
      if (!Number.isInteger(budget) || budget < 1) {
        errors.push({ field: "optim", message: "budget must be a positive integer" });
      }
    }
    return errors;
  }

  buildRequest(): TrainingRequestDoc {
    const kind = this.labelKind();
    const binary = BINARY_KINDS.has(kind);
    const request: TrainingRequestDoc = {
      split_key: this.splitSelect.value,
      prediction_method: this.methodSelect.value,
      algorithms: checkedValues(this.algorithmsGroup),
      encodings: checkedValues(this.encodingsGroup),
      prefix_specs: this.prefixLengths().map((length) => ({
        mode: this.prefixModeSelect.value,
        length,
        short_traces: this.shortTracesSelect.value,
      })),
      label: {
        kind,
        attribute: ATTRIBUTE_KINDS.has(kind) ? this.attributeInput.value.trim() : null,
        threshold: binary ? this.thresholdSelect.value : null,
        threshold_value:
          binary && this.thresholdSelect.value === "custom"
            ? Number(this.thresholdValueInput.value)
            : null,
      },
    };
    if (this.optimMethodSelect.value !== "none") {
      request.optim = {
        method: this.optimMethodSelect.value,
        budget: Number(this.budgetInput.value),
        metric: this.metricInput.value.trim() || null,
        validation_fraction: Number(this.validationFractionInput.value),
        seed: Number(this.seedInput.value),
      };
    }
    if (this.intercaseInput.checked) request.intercase = true;
    return request;
  }

  // ---- rendering of outcomes --------------------------------------------

  private clearMessages(): void {
    this.banner.hidden = true;
    this.banner.textContent = "";
    this.banner.classList.remove("error");
    for (const slot of this.root.querySelectorAll(".field-error")) slot.textContent = "";
  }

  private showFieldErrors(errors: FieldError[]): void {
    for (const { field, message } of errors) {
      const slot = this.root.querySelector<HTMLElement>(`.field-error[data-field="${field}"]`);
      if (slot) slot.textContent = message;
    }
  }

  /** Best-effort mapping of a gateway message onto the widget it concerns. */
  private fieldForMessage(message: string): string {
    const text = message.toLowerCase();
    if (text.includes("algorithm")) return "algorithms";
    if (text.includes("encoding")) return "encodings";
    if (text.includes("prefix")) return "prefix_specs";
    if (text.includes("threshold") || text.includes("label") || text.includes("attribute")) return "label";
    if (text.includes("split")) return "split_key";
    if (text.includes("budget") || text.includes("metric") || text.includes("optim")) return "optim";
    return "split_key";
  }

  private showBanner(message: string): void {
    this.banner.textContent = message;
    this.banner.classList.add("error");
    this.banner.hidden = false;
  }

  async submit(): Promise<void> {
    this.clearMessages();
    const errors = this.validate();
    if (errors.length > 0) {
      this.showFieldErrors(errors);
      return;
    }
    this.submitButton.disabled = true;
    try {
      const response = await this.client.submitTraining(this.buildRequest());
      const jobs = response.jobs;
      clear(this.statusArea);
      this.statusArea.append(
        el("p", { class: "submit-summary" }, `created ${jobs.length} job${jobs.length === 1 ? "" : "s"}`),
        el("ul", { class: "job-ids" },
          ...jobs.map((job) => el("li", { class: "job-id", "data-job-id": job.id }, job.id))),
      );
      this.onSubmitted?.(jobs);
    } catch (error) {
      if (error instanceof ApiError) {
        this.showFieldErrors([{ field: this.fieldForMessage(error.message), message: error.message }]);
      } else if (error instanceof NetworkError) {
        // form state is untouched so the user can retry as-is
        this.showBanner("the gateway is unreachable; nothing was submitted");
      } else {
        throw error;
      }
    } finally {
      this.refresh();
    }
  }
}
