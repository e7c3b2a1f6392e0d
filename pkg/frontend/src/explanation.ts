import { ApiError, GatewayClient, NetworkError } from "./api.js";
import { groupBars, lineChart, signedBars } from "./charts.js";
import { clear, el, fmt } from "./dom.js";
import { LatestGate } from "./seq.js";
import type { ExplanationDoc, ExplanationRequest } from "./types.js";

/**
 * Explanation explorer: event level shows signed per-feature bars for one
 * prediction, trace level shows each feature's attribution as the prefix
 * grows, log level shows mean model output per value of one feature.
 */
export class ExplanationPage {
  readonly root: HTMLElement;

  private readonly client: GatewayClient;
  private readonly gate = new LatestGate();

  private levelSelect!: HTMLSelectElement;
  private modelInput!: HTMLInputElement;
  private traceInput!: HTMLInputElement;
  private featureInput!: HTMLInputElement;
  private plotHolder!: HTMLElement;
  private errorSlot!: HTMLElement;

  constructor(client: GatewayClient) {
    this.client = client;

    this.levelSelect = el("select", { name: "level" });
    for (const level of ["event", "trace", "log"]) {
      this.levelSelect.append(el("option", { value: level }, level));
    }
    this.modelInput = el("input", { type: "text", name: "model", placeholder: "model fingerprint" });
    this.traceInput = el("input", { type: "text", name: "trace_id", placeholder: "trace id" });
    this.featureInput = el("input", { type: "text", name: "feature", placeholder: "feature name" });
    this.plotHolder = el("div", { class: "plot-holder" });
    this.errorSlot = el("div", { class: "explain-error" });

    const fetchButton = el("button", { class: "fetch", type: "button" }, "Explain");
    fetchButton.addEventListener("click", () => void this.fetch());
    this.levelSelect.addEventListener("change", () => this.refresh());

    this.root = el("div", { class: "explanation-page" },
      el("div", { class: "explain-form" },
        el("label", {}, "level ", this.levelSelect),
        el("label", {}, "model ", this.modelInput),
        el("label", { class: "trace-field" }, "trace ", this.traceInput),
        el("label", { class: "feature-field" }, "feature ", this.featureInput),
        fetchButton,
      ),
      this.errorSlot,
      this.plotHolder,
    );
    this.refresh();
  }

  private refresh(): void {
    const level = this.levelSelect.value;
    (this.root.querySelector(".trace-field") as HTMLElement).hidden = level === "log";
    (this.root.querySelector(".feature-field") as HTMLElement).hidden = level !== "log";
  }

  buildRequest(): ExplanationRequest {
    const level = this.levelSelect.value as ExplanationRequest["level"];
    const request: ExplanationRequest = { level, model: this.modelInput.value.trim() };
    if (level === "log") {
      request.feature = this.featureInput.value.trim();
    } else {
      request.trace_id = this.traceInput.value.trim();
    }
    return request;
  }

  async fetch(): Promise<void> {
    this.errorSlot.textContent = "";
    const request = this.buildRequest();
    if (!request.model) {
      this.errorSlot.textContent = "a model fingerprint is required";
      return;
    }
    const ticket = this.gate.next();
    let doc: ExplanationDoc;
    try {
      doc = await this.client.explain(request);
    } catch (error) {
      if (error instanceof ApiError || error instanceof NetworkError) {
        this.errorSlot.textContent = error.message;
        return;
      }
      throw error;
    }
    if (!this.gate.isCurrent(ticket)) return;
    this.render(doc);
  }

  render(doc: ExplanationDoc): void {
    clear(this.plotHolder);
    switch (doc.level) {
      case "event": {
        if (doc.attribution.feature_names.length === 0) {
          this.renderPlaceholder();
          return;
        }
        // label each bar with the concrete value the feature took
        const labels = doc.display.length === doc.attribution.feature_names.length
          ? doc.display
          : doc.attribution.feature_names;
        this.plotHolder.append(
          el("p", { class: "attribution-summary" },
            `base ${fmt(doc.attribution.base_value)} to output ${fmt(doc.attribution.instance_output)}`),
          signedBars(labels, doc.attribution.values),
        );
        return;
      }
      case "trace": {
        const names = Object.keys(doc.series);
        if (names.length === 0 || doc.prefix_lengths.length === 0) {
          this.renderPlaceholder();
          return;
        }
        const series = names.map((name) => ({
          name,
          points: doc.prefix_lengths.map((k, i) => [k, doc.series[name]?.[i] ?? null] as [number, number | null]),
        }));
        this.plotHolder.append(lineChart(series, { xLabel: "prefix length", yLabel: "attribution" }));
        return;
      }
      case "log": {
        if (doc.groups.length === 0) {
          this.renderPlaceholder();
          return;
        }
        this.plotHolder.append(
          el("p", { class: "log-summary" }, `mean model output by value of ${doc.feature}`),
          groupBars(doc.groups),
        );
        return;
      }
    }
  }

  private renderPlaceholder(): void {
    this.plotHolder.append(el("p", { class: "placeholder" }, "nothing to plot for this selection"));
  }
}
