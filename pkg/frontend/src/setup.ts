import { ApiError, GatewayClient, NetworkError } from "./api.js";
import { clear, el, fmt } from "./dom.js";
import { LatestGate } from "./seq.js";
import type { LogSummary, SplitRecord } from "./types.js";

/** Upload logs, inspect their stats, and cut train/test splits. */
export class SetupPage {
  readonly root: HTMLElement;

  private readonly client: GatewayClient;
  private readonly gate = new LatestGate();
  private logs: LogSummary[] = [];
  private splits: SplitRecord[] = [];

  constructor(client: GatewayClient) {
    this.client = client;
    this.root = el("div", { class: "setup-page" },
      el("section", { class: "logs" },
        el("h2", {}, "Event logs"),
        el("div", { class: "upload-row" },
          el("input", { type: "file", accept: ".xes,.xml" }),
          el("button", { class: "upload", type: "button" }, "Upload"),
          el("span", { class: "upload-status" })),
        el("table", { class: "logs-table" },
          el("thead", {}, el("tr", {},
            el("th", {}, "name"), el("th", {}, "traces"),
            el("th", {}, "events"), el("th", {}, "id"))),
          el("tbody", {})),
        el("div", { class: "log-stats" })),
      el("section", { class: "splits" },
        el("h2", {}, "Splits"),
        el("div", { class: "split-form" },
          el("select", { class: "split-log" }),
          el("input", { class: "split-name", type: "text", placeholder: "split name" }),
          el("input", { class: "split-fraction", type: "number", value: "0.75", step: "0.05", min: "0.05", max: "0.95" }),
          el("button", { class: "create-split", type: "button" }, "Create split"),
          el("span", { class: "split-error" })),
        el("table", { class: "splits-table" },
          el("thead", {}, el("tr", {},
            el("th", {}, "name"), el("th", {}, "train"),
            el("th", {}, "test"), el("th", {}, "key"))),
          el("tbody", {}))),
    );

    (this.root.querySelector(".upload") as HTMLButtonElement)
      .addEventListener("click", () => void this.upload());
    (this.root.querySelector(".create-split") as HTMLButtonElement)
      .addEventListener("click", () => void this.createSplit());
  }

  async load(): Promise<void> {
    const ticket = this.gate.next();
    const [logs, splits] = await Promise.all([this.client.listLogs(), this.client.listSplits()]);
    if (!this.gate.isCurrent(ticket)) return;
    this.logs = logs;
    this.splits = splits;
    this.render();
  }

  private render(): void {
    const logsBody = this.root.querySelector(".logs-table tbody") as HTMLElement;
    clear(logsBody);
    for (const log of this.logs) {
      const row = el("tr", { "data-log-id": log.id },
        el("td", {}, log.name),
        el("td", { class: "num" }, String(log.trace_count)),
        el("td", { class: "num" }, String(log.event_count)),
        el("td", { class: "mono" }, log.id.slice(0, 12)));
      row.addEventListener("click", () => void this.showStats(log.id));
      logsBody.append(row);
    }

    const logSelect = this.root.querySelector(".split-log") as HTMLSelectElement;
    clear(logSelect);
    for (const log of this.logs) {
      logSelect.append(el("option", { value: log.id }, log.name));
    }

    const splitsBody = this.root.querySelector(".splits-table tbody") as HTMLElement;
    clear(splitsBody);
    for (const split of this.splits) {
      splitsBody.append(el("tr", { "data-split-key": split.split_key },
        el("td", {}, split.name),
        el("td", { class: "num" }, String(split.train_traces)),
        el("td", { class: "num" }, String(split.test_traces)),
        el("td", { class: "mono" }, split.split_key.slice(0, 12))));
    }
  }

  private async showStats(id: string): Promise<void> {
    const holder = this.root.querySelector(".log-stats") as HTMLElement;
    const stats = await this.client.logStats(id);
    clear(holder);
    holder.append(
      el("h3", {}, "Log profile"),
      el("p", {},
        `${stats.trace_count} traces, ${stats.event_count} events, ` +
        `${stats.event_classes.length} activities, trace length ` +
        `${stats.trace_length.min} to ${stats.trace_length.max} ` +
        `(mean ${fmt(stats.trace_length.mean, 1)})`),
      el("p", { class: "mono" }, stats.event_classes.join(", ")),
    );
  }

  private async upload(): Promise<void> {
    const fileInput = this.root.querySelector<HTMLInputElement>(".upload-row input[type=file]");
    const status = this.root.querySelector(".upload-status") as HTMLElement;
    const file = fileInput?.files?.[0];
    if (!file) {
      status.textContent = "choose an XES file first";
      return;
    }
    status.textContent = "uploading";
    try {
      const uploaded = await this.client.uploadLog(file);
      status.textContent = `stored ${uploaded.name} (${uploaded.trace_count} traces)`;
      await this.load();
    } catch (error) {
      if (error instanceof ApiError || error instanceof NetworkError) {
        status.textContent = error.message;
        return;
      }
      throw error;
    }
  }

  private async createSplit(): Promise<void> {
    const logSelect = this.root.querySelector(".split-log") as HTMLSelectElement;
    const nameInput = this.root.querySelector(".split-name") as HTMLInputElement;
    const fractionInput = this.root.querySelector(".split-fraction") as HTMLInputElement;
    const errorSlot = this.root.querySelector(".split-error") as HTMLElement;
    errorSlot.textContent = "";
    if (!logSelect.value || !nameInput.value.trim()) {
      errorSlot.textContent = "pick a log and name the split";
      return;
    }
    try {
      await this.client.createSplit({
        log_ref: logSelect.value,
        name: nameInput.value.trim(),
        train_fraction: Number(fractionInput.value),
      });
      await this.load();
    } catch (error) {
      if (error instanceof ApiError || error instanceof NetworkError) {
        errorSlot.textContent = error.message;
        return;
      }
      throw error;
    }
  }
}
