import type { GatewayClient } from "./api.js";
import { clear, el } from "./dom.js";
import { LatestGate } from "./seq.js";
import type { JobDoc } from "./types.js";

const TERMINAL = new Set(["completed", "error"]);

function identityOf(job: JobDoc): string {
  const config = job.config;
  const prefix = `${config.prefix.mode}:${config.prefix.length}`;
  return `${config.model.algorithm}|${config.encoding.method}|${prefix}`;
}

/**
 * Live job table. Pulls the job list on an interval and stops by itself
 * once everything it watches is terminal. Pull, not push: the gateway
 * stays stateless and the panel owns its refresh cadence.
 */
export class JobsPanel {
  readonly root: HTMLElement;

  private readonly client: GatewayClient;
  private readonly pollMs: number;
  private readonly gate = new LatestGate();
  private watched: Set<string> | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(client: GatewayClient, pollMs = 1500) {
    this.client = client;
    this.pollMs = pollMs;
    this.root = el("div", { class: "jobs-panel" },
      el("div", { class: "jobs-summary" }),
      el("table", { class: "jobs-table" },
        el("thead", {}, el("tr", {},
          el("th", {}, "job"), el("th", {}, "task"), el("th", {}, "status"), el("th", {}, "detail"))),
        el("tbody", {})),
    );
  }

  /** Watch a specific set of ids (after a submit), or everything when null. */
  start(ids: string[] | null = null): void {
    this.watched = ids ? new Set(ids) : null;
    this.stop();
    void this.tick();
    this.timer = setInterval(() => void this.tick(), this.pollMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async tick(): Promise<void> {
    const ticket = this.gate.next();
    let jobs: JobDoc[];
    try {
      jobs = await this.client.listJobs();
    } catch {
      return; // transient fetch problem: keep the last rendering, retry on the next tick
    }
    if (!this.gate.isCurrent(ticket)) return;

    const shown = this.watched ? jobs.filter((j) => this.watched!.has(j.id)) : jobs;
    this.render(shown);
    if (shown.length > 0 && shown.every((j) => TERMINAL.has(j.status))) this.stop();
  }

  private render(jobs: JobDoc[]): void {
    const summary = this.root.querySelector(".jobs-summary") as HTMLElement;
    const counts = new Map<string, number>();
    for (const job of jobs) counts.set(job.status, (counts.get(job.status) ?? 0) + 1);
    summary.textContent = [...counts.entries()].map(([s, n]) => `${s}: ${n}`).join("  ") || "no jobs";

    const body = this.root.querySelector("tbody") as HTMLElement;
    clear(body);
    for (const job of jobs) {
      body.append(el("tr", { class: `job status-${job.status}`, "data-job-id": job.id },
        el("td", { class: "mono" }, job.id),
        el("td", {}, identityOf(job)),
        el("td", {}, el("span", { class: `status-chip ${job.status}` }, job.status)),
        el("td", { class: "detail" }, job.error_detail ?? ""),
      ));
    }
  }
}
