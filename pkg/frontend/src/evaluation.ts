import type { GatewayClient } from "./api.js";
import { bubbleChart, lineChart, radarChart } from "./charts.js";
import { clear, el, numberCell } from "./dom.js";
import { LatestGate } from "./seq.js";
import type { ComparisonDoc, ComparisonRow, ResultRow } from "./types.js";

const IDENTITY_COLUMNS = ["task_identity", "algorithm", "encoding", "prefix"];

function columnsOf(rows: ComparisonRow[]): string[] {
  const first = rows[0];
  if (!first) return IDENTITY_COLUMNS;
  // column order comes straight from the payload row, identity first
  return Object.keys(first);
}

type SortState = { column: string; direction: 1 | -1 } | null;

function sortRows(rows: ComparisonRow[], sort: SortState): ComparisonRow[] {
  if (!sort) return rows.slice();
  const { column, direction } = sort;
  return rows.slice().sort((a, b) => {
    const va = a[column];
    const vb = b[column];
    if (va == null && vb == null) return 0;
    if (va == null) return 1; // nulls sink regardless of direction
    if (vb == null) return -1;
    if (typeof va === "number" && typeof vb === "number") {
      return (va - vb) * direction;
    }
    return String(va).localeCompare(String(vb)) * direction;
  });
}

/**
 * Result browsing: pick stored reports, then compare them through the
 * table, per-prefix, radar, and bubble sections. All numbers come from
 * one comparison payload; this page only lays them out.
 */
export class EvaluationPage {
  readonly root: HTMLElement;

  private readonly client: GatewayClient;
  private readonly gate = new LatestGate();
  private results: ResultRow[] = [];
  private comparison: ComparisonDoc | null = null;
  private selectedIds: string[] = [];
  private sort: SortState = null;

  constructor(client: GatewayClient, preselected: string[] = []) {
    this.client = client;
    this.selectedIds = preselected;
    this.root = el("div", { class: "evaluation-page" },
      el("section", { class: "selection" },
        el("h2", {}, "Stored reports"),
        el("div", { class: "selection-error" }),
        el("div", { class: "selection-list" }),
        el("button", { class: "render", type: "button", disabled: true }, "Compare"),
      ),
      el("section", { class: "comparison", hidden: true },
        el("div", { class: "section result-table" },
          el("h2", {}, "Result"),
          el("a", { class: "export", download: "comparison.csv" }, "Export CSV"),
          el("div", { class: "table-holder" })),
        el("div", { class: "section per-prefix" },
          el("h2", {}, "Prefix length"),
          el("label", {}, "metric ", el("select", { class: "metric-select" })),
          el("div", { class: "chart-holder" })),
        el("div", { class: "section radar" },
          el("h2", {}, "Radar"),
          el("div", { class: "chart-holder" })),
        el("div", { class: "section bubbles" },
          el("h2", {}, "Bubble chart"),
          el("div", { class: "chart-holder" })),
      ),
    );
    const renderButton = this.root.querySelector(".render") as HTMLButtonElement;
    renderButton.addEventListener("click", () => void this.renderComparison());
  }

  selected(): string[] {
    return this.selectedIds.slice();
  }

  async load(): Promise<void> {
    const ticket = this.gate.next();
    const rows = await this.client.listResults();
    if (!this.gate.isCurrent(ticket)) return;
    this.results = rows;
    this.selectedIds = this.selectedIds.filter((id) => rows.some((r) => r.id === id));
    this.renderSelection();
    if (this.selectedIds.length > 0) await this.renderComparison();
  }

  private familyOf(id: string): string | undefined {
    return this.results.find((r) => r.id === id)?.family;
  }

  private renderSelection(): void {
    const list = this.root.querySelector(".selection-list") as HTMLElement;
    const errorSlot = this.root.querySelector(".selection-error") as HTMLElement;
    const renderButton = this.root.querySelector(".render") as HTMLButtonElement;
    clear(list);

    for (const row of this.results) {
      const input = el("input", { type: "checkbox", value: row.id });
      input.checked = this.selectedIds.includes(row.id);
      input.addEventListener("change", () => {
        errorSlot.textContent = "";
        if (input.checked) {
          const families = new Set(this.selectedIds.map((id) => this.familyOf(id)));
          families.add(row.family);
          if (families.size > 1) {
            // one task family per comparison: mixed metrics have no shared table
            input.checked = false;
            errorSlot.textContent = "pick reports from a single task family";
            return;
          }
          this.selectedIds.push(row.id);
        } else {
          this.selectedIds = this.selectedIds.filter((id) => id !== row.id);
        }
        renderButton.disabled = this.selectedIds.length === 0;
      });
      list.append(el("label", { class: "selection-row", "data-result-id": row.id },
        input,
        el("span", { class: "identity" }, row.task_identity),
        el("span", { class: "family" }, row.family),
      ));
    }
    renderButton.disabled = this.selectedIds.length === 0;
  }

  async renderComparison(): Promise<void> {
    if (this.selectedIds.length === 0) return;
    const ticket = this.gate.next();
    const doc = await this.client.comparison(this.selectedIds);
    if (!this.gate.isCurrent(ticket)) return;
    this.comparison = doc;
    this.sort = null;

    (this.root.querySelector(".comparison") as HTMLElement).hidden = false;
    const exportLink = this.root.querySelector(".export") as HTMLAnchorElement;
    exportLink.href = this.client.exportCsvUrl(this.selectedIds);

    this.renderTable();
    this.renderPerPrefix();
    this.renderRadar();
    this.renderBubbles();
  }

  private renderTable(): void {
    const doc = this.comparison;
    if (!doc) return;
    const holder = this.root.querySelector(".result-table .table-holder") as HTMLElement;
    clear(holder);

    const columns = columnsOf(doc.rows);
    const head = el("tr", {});
    for (const column of columns) {
      const th = el("th", { "data-column": column, tabindex: "0" }, column);
      if (this.sort?.column === column) {
        th.classList.add(this.sort.direction === 1 ? "asc" : "desc");
      }
      th.addEventListener("click", () => this.sortBy(column));
      head.append(th);
    }

    const body = el("tbody", {});
    for (const row of sortRows(doc.rows, this.sort)) {
      const tr = el("tr", { "data-identity": row.task_identity });
      for (const column of columns) {
        const value = row[column];
        if (typeof value === "number" || value === null) {
          tr.append(numberCell(value));
        } else {
          tr.append(el("td", {}, String(value ?? "")));
        }
      }
      body.append(tr);
    }

    holder.append(el("table", { class: "comparison-table" }, el("thead", {}, head), body));
  }

  private sortBy(column: string): void {
    const numeric = this.comparison?.rows.some((r) => typeof r[column] === "number") ?? false;
    if (this.sort?.column === column) {
      this.sort = { column, direction: this.sort.direction === 1 ? -1 : 1 };
    } else {
      // metrics start from the best value, identity columns from the top
      this.sort = { column, direction: numeric ? -1 : 1 };
    }
    this.renderTable();
  }

  private renderPerPrefix(): void {
    const doc = this.comparison;
    if (!doc) return;
    const select = this.root.querySelector(".metric-select") as HTMLSelectElement;
    const metrics = Object.keys(doc.per_prefix_series);
    const previous = select.value;
    clear(select);
    for (const metric of metrics) select.append(el("option", { value: metric }, metric));
    const fallback = doc.family === "classification" ? "auc" : "mae";
    select.value = metrics.includes(previous) ? previous :
      metrics.includes(fallback) ? fallback : (metrics[0] ?? "");
    select.onchange = () => this.renderPerPrefixChart();
    this.renderPerPrefixChart();
  }

  private renderPerPrefixChart(): void {
    const doc = this.comparison;
    if (!doc) return;
    const select = this.root.querySelector(".metric-select") as HTMLSelectElement;
    const holder = this.root.querySelector(".per-prefix .chart-holder") as HTMLElement;
    clear(holder);
    const metricSeries = doc.per_prefix_series[select.value] ?? {};
    const series = Object.entries(metricSeries).map(([name, points]) => ({ name, points }));
    holder.append(lineChart(series, { xLabel: "prefix length", yLabel: select.value }));
  }

  private renderRadar(): void {
    const doc = this.comparison;
    if (!doc) return;
    const holder = this.root.querySelector(".radar .chart-holder") as HTMLElement;
    clear(holder);
    holder.append(radarChart(doc.radar));
  }

  private renderBubbles(): void {
    const doc = this.comparison;
    if (!doc) return;
    const section = this.root.querySelector(".bubbles") as HTMLElement;
    const holder = section.querySelector(".chart-holder") as HTMLElement;
    clear(holder);
    if (!doc.bubble) {
      section.hidden = true;
      return;
    }
    section.hidden = false;
    for (const [grouping, points] of Object.entries(doc.bubble)) {
      holder.append(el("div", { class: `bubble-holder by-${grouping}` },
        el("h3", {}, `by ${grouping}`),
        bubbleChart(points, { xLabel: "auc", yLabel: "f1" })));
    }
  }
}
