import { el, fmt, svgEl } from "./dom.js";
import type { BubblePoint, LogExplanationGroup, SeriesPoint } from "./types.js";

// Hand-rolled SVG charts. Every datum carries its exact payload value in
// data-* attributes; coordinates are the only derived numbers.

export interface ChartSeries {
  name: string;
  points: SeriesPoint[];
}

const PALETTE = [
  "#2563eb", "#dc2626", "#059669", "#d97706", "#7c3aed",
  "#0891b2", "#db2777", "#65a30d", "#9333ea", "#ea580c",
];

export function seriesColor(index: number): string {
  return PALETTE[index % PALETTE.length] as string;
}

/** Linear scale with a degenerate-domain guard: a flat domain maps to the range midpoint. */
export function linearScale(
  d0: number,
  d1: number,
  r0: number,
  r1: number,
): (v: number) => number {
  const span = d1 - d0;
  if (span === 0) return () => (r0 + r1) / 2;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

// ---- shared interaction state ------------------------------------------
//
// Hovering a legend entry (or a series) focuses it: the chart root gets
// data-focus and the series gets .focus, everything else dims via CSS.
// Clicking a legend entry toggles the series off and on. All of it is
// classwork on the rendered nodes; the fetched data is never touched.

function seriesNodes(root: HTMLElement, name: string): Element[] {
  const matches: Element[] = [];
  for (const node of root.querySelectorAll("[data-series]")) {
    if ((node as HTMLElement | SVGElement).getAttribute("data-series") === name) {
      matches.push(node);
    }
  }
  return matches;
}

function attachSeriesInteractions(root: HTMLElement): void {
  const focus = (name: string | null) => {
    if (name === null) {
      root.removeAttribute("data-focus");
    } else {
      root.setAttribute("data-focus", name);
    }
    for (const node of root.querySelectorAll("[data-series]")) {
      node.classList.toggle(
        "focus",
        name !== null && node.getAttribute("data-series") === name,
      );
    }
  };

  for (const item of root.querySelectorAll<HTMLElement>(".legend-item")) {
    const name = item.dataset.series ?? "";
    item.addEventListener("mouseenter", () => focus(name));
    item.addEventListener("mouseleave", () => focus(null));
    item.addEventListener("click", () => {
      const off = item.classList.toggle("off");
      item.setAttribute("aria-pressed", String(off));
      for (const node of seriesNodes(root, name)) {
        if (node !== item) node.classList.toggle("hidden", off);
      }
    });
  }

  for (const group of root.querySelectorAll<SVGElement>("g.series")) {
    const name = group.getAttribute("data-series") ?? "";
    group.addEventListener("mouseenter", () => focus(name));
    group.addEventListener("mouseleave", () => focus(null));
  }
}

function legendFor(names: string[]): HTMLElement {
  const legend = el("div", { class: "legend" });
  names.forEach((name, i) => {
    const item = el(
      "button",
      { class: "legend-item", type: "button", "aria-pressed": "false" },
      el("span", { class: "swatch" }),
      name,
    );
    item.dataset.series = name;
    (item.querySelector(".swatch") as HTMLElement).style.background = seriesColor(i);
    legend.append(item);
  });
  return legend;
}

// ---- line chart ---------------------------------------------------------

export interface LineChartOptions {
  width?: number;
  height?: number;
  xLabel?: string;
  yLabel?: string;
}

export function lineChart(series: ChartSeries[], opts: LineChartOptions = {}): HTMLElement {
  const width = opts.width ?? 560;
  const height = opts.height ?? 300;
  const margin = { top: 16, right: 16, bottom: 36, left: 52 };

  const xs: number[] = [];
  const ys: number[] = [];
  for (const s of series) {
    for (const [x, y] of s.points) {
      xs.push(x);
      if (y != null) ys.push(y);
    }
  }
  const xMin = xs.length ? Math.min(...xs) : 0;
  const xMax = xs.length ? Math.max(...xs) : 1;
  const yMin = ys.length ? Math.min(...ys) : 0;
  const yMax = ys.length ? Math.max(...ys) : 1;

  const sx = linearScale(xMin, xMax, margin.left, width - margin.right);
  const sy = linearScale(yMin, yMax, height - margin.bottom, margin.top);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width),
    height: String(height),
    role: "img",
  });

  svg.append(
    svgEl("line", {
      class: "axis",
      x1: String(margin.left), y1: String(height - margin.bottom),
      x2: String(width - margin.right), y2: String(height - margin.bottom),
    }),
    svgEl("line", {
      class: "axis",
      x1: String(margin.left), y1: String(margin.top),
      x2: String(margin.left), y2: String(height - margin.bottom),
    }),
  );

  const xTicks = [...new Set(xs)].sort((a, b) => a - b);
  for (const tick of xTicks) {
    svg.append(svgEl("text", {
      class: "tick",
      x: String(sx(tick)), y: String(height - margin.bottom + 16),
      "text-anchor": "middle",
    }, String(tick)));
  }
  const ySteps = 4;
  for (let i = 0; i <= ySteps; i++) {
    const v = yMin + ((yMax - yMin) * i) / ySteps;
    svg.append(svgEl("text", {
      class: "tick",
      x: String(margin.left - 6), y: String(sy(v) + 4),
      "text-anchor": "end",
    }, fmt(v, 2)));
  }
  if (opts.xLabel) {
    svg.append(svgEl("text", {
      class: "axis-label",
      x: String((margin.left + width - margin.right) / 2),
      y: String(height - 4), "text-anchor": "middle",
    }, opts.xLabel));
  }
  if (opts.yLabel) {
    svg.append(svgEl("text", {
      class: "axis-label",
      x: "14", y: String((margin.top + height - margin.bottom) / 2),
      "text-anchor": "middle",
      transform: `rotate(-90 14 ${(margin.top + height - margin.bottom) / 2})`,
    }, opts.yLabel));
  }

  series.forEach((s, i) => {
    const group = svgEl("g", { class: "series", "data-series": s.name });
    const color = seriesColor(i);
    const drawn = s.points.filter((p): p is [number, number] => p[1] != null);
    if (drawn.length > 1) {
      const d = drawn
        .map(([x, y], j) => `${j === 0 ? "M" : "L"}${sx(x)},${sy(y)}`)
        .join(" ");
      group.append(svgEl("path", { d, fill: "none", stroke: color, "stroke-width": "2" }));
    }
    for (const [x, y] of drawn) {
      group.append(svgEl("circle", {
        class: "point",
        cx: String(sx(x)), cy: String(sy(y)), r: "3.5",
        fill: color,
        "data-x": String(x), "data-y": String(y),
      }, svgEl("title", {}, `${s.name}: (${x}, ${y})`)));
    }
    svg.append(group);
  });

  const root = el("div", { class: "chart line-chart" }, svg, legendFor(series.map((s) => s.name)));
  attachSeriesInteractions(root);
  return root;
}

// ---- radar chart ----------------------------------------------------------
//
// Polygons arrive already normalized to [0, 1] per metric; the chart only
// projects them onto the radial axes.

export function radarChart(radar: { metrics: string[]; polygons: Record<string, number[]> }): HTMLElement {
  const size = 360;
  const cx = size / 2;
  const cy = size / 2;
  const radius = size / 2 - 52;
  const metrics = radar.metrics;
  const n = Math.max(metrics.length, 1);

  const angle = (i: number) => -Math.PI / 2 + (2 * Math.PI * i) / n;
  const project = (i: number, value: number): [number, number] => [
    cx + Math.cos(angle(i)) * radius * value,
    cy + Math.sin(angle(i)) * radius * value,
  ];

  const svg = svgEl("svg", {
    viewBox: `0 0 ${size} ${size}`,
    width: String(size), height: String(size), role: "img",
  });

  for (const ring of [0.25, 0.5, 0.75, 1]) {
    const pts = metrics.map((_, i) => project(i, ring).join(",")).join(" ");
    svg.append(svgEl("polygon", { class: "grid", points: pts, fill: "none" }));
  }
  metrics.forEach((name, i) => {
    const [x, y] = project(i, 1);
    svg.append(svgEl("line", {
      class: "axis", x1: String(cx), y1: String(cy), x2: String(x), y2: String(y),
    }));
    const [lx, ly] = project(i, 1.13);
    svg.append(svgEl("text", {
      class: "tick", x: String(lx), y: String(ly), "text-anchor": "middle",
    }, name));
  });

  const names = Object.keys(radar.polygons);
  names.forEach((name, idx) => {
    const values = radar.polygons[name] ?? [];
    const pts = values.map((v, i) => project(i, v));
    const group = svgEl("g", { class: "series", "data-series": name });
    group.append(svgEl("polygon", {
      class: "polygon",
      points: pts.map((p) => p.join(",")).join(" "),
      fill: seriesColor(idx), "fill-opacity": "0.08",
      stroke: seriesColor(idx), "stroke-width": "1.5",
    }));
    values.forEach((v, i) => {
      const [x, y] = pts[i] ?? [cx, cy];
      group.append(svgEl("circle", {
        class: "point", cx: String(x), cy: String(y), r: "2.5",
        fill: seriesColor(idx), "data-value": String(v), "data-metric": metrics[i] ?? "",
      }));
    });
    svg.append(group);
  });

  const root = el("div", { class: "chart radar-chart" }, svg, legendFor(names));
  attachSeriesInteractions(root);
  return root;
}

// ---- bubble chart -----------------------------------------------------------

export interface BubbleChartOptions {
  xLabel: string;
  yLabel: string;
  width?: number;
  height?: number;
}

export function bubbleChart(points: BubblePoint[], opts: BubbleChartOptions): HTMLElement {
  const width = opts.width ?? 480;
  const height = opts.height ?? 320;
  const margin = { top: 16, right: 16, bottom: 40, left: 56 };

  const xMin = points.length ? Math.min(...points.map((p) => p.x)) : 0;
  const xMax = points.length ? Math.max(...points.map((p) => p.x)) : 1;
  const yMin = points.length ? Math.min(...points.map((p) => p.y)) : 0;
  const yMax = points.length ? Math.max(...points.map((p) => p.y)) : 1;
  const maxSize = points.length ? Math.max(...points.map((p) => p.size)) : 1;

  const sx = linearScale(xMin, xMax, margin.left + 14, width - margin.right - 14);
  const sy = linearScale(yMin, yMax, height - margin.bottom - 14, margin.top + 14);
  const radiusOf = (size: number) =>
    4 + 14 * Math.sqrt(maxSize > 0 ? size / maxSize : 0);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width), height: String(height), role: "img",
  });
  svg.append(
    svgEl("line", {
      class: "axis",
      x1: String(margin.left), y1: String(height - margin.bottom),
      x2: String(width - margin.right), y2: String(height - margin.bottom),
    }),
    svgEl("line", {
      class: "axis",
      x1: String(margin.left), y1: String(margin.top),
      x2: String(margin.left), y2: String(height - margin.bottom),
    }),
    svgEl("text", {
      class: "axis-label",
      x: String((margin.left + width - margin.right) / 2), y: String(height - 6),
      "text-anchor": "middle",
    }, opts.xLabel),
    svgEl("text", {
      class: "axis-label",
      x: "14", y: String((margin.top + height - margin.bottom) / 2),
      "text-anchor": "middle",
      transform: `rotate(-90 14 ${(margin.top + height - margin.bottom) / 2})`,
    }, opts.yLabel),
  );

  const groups = [...new Set(points.map((p) => p.group))];
  const colorOf = new Map(groups.map((g, i) => [g, seriesColor(i)]));

  for (const group of groups) {
    const g = svgEl("g", { class: "series", "data-series": group });
    for (const p of points.filter((q) => q.group === group)) {
      g.append(svgEl("circle", {
        class: "bubble",
        cx: String(sx(p.x)), cy: String(sy(p.y)), r: String(radiusOf(p.size)),
        fill: colorOf.get(group) ?? "#888", "fill-opacity": "0.55",
        stroke: colorOf.get(group) ?? "#888",
        "data-x": String(p.x), "data-y": String(p.y),
        "data-size": String(p.size), "data-label": p.label,
      }, svgEl("title", {}, `${p.label}\n${opts.xLabel}=${p.x} ${opts.yLabel}=${p.y}`)));
    }
    svg.append(g);
  }

  const root = el("div", { class: "chart bubble-chart" }, svg, legendFor(groups));
  attachSeriesInteractions(root);
  return root;
}

// ---- attribution bars -----------------------------------------------------

/** Event-level view: one signed horizontal bar per feature. */
export function signedBars(labels: string[], values: number[]): HTMLElement {
  const rowHeight = 26;
  const width = 560;
  const labelWidth = 220;
  const height = rowHeight * Math.max(labels.length, 1) + 10;
  const extent = Math.max(...values.map((v) => Math.abs(v)), 1e-12);
  const scale = linearScale(-extent, extent, labelWidth, width - 12);
  const zero = scale(0);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width), height: String(height), role: "img",
  });
  svg.append(svgEl("line", {
    class: "axis", x1: String(zero), y1: "4", x2: String(zero), y2: String(height - 4),
  }));

  labels.forEach((label, i) => {
    const v = values[i] ?? 0;
    const y = 5 + i * rowHeight;
    const x = Math.min(zero, scale(v));
    const barWidth = Math.abs(scale(v) - zero);
    svg.append(
      svgEl("text", {
        class: "bar-label", x: String(labelWidth - 8), y: String(y + 14),
        "text-anchor": "end",
      }, label),
      svgEl("rect", {
        class: v < 0 ? "bar neg" : "bar pos",
        x: String(x), y: String(y), width: String(Math.max(barWidth, 0.5)),
        height: String(rowHeight - 8),
        "data-value": String(v), "data-feature": label,
      }, svgEl("title", {}, `${label}: ${v}`)),
    );
  });

  return el("div", { class: "chart signed-bars" }, svg);
}

/** Log-level view: mean model output per feature value, with support counts. */
export function groupBars(groups: LogExplanationGroup[]): HTMLElement {
  const width = Math.max(groups.length * 90 + 70, 240);
  const height = 260;
  const margin = { top: 16, right: 10, bottom: 48, left: 48 };
  const top = Math.max(...groups.map((g) => g.mean_output), 0);
  const bottom = Math.min(...groups.map((g) => g.mean_output), 0);
  const sy = linearScale(bottom, top === bottom ? bottom + 1 : top, height - margin.bottom, margin.top);
  const zero = sy(0);

  const svg = svgEl("svg", {
    viewBox: `0 0 ${width} ${height}`,
    width: String(width), height: String(height), role: "img",
  });
  svg.append(svgEl("line", {
    class: "axis",
    x1: String(margin.left - 6), y1: String(zero),
    x2: String(width - margin.right), y2: String(zero),
  }));

  groups.forEach((group, i) => {
    const x = margin.left + i * 90;
    const y = sy(group.mean_output);
    svg.append(
      svgEl("rect", {
        class: "bar",
        x: String(x), y: String(Math.min(y, zero)),
        width: "56", height: String(Math.max(Math.abs(zero - y), 0.5)),
        "data-value": String(group.mean_output),
        "data-count": String(group.count),
        "data-group": group.value,
      }, svgEl("title", {}, `${group.value}: mean ${group.mean_output} over ${group.count}`)),
      svgEl("text", {
        class: "tick", x: String(x + 28), y: String(height - margin.bottom + 16),
        "text-anchor": "middle",
      }, group.value),
      svgEl("text", {
        class: "count", x: String(x + 28), y: String(height - margin.bottom + 32),
        "text-anchor": "middle",
      }, `n=${group.count}`),
    );
  });

  return el("div", { class: "chart group-bars" }, svg);
}
