import { GatewayClient } from "./api.js";
import { clear, el } from "./dom.js";
import { EvaluationPage } from "./evaluation.js";
import { ExplanationPage } from "./explanation.js";
import { TrainingForm } from "./form.js";
import { JobsPanel } from "./jobs.js";
import { SetupPage } from "./setup.js";

declare global {
  interface Window {
    PPMKIT_API_BASE?: string;
  }
}

const ROUTES = [
  { hash: "#/setup", label: "Data" },
  { hash: "#/train", label: "Train" },
  { hash: "#/results", label: "Results" },
  { hash: "#/explain", label: "Explain" },
] as const;

export interface ParsedRoute {
  path: string;
  params: URLSearchParams;
}

/** "#/results?ids=a,b" -> {path: "#/results", params: {ids: "a,b"}}. */
export function parseRoute(hash: string): ParsedRoute {
  const raw = hash || "#/setup";
  const queryAt = raw.indexOf("?");
  if (queryAt < 0) return { path: raw, params: new URLSearchParams() };
  return { path: raw.slice(0, queryAt), params: new URLSearchParams(raw.slice(queryAt + 1)) };
}

/** Top-level shell: nav plus a routed outlet, one page instance per route. */
export class App {
  readonly root: HTMLElement;

  private readonly client: GatewayClient;
  private readonly outlet: HTMLElement;
  private readonly navLinks = new Map<string, HTMLAnchorElement>();
  private jobsPanel: JobsPanel | null = null;

  constructor(client: GatewayClient) {
    this.client = client;
    this.outlet = el("main", { class: "outlet" });
    const nav = el("nav", { class: "topnav" });
    for (const route of ROUTES) {
      const link = el("a", { href: route.hash }, route.label) as HTMLAnchorElement;
      this.navLinks.set(route.hash, link);
      nav.append(link);
    }
    this.root = el("div", { class: "app" },
      el("header", { class: "masthead" }, el("h1", {}, "Process outcome workbench"), nav),
      this.outlet);
  }

  /** Renders the static frame for the route synchronously, then loads data. */
  navigate(hash: string): void {
    const { path, params } = parseRoute(hash);
    for (const [routeHash, link] of this.navLinks) {
      link.classList.toggle("active", routeHash === path);
    }
    this.jobsPanel?.stop();
    this.jobsPanel = null;
    clear(this.outlet);

    switch (path) {
      case "#/train": {
        const jobs = new JobsPanel(this.client);
        this.jobsPanel = jobs;
        const holder = el("div", { class: "train-page" });
        this.outlet.append(holder, jobs.root);
        void this.client.listSplits().then((splits) => {
          const form = new TrainingForm(this.client, {
            splits,
            onSubmitted: (created) => jobs.start(created.map((job) => job.id)),
          });
          holder.append(form.root);
        });
        break;
      }
      case "#/results": {
        const ids = params.get("ids");
        const page = new EvaluationPage(this.client, ids ? ids.split(",").filter(Boolean) : []);
        this.outlet.append(page.root);
        void page.load();
        break;
      }
      case "#/explain": {
        const page = new ExplanationPage(this.client);
        this.outlet.append(page.root);
        break;
      }
      default: {
        const page = new SetupPage(this.client);
        this.outlet.append(page.root);
        void page.load();
      }
    }
  }

  start(): void {
    window.addEventListener("hashchange", () => this.navigate(window.location.hash));
    this.navigate(window.location.hash);
  }
}

export function mount(target: HTMLElement): App {
  const base = window.PPMKIT_API_BASE ?? "";
  const app = new App(new GatewayClient(base));
  target.append(app.root);
  app.start();
  return app;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app") as HTMLElement);
}
