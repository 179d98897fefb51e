// DOM rendering for the review tool. Everything here is plain DOM; the
// decisions live in session.ts and conflicts.ts.

import type { CaseDetail, CaseSummary, MetricInfo } from "./api.js";
import type { ReviewSession, ToggleState } from "./session.js";
import type { ConflictView } from "./conflicts.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

export function renderCaseList(
  cases: CaseSummary[],
  activeId: string | null,
  onSelect: (caseId: string) => void,
): HTMLElement {
  const list = el("ul", { class: "case-list" });
  for (const summary of cases) {
    const item = el("li", { class: summary.case_id === activeId ? "active" : "" }, [
      el("button", { type: "button" }, [
        el("span", { class: "case-id" }, [summary.case_id]),
        el("span", { class: "case-type" }, [summary.collision_type]),
        el("span", { class: "case-sheets" }, [`${summary.sheet_count} sheet(s)`]),
      ]),
    ]);
    item.querySelector("button")!.addEventListener("click", () => onSelect(summary.case_id));
    list.append(item);
  }
  return list;
}

export function renderPanes(
  detail: CaseDetail,
  modelId: string | null,
  artifactUrl: (name: string) => string,
): HTMLElement {
  const panes = el("div", { class: "panes" });
  panes.append(
    el("figure", {}, [
      el("img", { src: artifactUrl("truth.svg"), alt: "reference diagram" }),
      el("figcaption", {}, ["reference (deterministic)"]),
    ]),
  );
  const generated = modelId
    ? detail.artifacts.find((name) => name.startsWith(`gen/${modelId}.`))
    : undefined;
  if (generated) {
    panes.append(
      el("figure", {}, [
        el("img", { src: artifactUrl(generated), alt: `${modelId} output` }),
        el("figcaption", {}, [`${modelId}`]),
      ]),
    );
  } else {
    panes.append(
      el("figure", { class: "missing" }, [
        el("div", { class: "placeholder" }, ["not generated"]),
        el("figcaption", {}, [modelId ?? "no model selected"]),
      ]),
    );
  }
  return panes;
}

export function renderRecord(detail: CaseDetail): HTMLElement {
  const record = detail.record;
  const rows: [string, string][] = [
    ["Location", record.location],
    ["Collision type", record.collision_type],
  ];
  for (const vehicle of record.vehicles) {
    rows.push([
      vehicle.label,
      `${vehicle.entry_leg} -> ${vehicle.exit_leg}, damage code ${vehicle.damage_code}`,
    ]);
  }
  const table = el("table", { class: "record-fields" });
  for (const [name, value] of rows) {
    table.append(el("tr", {}, [el("th", {}, [name]), el("td", {}, [value])]));
  }
  const narrative = el("p", { class: "narrative" }, [record.narrative]);
  const prompt = detail.prompt_text
    ? el("details", {}, [el("summary", {}, ["prompt text"]), el("pre", {}, [detail.prompt_text])])
    : el("div", {});
  return el("section", { class: "record" }, [table, narrative, prompt]);
}

function toggleLabel(state: ToggleState): string {
  return state === null ? "—" : String(state);
}

export function renderToggles(
  metrics: MetricInfo[],
  session: ReviewSession,
  onChange: () => void,
): HTMLElement {
  const rows = el("ol", { class: "metric-toggles" });
  metrics.forEach((metric, index) => {
    const state = session.state(metric.id);
    const row = el("li", { class: state === null ? "unset" : `set-${state}` }, [
      el("span", { class: "key-hint" }, [String((index + 1) % 10)]),
      el("span", { class: "metric-label", title: metric.description }, [metric.label]),
      el("span", { class: "metric-help" }, [metric.description]),
    ]);
    for (const value of [1, 0] as const) {
      const button = el(
        "button",
        {
          type: "button",
          class: state === value ? "chosen" : "",
          "data-metric": metric.id,
          "data-value": String(value),
        },
        [String(value)],
      );
      button.addEventListener("click", () => {
        session.set(metric.id, session.state(metric.id) === value ? null : value);
        onChange();
      });
      row.append(button);
    }
    row.append(el("span", { class: "state" }, [toggleLabel(state)]));
    rows.append(row);
  });
  return rows;
}

export function renderConflicts(
  view: ConflictView,
  labels: Map<string, string>,
  onResolve: (metricId: string, value: 0 | 1, note: string) => void,
): HTMLElement {
  const section = el("section", { class: "conflicts" });
  section.append(
    el("h3", {}, [
      view.conflicts.length === 0
        ? "no conflicts"
        : `${view.conflicts.length} conflict(s): discuss and resolve`,
    ]),
  );
  const table = el("table", { class: "conflict-table" });
  table.append(
    el("tr", {}, [
      el("th", {}, ["metric"]),
      el("th", {}, [view.raterA]),
      el("th", {}, [view.raterB]),
      el("th", {}, ["resolution"]),
    ]),
  );
  for (const row of view.rows) {
    const cells = [
      el("td", {}, [labels.get(row.metricId) ?? row.metricId]),
      el("td", {}, [String(row.a)]),
      el("td", {}, [String(row.b)]),
    ];
    const resolution = el("td", {});
    if (!row.agrees) {
      const note = el("input", { type: "text", placeholder: "resolution note" });
      for (const value of [1, 0] as const) {
        const button = el("button", { type: "button" }, [`use ${value}`]);
        button.addEventListener("click", () =>
          onResolve(row.metricId, value, note.value),
        );
        resolution.append(button);
      }
      resolution.append(note);
    } else {
      resolution.append("agreed");
    }
    table.append(
      el("tr", { class: row.agrees ? "agrees" : "conflict" }, [...cells, resolution]),
    );
  }
  section.append(table);
  return section;
}

export function renderStatus(message: string, kind: "info" | "error" = "info"): HTMLElement {
  return el("div", { class: `status status-${kind}` }, [message]);
}
