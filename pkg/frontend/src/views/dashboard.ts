import type { Report, TreeNode } from "../types.js";

function cell(text: string, className?: string): HTMLTableCellElement {
  const td = document.createElement("td");
  td.textContent = text;
  if (className) {
    td.className = className;
  }
  return td;
}

function headerRow(labels: string[]): HTMLTableRowElement {
  const tr = document.createElement("tr");
  for (const label of labels) {
    const th = document.createElement("th");
    th.textContent = label;
    tr.appendChild(th);
  }
  return tr;
}

function reportTable(report: Report, which: "responseTimes" | "utilizations"): HTMLTableElement {
  const table = document.createElement("table");
  table.className = which === "responseTimes" ? "response-table" : "utilization-table";
  const entries = which === "responseTimes" ? report.responseTimes : report.utilizations;
  table.appendChild(
    headerRow([which === "responseTimes" ? "class" : "center", "value", "threshold", "status"]),
  );
  for (const entry of entries) {
    const tr = document.createElement("tr");
    tr.dataset.subject = "class" in entry ? entry.class : entry.center;
    if (entry.violated) {
      tr.classList.add("violated");
    }
    tr.appendChild(cell("class" in entry ? entry.class : entry.center));
    tr.appendChild(cell(entry.value.toFixed(which === "responseTimes" ? 3 : 4)));
    tr.appendChild(cell(entry.threshold.toFixed(2)));
    tr.appendChild(cell(entry.violated ? "VIOLATED" : "ok", entry.violated ? "status-bad" : "status-ok"));
    table.appendChild(tr);
  }
  return table;
}

/** Per-class response times and per-center utilizations for one tree node,
 * with threshold violations highlighted. */
export function renderDashboard(node: TreeNode): HTMLElement {
  const root = document.createElement("section");
  root.className = "dashboard";

  const heading = document.createElement("h2");
  heading.textContent = `Results for ${node.id}`;
  root.appendChild(heading);

  const badge = document.createElement("p");
  badge.className = node.report.satisfied ? "badge satisfied" : "badge violated";
  badge.textContent = node.report.satisfied ? "all requirements satisfied" : "requirements violated";
  root.appendChild(badge);

  if (node.report.responseTimes.length > 0) {
    const caption = document.createElement("h3");
    caption.textContent = "Server-side response times (s)";
    root.appendChild(caption);
    root.appendChild(reportTable(node.report, "responseTimes"));
  }
  if (node.report.utilizations.length > 0) {
    const caption = document.createElement("h3");
    caption.textContent = "Utilizations";
    root.appendChild(caption);
    root.appendChild(reportTable(node.report, "utilizations"));
  }
  if (node.bottleneck) {
    const line = document.createElement("p");
    line.className = "bottleneck";
    line.textContent = `bottleneck: ${node.bottleneck}`;
    root.appendChild(line);
  }
  const solver = document.createElement("p");
  solver.className = "solver-info";
  solver.textContent = `solver: ${node.result.method}`;
  root.appendChild(solver);
  return root;
}
