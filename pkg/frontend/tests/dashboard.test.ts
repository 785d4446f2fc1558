import { describe, expect, it } from "vitest";

import { renderDashboard } from "../src/views/dashboard.js";
import type { TreeNode } from "../src/types.js";
import { fixtureData } from "./mockApi.js";

const fixture = fixtureData();

function node(id: string): TreeNode {
  return fixture.nodes[id] as TreeNode;
}

describe("results dashboard", () => {
  it("highlights exactly the violated rows of the initial analysis", () => {
    const view = renderDashboard(node(fixture.rootId));
    const violatedClasses = [...view.querySelectorAll(".response-table tr.violated")].map(
      (tr) => (tr as HTMLElement).dataset.subject,
    );
    expect(violatedClasses).toEqual(["MakePurchase"]);
    const violatedCenters = [...view.querySelectorAll(".utilization-table tr.violated")].map(
      (tr) => (tr as HTMLElement).dataset.subject,
    );
    expect(violatedCenters.sort()).toEqual(["Database", "ProductCatalog"]);
    expect(view.querySelector(".bottleneck")?.textContent).toContain("ProductCatalog");
    expect(view.querySelector(".badge")?.classList.contains("violated")).toBe(true);
  });

  it("shows values against their thresholds", () => {
    const view = renderDashboard(node(fixture.rootId));
    const row = view.querySelector('.response-table tr[data-subject="MakePurchase"]');
    const cells = [...row!.querySelectorAll("td")].map((td) => td.textContent);
    expect(Number(cells[1])).toBeGreaterThan(4);
    expect(cells[2]).toBe("4.00");
    expect(cells[3]).toBe("VIOLATED");
  });

  it("renders no highlights when requirements are absent", () => {
    const bare: TreeNode = {
      ...node(fixture.rootId),
      report: { satisfied: true, responseTimes: [], utilizations: [] },
    };
    const view = renderDashboard(bare);
    expect(view.querySelectorAll("tr.violated").length).toBe(0);
    expect(view.querySelector(".badge")?.classList.contains("satisfied")).toBe(true);
  });
});
