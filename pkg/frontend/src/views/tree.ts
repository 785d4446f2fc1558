import type { ActionSpec, TreeNode } from "../types.js";

export interface TreeHandlers {
  onSelect(nodeId: string): void;
}

function actionLabel(action: ActionSpec | null): string {
  if (action === null) {
    return "initial model";
  }
  switch (action.type) {
    case "blobSplit":
      return `split ${action.subject}`;
    case "estFacade":
      return `facade in ${action.scenario}`;
    case "qnEdits":
      return action.edits
        .map((edit) => (edit.kind === "splitCenter" ? `qn split ${edit.center}` : `qn ${edit.kind}`))
        .join(", ");
  }
}

/** Decision tree with one satisfied/violated badge per node; clicking a node
 * moves the session cursor there (backtracking never discards branches). */
export function renderTree(
  nodes: Record<string, TreeNode>,
  rootId: string,
  cursor: string,
  handlers: TreeHandlers,
): HTMLElement {
  const container = document.createElement("nav");
  container.className = "decision-tree";
  const heading = document.createElement("h2");
  heading.textContent = "Decision tree";
  container.appendChild(heading);

  function renderNode(id: string): HTMLLIElement {
    const node = nodes[id];
    const li = document.createElement("li");
    const button = document.createElement("button");
    button.type = "button";
    button.className = "tree-node";
    button.dataset.node = id;
    if (id === cursor) {
      button.classList.add("cursor");
    }
    const badge = document.createElement("span");
    badge.className = node.report.satisfied ? "badge ok" : "badge violated";
    badge.textContent = node.report.satisfied ? "✓" : "✗";
    button.appendChild(badge);
    button.append(` ${id}: ${actionLabel(node.action)}`);
    button.addEventListener("click", () => handlers.onSelect(id));
    li.appendChild(button);
    if (node.children.length > 0) {
      const ul = document.createElement("ul");
      for (const child of node.children) {
        ul.appendChild(renderNode(child));
      }
      li.appendChild(ul);
    }
    return li;
  }

  const rootList = document.createElement("ul");
  rootList.appendChild(renderNode(rootId));
  container.appendChild(rootList);
  return container;
}
