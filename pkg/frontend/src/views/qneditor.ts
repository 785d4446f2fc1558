import type { QnEditSpec, QnView } from "../types.js";
import { demandValid, namesValid, probabilitiesValid } from "../validate.js";

export interface QnEditorHandlers {
  onEdits(edits: QnEditSpec[]): void;
}

/** Editable view of the node's queueing network: center/demand table with
 * split and demand-change forms.  Centers tracing to frozen components are
 * rendered locked and offer no forms. */
export function renderQnEditor(view: QnView, handlers: QnEditorHandlers): HTMLElement {
  const root = document.createElement("section");
  root.className = "qn-editor";
  const heading = document.createElement("h2");
  heading.textContent = "Queueing network";
  root.appendChild(heading);

  const table = document.createElement("table");
  table.className = "qn-table";
  const head = document.createElement("tr");
  for (const label of ["center", "kind", ...view.classes.map((c) => c.id), ""]) {
    const th = document.createElement("th");
    th.textContent = label;
    head.appendChild(th);
  }
  table.appendChild(head);

  for (const center of view.centers) {
    const tr = document.createElement("tr");
    tr.dataset.center = center.id;
    if (center.frozen) {
      tr.classList.add("locked");
    }
    const name = document.createElement("td");
    name.textContent = center.frozen ? `${center.id} (locked)` : center.id;
    tr.appendChild(name);
    const kind = document.createElement("td");
    kind.textContent = center.kind;
    tr.appendChild(kind);
    for (const cls of view.classes) {
      const td = document.createElement("td");
      td.textContent = (center.demand[cls.id] ?? 0).toFixed(4);
      tr.appendChild(td);
    }
    const actions = document.createElement("td");
    if (!center.frozen && center.kind === "ps") {
      const splitButton = document.createElement("button");
      splitButton.type = "button";
      splitButton.textContent = "split";
      splitButton.dataset.splits = center.id;
      splitButton.addEventListener("click", () => {
        form.hidden = false;
        form.dataset.center = center.id;
        (form.elements.namedItem("partA") as HTMLInputElement).value = `${center.id}1`;
        (form.elements.namedItem("partB") as HTMLInputElement).value = `${center.id}2`;
      });
      actions.appendChild(splitButton);

      const demandButton = document.createElement("button");
      demandButton.type = "button";
      demandButton.textContent = "set demand";
      demandButton.dataset.demands = center.id;
      demandButton.addEventListener("click", () => {
        demandForm.hidden = false;
        demandForm.dataset.center = center.id;
      });
      actions.appendChild(demandButton);
    }
    tr.appendChild(actions);
    table.appendChild(tr);
  }
  root.appendChild(table);

  // split form (two parts)
  const form = document.createElement("form");
  form.className = "split-form";
  form.hidden = true;
  const partA = document.createElement("input");
  partA.name = "partA";
  const probA = document.createElement("input");
  probA.name = "probA";
  probA.value = "0.5";
  const partB = document.createElement("input");
  partB.name = "partB";
  const probB = document.createElement("input");
  probB.name = "probB";
  probB.value = "0.5";
  const splitError = document.createElement("p");
  splitError.className = "form-error";
  const splitSubmit = document.createElement("button");
  splitSubmit.type = "submit";
  splitSubmit.textContent = "apply split";
  form.append("parts ", partA, probA, partB, probB, splitError, splitSubmit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const names = [partA.value, partB.value];
    const probs = [Number(probA.value), Number(probB.value)];
    const problem = namesValid(names) ?? probabilitiesValid(probs);
    if (problem) {
      splitError.textContent = problem;
      return;
    }
    splitError.textContent = "";
    handlers.onEdits([
      {
        kind: "splitCenter",
        center: form.dataset.center as string,
        parts: names.map((id, i) => ({ id, probability: probs[i] })),
      },
    ]);
  });
  root.appendChild(form);

  // demand form (center x class -> new demand)
  const demandForm = document.createElement("form");
  demandForm.className = "demand-form";
  demandForm.hidden = true;
  const classSelect = document.createElement("select");
  classSelect.name = "class";
  for (const cls of view.classes) {
    const option = document.createElement("option");
    option.value = cls.id;
    option.textContent = cls.id;
    classSelect.appendChild(option);
  }
  const demandValue = document.createElement("input");
  demandValue.name = "newDemand";
  const demandError = document.createElement("p");
  demandError.className = "form-error";
  const demandSubmit = document.createElement("button");
  demandSubmit.type = "submit";
  demandSubmit.textContent = "apply demand";
  demandForm.append("class ", classSelect, " demand (s) ", demandValue, demandError, demandSubmit);
  demandForm.addEventListener("submit", (event) => {
    event.preventDefault();
    const value = Number(demandValue.value);
    const problem = demandValid(value);
    if (problem) {
      demandError.textContent = problem;
      return;
    }
    demandError.textContent = "";
    handlers.onEdits([
      {
        kind: "changeDemand",
        center: demandForm.dataset.center as string,
        class: classSelect.value,
        newDemand: value,
      },
    ]);
  });
  root.appendChild(demandForm);
  return root;
}
