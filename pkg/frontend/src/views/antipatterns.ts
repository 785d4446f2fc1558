import type { ActionSpec, Occurrence } from "../types.js";
import { namesValid, probabilitiesValid } from "../validate.js";

export interface AntipatternHandlers {
  onSubmit(action: ActionSpec): void;
}

function numberInput(name: string, value: number): HTMLInputElement {
  const input = document.createElement("input");
  input.type = "number";
  input.step = "0.05";
  input.name = name;
  input.value = String(value);
  return input;
}

function textInput(name: string, value: string): HTMLInputElement {
  const input = document.createElement("input");
  input.type = "text";
  input.name = name;
  input.value = value;
  return input;
}

function errorBox(): HTMLParagraphElement {
  const p = document.createElement("p");
  p.className = "form-error";
  return p;
}

function blobForm(occurrence: Occurrence, handlers: AntipatternHandlers): HTMLFormElement {
  const subject = occurrence.subject as string;
  const form = document.createElement("form");
  form.className = "blob-form";
  form.dataset.subject = subject;
  // Two parts by default, weighted like the canonical catalog split.
  const nameA = textInput("partA", `${subject}A`);
  const probA = numberInput("probA", 0.8);
  const nameB = textInput("partB", `${subject}B`);
  const probB = numberInput("probB", 0.2);
  const error = errorBox();
  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = `split ${subject}`;
  form.append("part 1 ", nameA, probA, document.createElement("br"), "part 2 ", nameB, probB, error, submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const names = [nameA.value, nameB.value];
    const probs = [Number(probA.value), Number(probB.value)];
    const problem = namesValid(names) ?? probabilitiesValid(probs);
    if (problem) {
      error.textContent = problem;
      return;
    }
    error.textContent = "";
    handlers.onSubmit({
      type: "blobSplit",
      subject,
      parts: names.map((name, i) => ({ name, probability: probs[i], operations: null })),
    });
  });
  return form;
}

function estForm(occurrence: Occurrence, handlers: AntipatternHandlers): HTMLFormElement {
  const [scenario, caller, callee] = occurrence.subject as string[];
  const form = document.createElement("form");
  form.className = "est-form";
  form.dataset.scenario = scenario;
  const remote = textInput("remote", "RemoteFacade");
  const local = textInput("local", "LocalFacade");
  const error = errorBox();
  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = `insert facade into ${scenario}`;
  form.append("remote facade ", remote, " local facade ", local, error, submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const problem = namesValid([remote.value, local.value]);
    if (problem) {
      error.textContent = problem;
      return;
    }
    error.textContent = "";
    handlers.onSubmit({
      type: "estFacade",
      scenario,
      caller,
      callee,
      remoteFacadeName: remote.value,
      localFacadeName: local.value,
    });
  });
  return form;
}

/** Detected occurrences with their evidence and a parameter form each;
 * submitting posts an expand action for the current node. */
export function renderAntipatterns(occurrences: Occurrence[], handlers: AntipatternHandlers): HTMLElement {
  const root = document.createElement("section");
  root.className = "antipatterns";
  const heading = document.createElement("h2");
  heading.textContent = "Detected antipatterns";
  root.appendChild(heading);
  if (occurrences.length === 0) {
    const none = document.createElement("p");
    none.textContent = "no occurrences at the current thresholds";
    root.appendChild(none);
    return root;
  }
  for (const occurrence of occurrences) {
    const card = document.createElement("article");
    card.className = `occurrence ${occurrence.kind}`;
    const title = document.createElement("h3");
    title.textContent =
      occurrence.kind === "blob"
        ? `BLOB: ${occurrence.subject as string}`
        : `Excessive messaging: ${(occurrence.subject as string[]).join(" -> ")}`;
    card.appendChild(title);
    const evidence = document.createElement("p");
    evidence.className = "evidence";
    evidence.textContent = Object.entries(occurrence.evidence)
      .map(([key, value]) => `${key}=${Number(value).toFixed(4)}`)
      .join(", ");
    card.appendChild(evidence);
    card.appendChild(occurrence.kind === "blob" ? blobForm(occurrence, handlers) : estForm(occurrence, handlers));
    root.appendChild(card);
  }
  return root;
}
