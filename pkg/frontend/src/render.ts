// DOM construction. No framework: build elements, attach listeners, done.

import { Criterion, CRITERIA, FeedbackRow, ProgressView, TaskView } from "./api.js";
import { TaskViewModel } from "./viewmodel.js";

const CRITERION_TITLES: Record<Criterion, string> = {
  lang: "Language quality",
  comp: "Answer compatibility",
  givn: "Givenness",
  relv: "Anchor relevance",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderArticle(task: TaskView): HTMLElement {
  const pane = el("div", "article-pane");
  for (const sentence of task.sentences) {
    const span = el("span", "sentence " + sentence.roles.join(" "), sentence.text + " ");
    span.dataset.index = String(sentence.index);
    pane.appendChild(span);
  }
  return pane;
}

export function renderQuestion(task: TaskView): HTMLElement {
  const wrapper = el("p", "question-line");
  wrapper.appendChild(el("strong", "question", task.question));
  return wrapper;
}

export function renderOptionGroups(
  vm: TaskViewModel,
  onChange: (criterion: Criterion, label: string) => void,
): HTMLElement {
  const groups = el("div", "option-groups");
  for (const criterion of CRITERIA) {
    const fieldset = el("fieldset", `criterion criterion-${criterion}`);
    fieldset.appendChild(el("legend", undefined, CRITERION_TITLES[criterion]));
    const disabled = criterion !== "lang" && vm.downstreamDisabled();
    if (disabled) {
      fieldset.classList.add("disabled");
    }
    for (const label of vm.task.options[criterion]) {
      const row = el("label", "option");
      const input = el("input") as HTMLInputElement;
      input.type = "radio";
      input.name = `${vm.task.edge_id}-${criterion}`;
      input.value = label;
      input.checked = vm.selection(criterion) === label;
      input.disabled = vm.forcedSkip || disabled;
      input.addEventListener("change", () => onChange(criterion, label));
      row.appendChild(input);
      row.appendChild(el("span", undefined, label));
      fieldset.appendChild(row);
    }
    groups.appendChild(fieldset);
  }
  return groups;
}

export function renderProgress(progress: ProgressView): HTMLElement {
  const strip = el("div", "progress-strip");
  for (const flag of progress.tasks) {
    const block = el("span", flag.completed ? "task-block done" : "task-block");
    block.dataset.edge = flag.edge_id;
    block.title = flag.edge_id;
    strip.appendChild(block);
  }
  const counter = el("span", "progress-counter", `${progress.completed} / ${progress.total}`);
  strip.appendChild(counter);
  return strip;
}

export function renderFeedbackTable(rows: FeedbackRow[]): HTMLElement {
  if (!rows.length) {
    return el("p", "feedback-empty", "No annotations submitted yet.");
  }
  const table = el("table", "feedback-table");
  const head = el("tr");
  for (const column of ["task", "lang", "comp", "givn", "relv", "comment"]) {
    head.appendChild(el("th", undefined, column));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el("tr");
    tr.dataset.edge = row.edge_id;
    for (const value of [row.edge_id, row.lang, row.comp, row.givn, row.relv, row.comment]) {
      tr.appendChild(el("td", undefined, value));
    }
    table.appendChild(tr);
  }
  return table;
}

export function renderSurveyCode(code: string): HTMLElement {
  const box = el("div", "survey-code-box");
  box.appendChild(el("span", undefined, "Survey code: "));
  box.appendChild(el("code", "survey-code", code));
  const button = el("button", "copy-code", "Copy");
  button.addEventListener("click", () => {
    void navigator.clipboard?.writeText(code);
  });
  box.appendChild(button);
  return box;
}

export function renderErrorBanner(message: string): HTMLElement {
  return el("div", "error-banner", message);
}

export function renderSkipBanner(onSkip: () => void): HTMLElement {
  const banner = el("div", "skip-banner");
  banner.appendChild(
    el("span", undefined, "This parse is ill-formed (anchor is not before the answer); it must be skipped."),
  );
  const button = el("button", "mark-skipped", "Mark skipped");
  button.addEventListener("click", onSkip);
  banner.appendChild(button);
  return banner;
}
