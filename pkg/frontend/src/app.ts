// Application wiring: load task, collect labels, submit, advance; reloading
// mid-session restores progress from the server, and a failed network call
// leaves the form intact behind a retry button.

import { ApiClient, ApiError, Criterion, TaskView } from "./api.js";
import {
  renderArticle,
  renderErrorBanner,
  renderFeedbackTable,
  renderOptionGroups,
  renderProgress,
  renderQuestion,
  renderSkipBanner,
  renderSurveyCode,
} from "./render.js";
import { TaskViewModel } from "./viewmodel.js";

export class AnnotationApp {
  private vm: TaskViewModel | null = null;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private annotator: string,
  ) {}

  async start(): Promise<void> {
    await this.loadNext();
  }

  current(): TaskViewModel | null {
    return this.vm;
  }

  async loadNext(): Promise<void> {
    let task: TaskView | null;
    try {
      task = await this.api.nextTask(this.annotator);
    } catch (error) {
      this.showError(error, () => void this.loadNext());
      return;
    }
    if (task === null) {
      await this.showFeedback();
      return;
    }
    if (!task.question) {
      this.root.replaceChildren(
        renderErrorBanner("Malformed task payload: question missing."),
      );
      return;
    }
    this.vm = new TaskViewModel(task);
    await this.renderTask();
  }

  private async renderTask(): Promise<void> {
    const vm = this.vm;
    if (!vm) {
      return;
    }
    const progress = await this.api.progress(this.annotator);
    const container = document.createElement("div");
    container.className = "task-view";
    container.dataset.edge = vm.task.edge_id;
    container.appendChild(renderProgress(progress));
    container.appendChild(renderQuestion(vm.task));
    container.appendChild(renderArticle(vm.task));

    if (vm.forcedSkip) {
      container.appendChild(renderSkipBanner(() => void this.submit()));
      this.root.replaceChildren(container);
      return;
    }

    container.appendChild(
      renderOptionGroups(vm, (criterion: Criterion, label: string) => {
        vm.select(criterion, label);
        void this.renderTask(); // re-render reflects enable/disable state
      }),
    );

    const comment = document.createElement("textarea");
    comment.className = "comment-box";
    comment.placeholder = "Comments on specific errors (optional)";
    comment.value = vm.comment;
    comment.addEventListener("input", () => vm.setComment(comment.value));
    container.appendChild(comment);

    const submit = document.createElement("button");
    submit.className = "submit";
    submit.textContent = "Submit";
    submit.disabled = !vm.canSubmit();
    submit.addEventListener("click", () => void this.submit());
    container.appendChild(submit);

    this.root.replaceChildren(container);
  }

  async submit(): Promise<void> {
    const vm = this.vm;
    if (!vm || !vm.canSubmit()) {
      return;
    }
    try {
      await this.api.submit(vm.body(this.annotator));
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        this.showInlineError(error.message);
      } else {
        this.showError(error, () => void this.submit());
      }
      return;
    }
    this.vm = null;
    await this.loadNext();
  }

  private showInlineError(message: string): void {
    const existing = this.root.querySelector(".error-banner");
    existing?.remove();
    this.root.prepend(renderErrorBanner(message));
  }

  private showError(error: unknown, retry: () => void): void {
    const banner = renderErrorBanner(
      error instanceof Error ? error.message : "request failed",
    );
    const button = document.createElement("button");
    button.className = "retry";
    button.textContent = "Retry";
    button.addEventListener("click", retry);
    banner.appendChild(button);
    this.root.prepend(banner);
  }

  async showFeedback(): Promise<void> {
    const [rows, progress] = await Promise.all([
      this.api.annotations(this.annotator),
      this.api.progress(this.annotator),
    ]);
    const container = document.createElement("div");
    container.className = "session-complete";
    container.appendChild(renderProgress(progress));
    container.appendChild(renderFeedbackTable(rows));
    if (progress.survey_code) {
      container.appendChild(renderSurveyCode(progress.survey_code));
    }
    this.root.replaceChildren(container);
  }
}

export function bootstrap(): void {
  const root = document.getElementById("app");
  if (!root) {
    return;
  }
  const params = new URLSearchParams(window.location.search);
  const annotator = params.get("annotator") ?? "default";
  const api = new ApiClient(window.location.origin);
  const app = new AnnotationApp(root, api, annotator);
  void app.start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  bootstrap();
}
