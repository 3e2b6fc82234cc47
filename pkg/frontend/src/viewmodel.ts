// Task state with the labelling invariants baked in: the view model can
// never produce a POST body the server would reject for skip-propagation,
// mirroring the server-side rule on the client.

import { AnnotationBody, CRITERIA, Criterion, TaskView } from "./api.js";

const SKIPPED = "skipped";
const DOWNSTREAM: Criterion[] = ["comp", "givn", "relv"];

export class TaskViewModel {
  readonly task: TaskView;
  private selections: Partial<Record<Criterion, string>> = {};
  comment = "";
  dirty = false;

  constructor(task: TaskView) {
    this.task = task;
    if (task.forced_skip) {
      for (const criterion of CRITERIA) {
        this.selections[criterion] = SKIPPED;
      }
    }
  }

  get forcedSkip(): boolean {
    return this.task.forced_skip;
  }

  selection(criterion: Criterion): string | undefined {
    return this.selections[criterion];
  }

  /** Downstream groups are frozen while language quality is failed. */
  downstreamDisabled(): boolean {
    return this.forcedSkip || this.selections.lang === "fail";
  }

  select(criterion: Criterion, label: string): void {
    if (this.forcedSkip) {
      return; // the only action on an ill-formed edge is mark-skipped
    }
    if (criterion !== "lang" && this.downstreamDisabled()) {
      return;
    }
    this.selections[criterion] = label;
    this.dirty = true;
    if (criterion === "lang") {
      if (label === "fail") {
        for (const downstream of DOWNSTREAM) {
          this.selections[downstream] = SKIPPED;
        }
      } else {
        for (const downstream of DOWNSTREAM) {
          if (this.selections[downstream] === SKIPPED) {
            delete this.selections[downstream];
          }
        }
      }
    }
  }

  setComment(text: string): void {
    this.comment = text;
    this.dirty = true;
  }

  /** Submit stays disabled until language quality is answered and every
   * criterion has a value (auto-skips count). */
  canSubmit(): boolean {
    if (this.forcedSkip) {
      return true;
    }
    if (!this.selections.lang) {
      return false;
    }
    return CRITERIA.every((criterion) => this.selections[criterion] !== undefined);
  }

  body(annotator: string): AnnotationBody {
    if (!this.canSubmit()) {
      throw new Error("incomplete annotation");
    }
    const labels = {
      lang: this.selections.lang ?? SKIPPED,
      comp: this.selections.comp ?? SKIPPED,
      givn: this.selections.givn ?? SKIPPED,
      relv: this.selections.relv ?? SKIPPED,
    };
    if (labels.lang === "fail" || this.forcedSkip) {
      labels.comp = SKIPPED;
      labels.givn = SKIPPED;
      labels.relv = SKIPPED;
    }
    return {
      edge_id: this.task.edge_id,
      annotator_id: annotator,
      ...labels,
      comment: this.comment,
    };
  }
}
