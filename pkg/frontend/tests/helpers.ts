import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";

import type { TaskView } from "../src/api.js";

export const REPO_ROOT = resolve(__dirname, "..", "..");

export interface RunningServer {
  baseUrl: string;
  storePath: string;
  stop: () => void;
}

export async function startServer(port: number, assignments: Record<string, string[]>): Promise<RunningServer> {
  const workDir = mkdtempSync(join(tmpdir(), "annoui-"));
  const assignmentsPath = join(workDir, "assignments.json");
  const storePath = join(workDir, "journal.jsonl");
  writeFileSync(assignmentsPath, JSON.stringify(assignments));
  const child: ChildProcess = spawn(
    "python3",
    [
      "-m", "qudeval.cli", "serve",
      "--corpus", join(REPO_ROOT, "data", "demo"),
      "--store", storePath,
      "--assignments", assignmentsPath,
      "--port", String(port),
    ],
    { cwd: REPO_ROOT, stdio: "ignore" },
  );
  const baseUrl = `http://127.0.0.1:${port}`;
  const annotator = Object.keys(assignments)[0];
  const deadline = Date.now() + 30000;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${baseUrl}/api/progress?annotator=${annotator}`);
      if (response.ok) {
        return { baseUrl, storePath, stop: () => child.kill() };
      }
    } catch {
      // not up yet
    }
    await sleep(200);
  }
  child.kill();
  throw new Error("annotation server did not come up");
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolvePromise) => setTimeout(resolvePromise, ms));
}

export async function waitFor(predicate: () => boolean, timeoutMs = 5000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    if (predicate()) {
      return;
    }
    await sleep(25);
  }
  throw new Error("condition not reached in time");
}

export function sampleTask(overrides: Partial<TaskView> = {}): TaskView {
  return {
    edge_id: "demo-1",
    question: "What is missing in the report?",
    ordinal: 1,
    sentences: [
      { index: 1, text: "S one.", roles: ["anchor", "prior-context"] },
      { index: 2, text: "S two.", roles: ["post-context"] },
      { index: 3, text: "S three.", roles: ["answer"] },
    ],
    anchor_idx: 1,
    answer_idx: 3,
    forced_skip: false,
    options: {
      lang: ["pass", "fail", "skipped"],
      comp: ["direct", "unfocused", "not_answered", "skipped"],
      givn: ["no_new", "answer_leak", "hallucination", "skipped"],
      relv: ["fully", "partially", "not_grounded", "skipped"],
    },
    progress: { completed: 0, total: 3 },
    ...overrides,
  };
}
