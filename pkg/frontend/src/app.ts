import { ApiClient } from "./api.js";
import { buildSentenceElement, spansValid } from "./highlight.js";
import type { MarkValue, Task } from "./types.js";

const MARKS: { value: MarkValue; caption: string }[] = [
  { value: "C", caption: "C — correct" },
  { value: "I", caption: "I — incorrect" },
  { value: "U", caption: "U — uncertain" },
];

interface SkippedTask {
  uid: string;
  reason: string;
}

/** One curator's review session: walks the assignment task by task,
 * collects C/I/U judgments (buttons or keyboard), shows progress.
 *
 * Marks are only ever sent from the submit path, which is reachable
 * exclusively through a button click or key press: the UI cannot invent
 * judgments on its own.
 */
export class CurationApp {
  private tasks: Task[] = [];
  private skipped: SkippedTask[] = [];
  private index = -1;
  private progressText = "";
  private progressStale = false;
  private retrying: { uid: string; mark: MarkValue; note: string } | null = null;
  private readonly doc: Document;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly curator: string,
  ) {
    this.doc = root.ownerDocument;
  }

  async start(): Promise<void> {
    const assignment = await this.api.getAssignment(this.curator);
    this.tasks = [];
    for (const task of assignment.tasks) {
      if (spansValid(task)) {
        this.tasks.push(task);
      } else {
        this.skipped.push({ uid: task.uid, reason: "entity offsets out of range" });
      }
    }
    this.index = this.nextPending(-1);
    await this.refreshProgress();
    this.render();
    this.doc.addEventListener("keydown", this.onKeyDown);
  }

  stop(): void {
    this.doc.removeEventListener("keydown", this.onKeyDown);
  }

  private onKeyDown = (event: KeyboardEvent): void => {
    if (event.repeat) return;
    const target = event.target as HTMLElement | null;
    if (target && target.tagName === "TEXTAREA") return;
    const key = event.key.toUpperCase();
    if (key === "C" || key === "I" || key === "U") {
      void this.submit(key as MarkValue);
    } else if (event.key === "ArrowLeft") {
      this.step(-1);
    } else if (event.key === "ArrowRight") {
      this.step(1);
    }
  };

  /** Move through the whole assignment, marked tasks included, so an
   * earlier judgment can be reviewed and changed. */
  private step(delta: number): void {
    if (this.tasks.length === 0) return;
    const from = this.index >= 0 ? this.index : delta > 0 ? -1 : 0;
    const n = this.tasks.length;
    this.index = ((from + delta) % n + n) % n;
    this.render();
  }

  private nextPending(after: number): number {
    const pending = (t: Task) => t.mark === null;
    for (let i = after + 1; i < this.tasks.length; i++) {
      if (pending(this.tasks[i])) return i;
    }
    for (let i = 0; i <= after && i < this.tasks.length; i++) {
      if (pending(this.tasks[i])) return i;
    }
    return -1;
  }

  private currentTask(): Task | null {
    return this.index >= 0 ? this.tasks[this.index] : null;
  }

  private async submit(mark: MarkValue): Promise<void> {
    const task = this.currentTask();
    if (!task) return;
    const noteField = this.root.querySelector<HTMLTextAreaElement>("#note");
    const note = mark === "U" && noteField ? noteField.value.trim() : "";
    await this.send(task, mark, note);
  }

  private async send(task: Task, mark: MarkValue, note: string): Promise<void> {
    try {
      await this.api.postMark(this.curator, task.uid, mark, note);
    } catch (error) {
      this.retrying = { uid: task.uid, mark, note };
      this.render();
      this.showBanner(`Could not save mark for ${task.uid}: ${String(error)}`);
      return;
    }
    this.retrying = null;
    task.mark = mark;
    task.note = note;
    this.index = this.nextPending(this.index);
    await this.refreshProgress();
    this.render();
  }

  private async retry(): Promise<void> {
    if (!this.retrying) return;
    const task = this.tasks.find((t) => t.uid === this.retrying!.uid);
    if (task) await this.send(task, this.retrying.mark, this.retrying.note);
  }

  private async refreshProgress(): Promise<void> {
    try {
      const response = await this.api.getProgress();
      const counts = response.progress[this.curator];
      if (counts) {
        this.progressText = `${counts.marked}/${counts.total}`;
        this.progressStale = false;
      }
    } catch {
      this.progressStale = true; // keep the cached value, flag it
    }
  }

  render(): void {
    const doc = this.doc;
    this.root.replaceChildren();

    const header = doc.createElement("header");
    const title = doc.createElement("h1");
    title.textContent = `Relation review — ${this.curator}`;
    const progress = doc.createElement("span");
    progress.id = "progress";
    progress.textContent = this.progressText;
    progress.className = this.progressStale ? "stale" : "";
    if (this.progressStale) progress.title = "service unreachable; showing cached counts";
    header.append(title, progress);
    this.root.appendChild(header);

    const banner = doc.createElement("div");
    banner.id = "banner";
    banner.hidden = true;
    const bannerText = doc.createElement("span");
    bannerText.id = "banner-text";
    const retryButton = doc.createElement("button");
    retryButton.id = "retry";
    retryButton.textContent = "Retry";
    retryButton.addEventListener("click", () => void this.retry());
    banner.append(bannerText, retryButton);
    this.root.appendChild(banner);

    const task = this.currentTask();
    if (!task) {
      const done = doc.createElement("p");
      done.id = "done";
      done.textContent =
        "All tasks reviewed. Nothing pending. Use ← → to revisit a judgment.";
      this.root.appendChild(done);
    } else {
      this.root.appendChild(this.buildTaskCard(task));
    }

    this.root.appendChild(this.buildRemainingList());
    if (this.skipped.length > 0) {
      this.root.appendChild(this.buildSkippedReport());
    }
    if (this.retrying) this.showBanner(`Mark for ${this.retrying.uid} not saved yet.`);
  }

  private buildTaskCard(task: Task): HTMLElement {
    const doc = this.doc;
    const card = doc.createElement("section");
    card.id = "task";
    card.dataset.uid = task.uid;

    const meta = doc.createElement("div");
    meta.className = "meta";
    const docRef = doc.createElement("span");
    docRef.textContent = `abstract ${task.doc_id}`;
    const label = doc.createElement("span");
    label.id = "label";
    label.textContent = `pipeline label: ${task.label}`;
    label.className = `label-${task.label.toLowerCase()}`;
    meta.append(docRef, label);
    card.appendChild(meta);

    card.appendChild(buildSentenceElement(doc, task));

    const legend = doc.createElement("p");
    legend.className = "legend";
    legend.textContent = `gene: ${task.gene_surface} · phenotype: ${task.phenotype_surface}`;
    card.appendChild(legend);

    const buttons = doc.createElement("div");
    buttons.id = "buttons";
    for (const { value, caption } of MARKS) {
      const button = doc.createElement("button");
      button.className = "mark-button";
      button.dataset.mark = value;
      button.textContent = caption;
      if (task.mark === value) button.classList.add("selected");
      button.addEventListener("click", () => void this.submit(value));
      buttons.appendChild(button);
    }
    card.appendChild(buttons);

    const note = doc.createElement("textarea");
    note.id = "note";
    note.placeholder = "optional note, stored with U marks (why is it ambiguous?)";
    note.value = task.note ?? "";
    card.appendChild(note);

    const nav = doc.createElement("div");
    nav.id = "nav";
    const prev = doc.createElement("button");
    prev.id = "prev-task";
    prev.textContent = "◀ previous";
    prev.addEventListener("click", () => this.step(-1));
    const next = doc.createElement("button");
    next.id = "next-task";
    next.textContent = "next ▶";
    next.addEventListener("click", () => this.step(1));
    nav.append(prev, next);
    card.appendChild(nav);

    const hint = doc.createElement("p");
    hint.className = "hint";
    hint.textContent = "keyboard: C / I / U to judge, ← → to browse";
    card.appendChild(hint);
    return card;
  }

  private buildRemainingList(): HTMLElement {
    const doc = this.doc;
    const wrap = doc.createElement("details");
    wrap.id = "remaining";
    const summary = doc.createElement("summary");
    const pending = this.tasks.filter((t) => t.mark === null);
    summary.textContent = `${pending.length} pending`;
    wrap.appendChild(summary);
    const list = doc.createElement("ul");
    for (const task of pending) {
      const item = doc.createElement("li");
      item.textContent = task.uid;
      list.appendChild(item);
    }
    wrap.appendChild(list);
    return wrap;
  }

  private buildSkippedReport(): HTMLElement {
    const doc = this.doc;
    const report = doc.createElement("div");
    report.id = "skipped-report";
    const caption = doc.createElement("p");
    caption.textContent = `${this.skipped.length} task(s) skipped:`;
    report.appendChild(caption);
    const list = doc.createElement("ul");
    for (const { uid, reason } of this.skipped) {
      const item = doc.createElement("li");
      item.textContent = `${uid}: ${reason}`;
      list.appendChild(item);
    }
    report.appendChild(list);
    return report;
  }

  private showBanner(message: string): void {
    const banner = this.root.querySelector<HTMLElement>("#banner");
    const text = this.root.querySelector<HTMLElement>("#banner-text");
    if (banner && text) {
      text.textContent = message;
      banner.hidden = false;
    }
  }
}
