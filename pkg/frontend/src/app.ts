/**
 * Review app: renders a batch of samples with audio players, takes
 * confirm/correct verdicts, and shows the running error estimate.
 *
 * The server is the only source of truth: every verdict waits for the
 * acknowledgment, and the estimate on screen is always the value carried
 * by the latest server response (kept verbatim in data-estimate).
 */
import { ApiError, ReviewApi, Sample } from "./api.js";

export interface AppConfig {
  batchSize?: number;
  excludeReviewed?: boolean;
  reviewerId?: string;
}

interface Row {
  sample: Sample;
  element: HTMLElement;
  correction: HTMLInputElement;
  confirmButton: HTMLButtonElement;
  submitButton: HTMLButtonElement;
  status: HTMLElement;
  done: boolean;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class ReviewApp {
  private rows: Row[] = [];
  private selected = 0;
  private readonly batchSize: number;
  private readonly excludeReviewed: boolean;
  private readonly reviewerId: string;

  private readonly banner: HTMLElement;
  private readonly estimate: HTMLElement;
  private readonly progress: HTMLElement;
  private readonly list: HTMLElement;
  private readonly loadMore: HTMLButtonElement;

  constructor(
    root: HTMLElement,
    private readonly api: ReviewApi,
    config: AppConfig = {},
  ) {
    this.batchSize = config.batchSize ?? 8;
    this.excludeReviewed = config.excludeReviewed ?? false;
    this.reviewerId = config.reviewerId ?? "reviewer";

    root.replaceChildren();
    const header = el("header");
    header.append(el("h1", undefined, "sample review"));
    this.estimate = el("div", "estimate");
    this.progress = el("div", "progress");
    header.append(this.estimate, this.progress);
    this.banner = el("div", "banner");
    this.banner.hidden = true;
    this.list = el("main", "rows");
    this.loadMore = el("button", "load-more", "load more samples");
    this.loadMore.addEventListener("click", () => void this.loadBatch());
    root.append(header, this.banner, this.list, this.loadMore);
    root.addEventListener("keydown", (e) => this.onKey(e as KeyboardEvent));
    this.setEstimate(null);
    this.progress.textContent = "";
  }

  /** Fetch stats and the first batch. */
  async start(): Promise<void> {
    await this.refreshStats();
    await this.loadBatch();
  }

  async loadBatch(): Promise<void> {
    this.clearBanner();
    let batch;
    try {
      batch = await this.api.getSamples(this.batchSize, this.excludeReviewed);
    } catch (err) {
      this.showBanner(`service unreachable: ${describe(err)}`);
      return;
    }
    this.rows = [];
    this.list.replaceChildren();
    if (batch.empty || batch.samples.length === 0) {
      this.list.append(el("p", "empty-state", "no samples to review"));
      return;
    }
    for (const sample of batch.samples) {
      const row = this.buildRow(sample);
      this.rows.push(row);
      this.list.append(row.element);
    }
    this.select(0);
  }

  private buildRow(sample: Sample): Row {
    const element = el("article", "row");
    element.dataset.sampleId = sample.sample_id;

    const audio = el("audio");
    audio.controls = true;
    audio.preload = "none";
    audio.src = sample.audio_url;

    const transcript = el("div", "transcript", sample.transcript);
    const correction = el("input", "correction");
    correction.type = "text";
    correction.value = sample.transcript;
    correction.setAttribute("aria-label", "corrected transcript");

    const confirmButton = el("button", "confirm", "confirm");
    const submitButton = el("button", "submit", "submit correction");
    const status = el("span", "status");

    const row: Row = {
      sample,
      element,
      correction,
      confirmButton,
      submitButton,
      status,
      done: false,
    };
    confirmButton.addEventListener("click", () => void this.confirm(row));
    submitButton.addEventListener("click", () => void this.submitCorrection(row));
    correction.addEventListener("keydown", (e) => {
      if ((e as KeyboardEvent).key === "Enter") void this.submitCorrection(row);
    });
    element.addEventListener("focusin", () => this.select(this.rows.indexOf(row)));

    const controls = el("div", "controls");
    controls.append(confirmButton, submitButton, status);
    element.append(audio, transcript, correction, controls);
    return row;
  }

  async confirm(row: Row): Promise<void> {
    if (row.done) return;
    await this.sendVerdict(row, {
      sample_id: row.sample.sample_id,
      verdict: "confirmed",
      reviewer_id: this.reviewerId,
    });
  }

  async submitCorrection(row: Row): Promise<void> {
    if (row.done) return;
    const text = row.correction.value.trim();
    if (!text || text === row.sample.transcript) {
      // Unchanged text is not a correction; the verdict to give is confirm.
      this.setStatus(row, "unchanged — use confirm instead", "blocked");
      row.confirmButton.focus();
      return;
    }
    await this.sendVerdict(row, {
      sample_id: row.sample.sample_id,
      verdict: "corrected",
      corrected_transcript: text,
      reviewer_id: this.reviewerId,
    });
  }

  private async sendVerdict(
    row: Row,
    body: Parameters<ReviewApi["postVerdict"]>[0],
  ): Promise<void> {
    this.setBusy(row, true);
    try {
      const resp = await this.api.postVerdict(body);
      row.done = true;
      row.element.classList.add("done");
      this.setStatus(row, body.verdict === "confirmed" ? "confirmed" : "corrected", "ok");
      this.setEstimate(resp.current_estimate);
      await this.refreshStats();
    } catch (err) {
      this.setBusy(row, false);
      this.setStatus(row, describe(err), "error");
      if (!(err instanceof ApiError)) {
        this.showBanner(`service unreachable: ${describe(err)}`);
      }
    }
  }

  private async refreshStats(): Promise<void> {
    try {
      const stats = await this.api.getStats();
      this.progress.textContent = `${stats.reviewed} of ${stats.samples} reviewed`;
      this.setEstimate(stats.pooled_wer);
    } catch (err) {
      this.showBanner(`service unreachable: ${describe(err)}`);
    }
  }

  /** Estimate display; the raw server value is kept verbatim in data-estimate. */
  private setEstimate(value: number | null): void {
    this.estimate.dataset.estimate = value === null ? "" : String(value);
    this.estimate.textContent =
      value === null ? "error estimate: n/a" : `error estimate: ${(value * 100).toFixed(2)}%`;
  }

  private setStatus(row: Row, text: string, kind: "ok" | "error" | "blocked"): void {
    row.status.textContent = text;
    row.status.className = `status ${kind}`;
  }

  private setBusy(row: Row, busy: boolean): void {
    row.confirmButton.disabled = busy || row.done;
    row.submitButton.disabled = busy || row.done;
    row.correction.disabled = busy || row.done;
  }

  private showBanner(text: string): void {
    this.banner.textContent = text;
    this.banner.hidden = false;
  }

  private clearBanner(): void {
    this.banner.hidden = true;
    this.banner.textContent = "";
  }

  // Keyboard shortcuts: c = confirm, e = focus the correction field,
  // n/p = next/previous row. Rapid audits should not need the mouse.
  private onKey(event: KeyboardEvent): void {
    const target = event.target as HTMLElement | null;
    if (target && target.tagName === "INPUT") return;
    const row = this.rows[this.selected];
    if (!row) return;
    switch (event.key) {
      case "c":
        void this.confirm(row);
        break;
      case "e":
        row.correction.focus();
        event.preventDefault();
        break;
      case "n":
        this.select(this.selected + 1);
        break;
      case "p":
        this.select(this.selected - 1);
        break;
    }
  }

  private select(index: number): void {
    if (this.rows.length === 0) return;
    this.selected = Math.max(0, Math.min(index, this.rows.length - 1));
    this.rows.forEach((row, i) =>
      row.element.classList.toggle("selected", i === this.selected),
    );
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.status}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
