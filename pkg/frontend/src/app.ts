/** Single-page controller mirroring the session phase machine.
 *
 * The UI holds no authoritative state: after every action it refetches the
 * session and re-renders; a 409 (stale phase, concurrent edit) triggers the
 * same refetch-and-rerender path.
 */

import { ApiError, Client, SessionView, parseSignalCsv } from "./api.js";
import {
  applyViolations,
  renderError,
  renderModelView,
  renderSegmentReview,
  renderTranscriptReview,
} from "./views.js";

export interface AppOptions {
  baseUrl: string;
  sessionId: string;
  root: HTMLElement;
}

export class App {
  readonly client: Client;
  private readonly root: HTMLElement;
  private readonly sessionId: string;
  private signal: number[] = [];
  private inflight = 0;
  private idleResolvers: (() => void)[] = [];
  view: SessionView | null = null;
  lastError: string | null = null;

  constructor(options: AppOptions) {
    this.client = new Client(options.baseUrl);
    this.root = options.root;
    this.sessionId = options.sessionId;
  }

  /** Resolves once no server call is in flight (for tests and chaining). */
  whenIdle(): Promise<void> {
    if (this.inflight === 0) return Promise.resolve();
    return new Promise((resolve) => this.idleResolvers.push(resolve));
  }

  private track<T>(work: Promise<T>): Promise<T> {
    this.inflight += 1;
    const done = () => {
      this.inflight -= 1;
      if (this.inflight === 0) {
        for (const resolve of this.idleResolvers.splice(0)) resolve();
      }
    };
    work.then(done, done);
    return work;
  }

  async start(): Promise<void> {
    await this.track(this.reload());
  }

  private async reload(): Promise<void> {
    this.view = await this.client.getSession(this.sessionId);
    if (this.view.phase === "Segmented" && this.signal.length === 0) {
      this.signal = parseSignalCsv(await this.client.signalCsv(this.sessionId)).filtered;
    }
    this.render();
  }

  /** Run one server action; on conflict, refetch and re-render instead of failing. */
  private action(work: () => Promise<unknown>): void {
    this.track(
      (async () => {
        this.lastError = null;
        try {
          await work();
        } catch (error) {
          if (error instanceof ApiError) {
            this.lastError = error.message;
            if (error.status === 409 && Array.isArray(error.detail["violations"])) {
              await this.reload();
              this.showViolations(error.message, error.detail["violations"] as string[]);
              return;
            }
          } else {
            this.lastError = String(error);
          }
        }
        await this.reload();
      })(),
    );
  }

  private showViolations(message: string, violations: string[]): void {
    const section = this.root.querySelector("section");
    if (section && this.view) {
      applyViolations(section as HTMLElement, this.view, { message, violations });
    }
  }

  private render(): void {
    const view = this.view;
    if (!view) return;
    this.root.textContent = "";

    const header = document.createElement("header");
    const title = document.createElement("h1");
    title.textContent = `${view.bundle_id} — ${view.phase}`;
    header.appendChild(title);
    this.root.appendChild(header);

    if (this.lastError) {
      this.root.appendChild(renderError(this.lastError));
    }

    switch (view.phase) {
      case "Segmented":
        this.root.appendChild(
          renderSegmentReview(
            view,
            this.signal,
            (index) => this.client.thumbnailUrl(view.id, index),
            {
              onMerge: (first, second) =>
                this.action(() => this.client.mergeSegments(view.id, first, second)),
              onIgnore: (index) => this.action(() => this.client.ignoreSegment(view.id, index)),
              onConfirm: () => this.action(() => this.client.confirmSegments(view.id)),
            },
          ),
        );
        break;
      case "Transcribed":
      case "TranscriptsConfirmed":
        this.root.appendChild(
          renderTranscriptReview(view, {
            onEdit: (index, text) =>
              this.action(() => this.client.setTranscript(view.id, index, text)),
            onConfirm: () => this.action(() => this.client.confirmTranscripts(view.id)),
            onCompile: () => this.action(() => this.client.compile(view.id)),
          }),
        );
        if (view.last_failure) {
          const section = this.root.querySelector("section");
          if (section) applyViolations(section as HTMLElement, view, view.last_failure);
        }
        break;
      case "Compiled":
        this.track(
          this.client.taskModel(view.id).then((text) => {
            const stale = this.root.querySelector(".model-view");
            if (stale) stale.remove();
            this.root.appendChild(renderModelView(text));
          }),
        );
        break;
      default:
        this.root.appendChild(renderError(`unhandled phase ${view.phase}`));
    }
  }
}

export async function initApp(options: AppOptions): Promise<App> {
  const app = new App(options);
  await app.start();
  return app;
}
