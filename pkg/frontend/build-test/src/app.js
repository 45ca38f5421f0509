"use strict";
/** Single-page controller mirroring the session phase machine.
 *
 * The UI holds no authoritative state: after every action it refetches the
 * session and re-renders; a 409 (stale phase, concurrent edit) triggers the
 * same refetch-and-rerender path.
 */
Object.defineProperty(exports, "__esModule", { value: true });
exports.App = void 0;
exports.initApp = initApp;
const api_js_1 = require("./api.js");
const views_js_1 = require("./views.js");
class App {
    constructor(options) {
        this.signal = [];
        this.inflight = 0;
        this.idleResolvers = [];
        this.view = null;
        this.lastError = null;
        this.client = new api_js_1.Client(options.baseUrl);
        this.root = options.root;
        this.sessionId = options.sessionId;
    }
    /** Resolves once no server call is in flight (for tests and chaining). */
    whenIdle() {
        if (this.inflight === 0)
            return Promise.resolve();
        return new Promise((resolve) => this.idleResolvers.push(resolve));
    }
    track(work) {
        this.inflight += 1;
        const done = () => {
            this.inflight -= 1;
            if (this.inflight === 0) {
                for (const resolve of this.idleResolvers.splice(0))
                    resolve();
            }
        };
        work.then(done, done);
        return work;
    }
    async start() {
        await this.track(this.reload());
    }
    async reload() {
        this.view = await this.client.getSession(this.sessionId);
        if (this.view.phase === "Segmented" && this.signal.length === 0) {
            this.signal = (0, api_js_1.parseSignalCsv)(await this.client.signalCsv(this.sessionId)).filtered;
        }
        this.render();
    }
    /** Run one server action; on conflict, refetch and re-render instead of failing. */
    action(work) {
        this.track((async () => {
            this.lastError = null;
            try {
                await work();
            }
            catch (error) {
                if (error instanceof api_js_1.ApiError) {
                    this.lastError = error.message;
                    if (error.status === 409 && Array.isArray(error.detail["violations"])) {
                        await this.reload();
                        this.showViolations(error.message, error.detail["violations"]);
                        return;
                    }
                }
                else {
                    this.lastError = String(error);
                }
            }
            await this.reload();
        })());
    }
    showViolations(message, violations) {
        const section = this.root.querySelector("section");
        if (section && this.view) {
            (0, views_js_1.applyViolations)(section, this.view, { message, violations });
        }
    }
    render() {
        const view = this.view;
        if (!view)
            return;
        this.root.textContent = "";
        const header = document.createElement("header");
        const title = document.createElement("h1");
        title.textContent = `${view.bundle_id} — ${view.phase}`;
        header.appendChild(title);
        this.root.appendChild(header);
        if (this.lastError) {
            this.root.appendChild((0, views_js_1.renderError)(this.lastError));
        }
        switch (view.phase) {
            case "Segmented":
                this.root.appendChild((0, views_js_1.renderSegmentReview)(view, this.signal, (index) => this.client.thumbnailUrl(view.id, index), {
                    onMerge: (first, second) => this.action(() => this.client.mergeSegments(view.id, first, second)),
                    onIgnore: (index) => this.action(() => this.client.ignoreSegment(view.id, index)),
                    onConfirm: () => this.action(() => this.client.confirmSegments(view.id)),
                }));
                break;
            case "Transcribed":
            case "TranscriptsConfirmed":
                this.root.appendChild((0, views_js_1.renderTranscriptReview)(view, {
                    onEdit: (index, text) => this.action(() => this.client.setTranscript(view.id, index, text)),
                    onConfirm: () => this.action(() => this.client.confirmTranscripts(view.id)),
                    onCompile: () => this.action(() => this.client.compile(view.id)),
                }));
                if (view.last_failure) {
                    const section = this.root.querySelector("section");
                    if (section)
                        (0, views_js_1.applyViolations)(section, view, view.last_failure);
                }
                break;
            case "Compiled":
                this.track(this.client.taskModel(view.id).then((text) => {
                    const stale = this.root.querySelector(".model-view");
                    if (stale)
                        stale.remove();
                    this.root.appendChild((0, views_js_1.renderModelView)(text));
                }));
                break;
            default:
                this.root.appendChild((0, views_js_1.renderError)(`unhandled phase ${view.phase}`));
        }
    }
}
exports.App = App;
async function initApp(options) {
    const app = new App(options);
    await app.start();
    return app;
}
