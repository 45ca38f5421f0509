"use strict";
/** Typed client for the session-review HTTP API. */
Object.defineProperty(exports, "__esModule", { value: true });
exports.Client = exports.ApiError = void 0;
exports.parseSignalCsv = parseSignalCsv;
exports.modelStepLabels = modelStepLabels;
class ApiError extends Error {
    constructor(status, code, message, detail = {}) {
        super(message);
        this.status = status;
        this.code = code;
        this.detail = detail;
    }
}
exports.ApiError = ApiError;
async function decode(response) {
    const type = response.headers.get("content-type") ?? "";
    const body = type.includes("json") ? await response.json() : await response.text();
    if (!response.ok) {
        const err = body.error;
        throw new ApiError(response.status, err?.code ?? "error", err?.message ?? `HTTP ${response.status}`, err?.detail ?? {});
    }
    return body;
}
class Client {
    constructor(baseUrl) {
        this.baseUrl = baseUrl;
    }
    async call(method, path, body) {
        const init = { method };
        if (body !== undefined) {
            init.body = JSON.stringify(body);
            init.headers = { "Content-Type": "application/json" };
        }
        return decode(await fetch(this.baseUrl + path, init));
    }
    createSession(bundlePath) {
        return this.call("POST", "/sessions", { bundle_path: bundlePath });
    }
    getSession(id) {
        return this.call("GET", `/sessions/${id}`);
    }
    mergeSegments(id, first, second) {
        return this.call("POST", `/sessions/${id}/segments/merge`, { first, second });
    }
    ignoreSegment(id, index) {
        return this.call("POST", `/sessions/${id}/segments/${index}/ignore`);
    }
    confirmSegments(id) {
        return this.call("POST", `/sessions/${id}/segments/confirm`);
    }
    setTranscript(id, index, text) {
        return this.call("PUT", `/sessions/${id}/segments/${index}/transcript`, { text });
    }
    confirmTranscripts(id) {
        return this.call("POST", `/sessions/${id}/transcripts/confirm`);
    }
    compile(id) {
        return this.call("POST", `/sessions/${id}/compile`);
    }
    taskModel(id) {
        return this.call("GET", `/sessions/${id}/taskmodel`);
    }
    signalCsv(id) {
        return this.call("GET", `/sessions/${id}/signal`);
    }
    thumbnailUrl(id, index) {
        return `${this.baseUrl}/sessions/${id}/segments/${index}/thumbnail`;
    }
}
exports.Client = Client;
/** Parse the diagnostics CSV (frame_index,raw,deoutliered,filtered,is_stop). */
function parseSignalCsv(csv) {
    const filtered = [];
    const stops = [];
    const lines = csv.trim().split("\n");
    for (const line of lines.slice(1)) {
        const cols = line.split(",");
        if (cols.length < 5)
            continue;
        filtered.push(Number(cols[3]));
        if (cols[4] === "1")
            stops.push(Number(cols[0]));
    }
    return { filtered, stops };
}
/** Extract the ordered step labels out of a serialized task-model document. */
function modelStepLabels(document) {
    const labels = [];
    for (const line of document.split("\n")) {
        const match = /^step \d+: label=(.+)$/.exec(line);
        if (match)
            labels.push(match[1]);
    }
    return labels;
}
