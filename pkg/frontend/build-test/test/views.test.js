"use strict";
var __importDefault = (this && this.__importDefault) || function (mod) {
    return (mod && mod.__esModule) ? mod : { "default": mod };
};
Object.defineProperty(exports, "__esModule", { value: true });
const strict_1 = __importDefault(require("node:assert/strict"));
const node_test_1 = require("node:test");
const jsdom_1 = require("jsdom");
const api_js_1 = require("../src/api.js");
const views_js_1 = require("../src/views.js");
const dom = new jsdom_1.JSDOM("<!DOCTYPE html><body></body>");
globalThis.document = dom.window.document;
function sampleView(phase) {
    return {
        id: "s1",
        phase,
        bundle_id: "pick_bring_place",
        video_rate: 30,
        frame_count: 300,
        active_count: 3,
        compiled: false,
        last_failure: null,
        segments: [
            { index: 0, start: 0, end: 100, status: "active", transcript: "Grasp the box.", flagged: false, duration: 3.33 },
            { index: 1, start: 100, end: 200, status: "ignored", transcript: null, flagged: false, duration: 3.33 },
            { index: 2, start: 200, end: 300, status: "active", transcript: "Release the box.", flagged: true, duration: 3.33 },
        ],
    };
}
(0, node_test_1.test)("segment review renders one row per segment with controls", () => {
    const actions = [];
    const root = (0, views_js_1.renderSegmentReview)(sampleView("Segmented"), [0.1, 0.5, 0.2], () => "thumb.png", {
        onMerge: (a, b) => actions.push(`merge ${a} ${b}`),
        onIgnore: (i) => actions.push(`ignore ${i}`),
        onConfirm: () => actions.push("confirm"),
    });
    const rows = root.querySelectorAll("li.segment");
    strict_1.default.equal(rows.length, 3);
    strict_1.default.ok(rows[1].classList.contains("ignored"));
    strict_1.default.equal(root.querySelectorAll("svg.sparkline").length, 3);
    rows[0].querySelector("button.ignore").click();
    root.querySelector("button.confirm").click();
    strict_1.default.deepEqual(actions, ["ignore 0", "confirm"]);
});
(0, node_test_1.test)("merge button is disabled on the last row and next to ignored rows", () => {
    const root = (0, views_js_1.renderSegmentReview)(sampleView("Segmented"), [], () => "", {
        onMerge: () => { },
        onIgnore: () => { },
        onConfirm: () => { },
    });
    const merges = root.querySelectorAll("button.merge");
    strict_1.default.equal(merges[0].disabled, true); // next row is ignored
    strict_1.default.equal(merges[1].disabled, true); // row itself is ignored
    strict_1.default.equal(merges[2].disabled, true); // no next row
});
(0, node_test_1.test)("merge button enabled between adjacent active rows", () => {
    const view = sampleView("Segmented");
    view.segments[1].status = "active";
    const calls = [];
    const root = (0, views_js_1.renderSegmentReview)(view, [], () => "", {
        onMerge: (a, b) => calls.push(`${a}-${b}`),
        onIgnore: () => { },
        onConfirm: () => { },
    });
    const merges = root.querySelectorAll("button.merge");
    strict_1.default.equal(merges[0].disabled, false);
    merges[0].click();
    strict_1.default.deepEqual(calls, ["0-1"]);
});
(0, node_test_1.test)("transcript review shows only active segments, edits PUT on blur", () => {
    const edits = [];
    const root = (0, views_js_1.renderTranscriptReview)(sampleView("Transcribed"), {
        onEdit: (i, text) => edits.push([i, text]),
        onConfirm: () => { },
        onCompile: () => { },
    });
    const inputs = root.querySelectorAll("input.transcript");
    strict_1.default.equal(inputs.length, 2); // ignored segment excluded
    strict_1.default.equal(inputs[0].value, "Grasp the box.");
    strict_1.default.ok(root.querySelector("li.flagged"));
    inputs[1].value = "Let go of the box.";
    inputs[1].dispatchEvent(new dom.window.Event("blur"));
    strict_1.default.deepEqual(edits, [[2, "Let go of the box."]]);
    strict_1.default.ok(root.querySelector("button.confirm"));
    strict_1.default.equal(root.querySelector("button.compile"), null);
});
(0, node_test_1.test)("confirmed transcripts are read-only and offer Compile", () => {
    const root = (0, views_js_1.renderTranscriptReview)(sampleView("TranscriptsConfirmed"), {
        onEdit: () => strict_1.default.fail("no edits when confirmed"),
        onConfirm: () => { },
        onCompile: () => { },
    });
    const inputs = root.querySelectorAll("input.transcript");
    strict_1.default.ok(Array.from(inputs).every((i) => i.disabled));
    strict_1.default.ok(root.querySelector("button.compile"));
});
(0, node_test_1.test)("violations attach to the offending segment row", () => {
    const view = sampleView("TranscriptsConfirmed");
    const root = (0, views_js_1.renderTranscriptReview)(view, {
        onEdit: () => { },
        onConfirm: () => { },
        onCompile: () => { },
    });
    (0, views_js_1.applyViolations)(root, view, {
        message: "GMR violation",
        violations: ["position 1: must end with Release"],
    });
    strict_1.default.ok(root.querySelector(".failure-banner"));
    const slot = root.querySelector('.violations[data-for="2"]');
    strict_1.default.ok(slot && slot.textContent.includes("must end with Release"));
});
(0, node_test_1.test)("model view lists steps in order", () => {
    const document_text = [
        "taskmodel v1",
        "meta bundle = b",
        "meta created = t",
        "meta tool = 0.1.0",
        "step 0: label=Grasp",
        "  source 0",
        "step 1: label=PTG12",
        "  source 1",
        "step 2: label=Release",
        "  source 2",
    ].join("\n");
    const root = (0, views_js_1.renderModelView)(document_text);
    const labels = Array.from(root.querySelectorAll("li.step")).map((n) => n.textContent);
    strict_1.default.deepEqual(labels, ["Grasp", "PTG12", "Release"]);
    strict_1.default.deepEqual((0, api_js_1.modelStepLabels)(document_text), ["Grasp", "PTG12", "Release"]);
});
(0, node_test_1.test)("signal csv parser extracts filtered column and stops", () => {
    const csv = [
        "frame_index,raw,deoutliered,filtered,is_stop",
        "0,1.0,1.0,0.9,0",
        "1,0.5,0.5,0.4,1",
        "2,0.7,0.7,0.6,0",
    ].join("\n");
    const parsed = (0, api_js_1.parseSignalCsv)(csv);
    strict_1.default.deepEqual(parsed.filtered, [0.9, 0.4, 0.6]);
    strict_1.default.deepEqual(parsed.stops, [1]);
});
