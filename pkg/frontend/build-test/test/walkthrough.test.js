"use strict";
/** End-to-end walkthrough against the real backend, headless via jsdom:
 * create a session from an over-split pick_bring_place bundle, merge the
 * split segment, fix one transcript, compile, and check both the rendered
 * model and its byte-identity with a CLI compile of the same session. */
var __importDefault = (this && this.__importDefault) || function (mod) {
    return (mod && mod.__esModule) ? mod : { "default": mod };
};
Object.defineProperty(exports, "__esModule", { value: true });
const strict_1 = __importDefault(require("node:assert/strict"));
const node_test_1 = require("node:test");
const node_child_process_1 = require("node:child_process");
const node_fs_1 = require("node:fs");
const node_os_1 = require("node:os");
const node_path_1 = require("node:path");
const node_util_1 = require("node:util");
const jsdom_1 = require("jsdom");
const app_js_1 = require("../src/app.js");
const api_js_1 = require("../src/api.js");
const run = (0, node_util_1.promisify)(node_child_process_1.execFile);
let serverProcess;
let baseUrl;
let dataDir;
let bundleDir;
(0, node_test_1.before)(async () => {
    const work = (0, node_fs_1.mkdtempSync)((0, node_path_1.join)((0, node_os_1.tmpdir)(), "review-ui-"));
    dataDir = (0, node_path_1.join)(work, "data");
    bundleDir = (0, node_path_1.join)(work, "bundle");
    await run("python3", ["-m", "stopgo.cli", "synth", "pick_bring_place_oversplit", bundleDir]);
    serverProcess = (0, node_child_process_1.spawn)("python3", ["-m", "stopgo.cli", "serve", "--port", "0", "--data", dataDir]);
    baseUrl = await new Promise((resolve, reject) => {
        let output = "";
        serverProcess.stdout.on("data", (chunk) => {
            output += chunk.toString();
            const match = /serving on (http:\/\/[\d.]+:\d+)/.exec(output);
            if (match)
                resolve(match[1]);
        });
        serverProcess.on("exit", (code) => reject(new Error(`server exited early: ${code}`)));
        setTimeout(() => reject(new Error(`server did not start: ${output}`)), 15000);
    });
});
(0, node_test_1.after)(() => {
    serverProcess.kill();
});
function clickButton(root, selector) {
    const button = root.querySelector(selector);
    strict_1.default.ok(button, `expected a button matching ${selector}`);
    strict_1.default.equal(button.disabled, false, `${selector} should be enabled`);
    button.click();
}
(0, node_test_1.test)("review walkthrough: merge over-split, fix transcript, compile", async () => {
    const dom = new jsdom_1.JSDOM("<!DOCTYPE html><body><div id='app'></div></body>");
    globalThis.document = dom.window.document;
    const root = dom.window.document.getElementById("app");
    const client = new api_js_1.Client(baseUrl);
    const created = await client.createSession(bundleDir);
    strict_1.default.equal(created.phase, "Segmented");
    strict_1.default.equal(created.segments.length, 6); // the bring task is over-split
    const app = await (0, app_js_1.initApp)({ root, baseUrl, sessionId: created.id });
    strict_1.default.equal(root.querySelectorAll("li.segment").length, 6);
    strict_1.default.equal(root.querySelectorAll("svg.sparkline").length, 6);
    // merge the two halves of the over-split bring segment (rows 2 and 3)
    clickButton(root, 'li.segment[data-index="2"] button.merge');
    await app.whenIdle();
    strict_1.default.equal(app.view.segments.length, 5); // server state, reloaded into the view
    clickButton(root, "button.confirm");
    await app.whenIdle();
    strict_1.default.equal(app.view.phase, "Transcribed");
    // fix one transcript through the input field (PUT on blur)
    const input = root.querySelector('li.transcript-row[data-index="1"] input');
    strict_1.default.equal(input.value, "Pick up the box.");
    input.value = "Lift the box off the table.";
    input.dispatchEvent(new dom.window.Event("blur"));
    await app.whenIdle();
    const refreshed = root.querySelector('li.transcript-row[data-index="1"] input');
    strict_1.default.equal(refreshed.value, "Lift the box off the table.");
    clickButton(root, "button.confirm");
    await app.whenIdle();
    strict_1.default.equal(app.view.phase, "TranscriptsConfirmed");
    clickButton(root, "button.compile");
    await app.whenIdle();
    strict_1.default.equal(app.view.phase, "Compiled");
    // the 5-step model is rendered in order
    const rendered = Array.from(root.querySelectorAll("ol.steps li.step")).map((n) => n.textContent);
    strict_1.default.deepEqual(rendered, ["Grasp", "PTG11", "PTG12", "PTG13", "Release"]);
    // server-side model identical to a CLI compile of the same session dir
    const serverModel = await client.taskModel(created.id);
    const cli = await run("python3", ["-m", "stopgo.cli", "compile", (0, node_path_1.join)(dataDir, created.id)]);
    const cliModel = (0, node_fs_1.readFileSync)(cli.stdout.trim(), "utf-8");
    strict_1.default.equal(cliModel, serverModel);
    strict_1.default.deepEqual((0, api_js_1.modelStepLabels)(serverModel), ["Grasp", "PTG11", "PTG12", "PTG13", "Release"]);
});
(0, node_test_1.test)("compile violation is rendered next to the offending segment", async () => {
    const dom = new jsdom_1.JSDOM("<!DOCTYPE html><body><div id='app'></div></body>");
    globalThis.document = dom.window.document;
    const root = dom.window.document.getElementById("app");
    const client = new api_js_1.Client(baseUrl);
    const created = await client.createSession(bundleDir);
    const app = await (0, app_js_1.initApp)({ root, baseUrl, sessionId: created.id });
    clickButton(root, 'li.segment[data-index="2"] button.merge');
    await app.whenIdle();
    clickButton(root, "button.confirm");
    await app.whenIdle();
    // break the final Release transcript, then compile
    const input = root.querySelector('li.transcript-row[data-index="4"] input');
    input.value = "Wipe the plate with the sponge.";
    input.dispatchEvent(new dom.window.Event("blur"));
    await app.whenIdle();
    clickButton(root, "button.confirm");
    await app.whenIdle();
    clickButton(root, "button.compile");
    await app.whenIdle();
    strict_1.default.equal(app.view.phase, "Transcribed"); // failed compile reverts to editable
    const banner = root.querySelector(".failure-banner");
    strict_1.default.ok(banner && banner.textContent.includes("GMR violation"));
    // after the merge the Release segment sits at list index 4 (step position 4)
    const slot = root.querySelector('.violations[data-for="4"]');
    strict_1.default.ok(slot && slot.textContent.includes("must end with Release"));
});
(0, node_test_1.test)("ui state always reloads to server state", async () => {
    const dom = new jsdom_1.JSDOM("<!DOCTYPE html><body><div id='app'></div></body>");
    globalThis.document = dom.window.document;
    const root = dom.window.document.getElementById("app");
    const client = new api_js_1.Client(baseUrl);
    const created = await client.createSession(bundleDir);
    await client.ignoreSegment(created.id, 0); // mutate out of band
    const app = await (0, app_js_1.initApp)({ root, baseUrl, sessionId: created.id });
    const row = root.querySelector('li.segment[data-index="0"]');
    strict_1.default.ok(row.classList.contains("ignored"));
    strict_1.default.equal(app.view.segments[0].status, "ignored");
});
