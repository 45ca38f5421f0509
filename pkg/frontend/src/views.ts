/** Pure DOM builders for each phase of the review flow. No state lives here:
 * every handler asks the controller to perform a server call and re-render. */

import { FailureInfo, SegmentView, SessionView, modelStepLabels } from "./api.js";

export interface SegmentReviewHandlers {
  onMerge(first: number, second: number): void;
  onIgnore(index: number): void;
  onConfirm(): void;
}

export interface TranscriptReviewHandlers {
  onEdit(index: number, text: string): void;
  onConfirm(): void;
  onCompile(): void;
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

/** Inline SVG sparkline of the filtered motion signal over one frame range. */
export function sparkline(
  values: number[],
  start: number,
  end: number,
  width = 120,
  height = 24,
): SVGSVGElement {
  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("class", "sparkline");
  const slice = values.slice(Math.max(0, start), Math.min(values.length, end));
  if (slice.length > 1) {
    const lo = Math.min(...slice);
    const hi = Math.max(...slice);
    const span = hi - lo || 1;
    const points = slice
      .map((v, i) => {
        const x = (i / (slice.length - 1)) * (width - 2) + 1;
        const y = height - 2 - ((v - lo) / span) * (height - 4);
        return `${x.toFixed(1)},${y.toFixed(1)}`;
      })
      .join(" ");
    const line = document.createElementNS("http://www.w3.org/2000/svg", "polyline");
    line.setAttribute("points", points);
    line.setAttribute("fill", "none");
    line.setAttribute("stroke", "currentColor");
    svg.appendChild(line);
  }
  return svg;
}

function segmentLabel(segment: SegmentView): string {
  return `frames ${segment.start}–${segment.end} (${segment.duration.toFixed(2)} s)`;
}

/** Phase "Segmented": rows with thumbnail, duration, sparkline, Ignore and
 * Merge-with-next buttons; Confirm advances the phase. */
export function renderSegmentReview(
  view: SessionView,
  signal: number[],
  thumbnailUrl: (index: number) => string,
  handlers: SegmentReviewHandlers,
): HTMLElement {
  const root = el("section", "segment-review");
  root.appendChild(el("h2", undefined, "Review segmentation"));
  root.appendChild(
    el("p", "hint", "Ignore clips that are not part of the teaching; merge over-split clips."),
  );
  const list = el("ol", "segments");
  view.segments.forEach((segment, position) => {
    const row = el("li", `segment ${segment.status}`);
    row.dataset.index = String(segment.index);

    const thumb = el("img", "thumb") as HTMLImageElement;
    thumb.src = thumbnailUrl(segment.index);
    thumb.alt = `segment ${segment.index}`;
    row.appendChild(thumb);

    const meta = el("div", "meta");
    meta.appendChild(el("div", "range", segmentLabel(segment)));
    meta.appendChild(sparkline(signal, segment.start, segment.end));
    row.appendChild(meta);

    const actions = el("div", "actions");
    const ignore = el("button", "ignore", segment.status === "ignored" ? "Ignored" : "Ignore");
    ignore.disabled = segment.status === "ignored";
    ignore.addEventListener("click", () => handlers.onIgnore(segment.index));
    actions.appendChild(ignore);

    const next = view.segments[position + 1];
    const merge = el("button", "merge", "Merge with next");
    merge.disabled =
      next === undefined || segment.status === "ignored" || next.status === "ignored";
    merge.addEventListener("click", () => handlers.onMerge(segment.index, segment.index + 1));
    actions.appendChild(merge);

    row.appendChild(actions);
    list.appendChild(row);
  });
  root.appendChild(list);

  const confirm = el("button", "confirm", "Confirm segmentation");
  confirm.addEventListener("click", () => handlers.onConfirm());
  root.appendChild(confirm);
  return root;
}

/** Phases "Transcribed" and "TranscriptsConfirmed": editable transcripts per
 * active segment (edits PUT on blur), then Confirm, then Compile. */
export function renderTranscriptReview(
  view: SessionView,
  handlers: TranscriptReviewHandlers,
): HTMLElement {
  const root = el("section", "transcript-review");
  root.appendChild(el("h2", undefined, "Review transcripts"));
  const editable = view.phase === "Transcribed";
  const list = el("ol", "transcripts");
  for (const segment of view.segments) {
    if (segment.status !== "active") continue;
    const row = el("li", "transcript-row");
    row.dataset.index = String(segment.index);
    row.appendChild(el("span", "range", segmentLabel(segment)));
    const input = el("input", "transcript") as HTMLInputElement;
    input.type = "text";
    input.value = segment.transcript ?? "";
    input.disabled = !editable;
    if (segment.flagged) row.classList.add("flagged");
    input.addEventListener("blur", () => {
      if (editable) handlers.onEdit(segment.index, input.value);
    });
    row.appendChild(input);
    const slot = el("div", "violations");
    slot.dataset.for = String(segment.index);
    row.appendChild(slot);
    list.appendChild(row);
  }
  root.appendChild(list);

  if (editable) {
    const confirm = el("button", "confirm", "Confirm transcripts");
    confirm.addEventListener("click", () => handlers.onConfirm());
    root.appendChild(confirm);
  } else {
    const compile = el("button", "compile", "Compile task model");
    compile.addEventListener("click", () => handlers.onCompile());
    root.appendChild(compile);
  }
  return root;
}

/** Compile failure: violations rendered beside the step's source segment. */
export function applyViolations(root: HTMLElement, view: SessionView, failure: FailureInfo): void {
  const banner = el("div", "failure-banner", failure.message);
  root.prepend(banner);
  const active = view.segments.filter((s) => s.status === "active");
  for (const violation of failure.violations) {
    const match = /^position (\d+): (.*)$/.exec(violation);
    const slotIndex =
      match !== null && Number(match[1]) < active.length
        ? active[Number(match[1])].index
        : null;
    if (slotIndex === null) continue;
    const slot = root.querySelector(`.violations[data-for="${slotIndex}"]`);
    if (slot) slot.appendChild(el("div", "violation", match ? match[2] : violation));
  }
}

/** Phase "Compiled": the ordered step list plus the raw document. */
export function renderModelView(document_text: string): HTMLElement {
  const root = el("section", "model-view");
  root.appendChild(el("h2", undefined, "Task model"));
  const list = el("ol", "steps");
  for (const label of modelStepLabels(document_text)) {
    list.appendChild(el("li", "step", label));
  }
  root.appendChild(list);
  const raw = el("pre", "document", document_text);
  root.appendChild(raw);
  return root;
}

export function renderError(message: string): HTMLElement {
  return el("div", "error-banner", message);
}
