/**
 * The three visual comparison modes, built as pure functions from two
 * figure sources to one composite SVG document:
 *
 *  - two-up: before and after side by side at equal scale
 *  - swipe: a vertical boundary, before on the left, after on the right
 *  - onion-skin: after stacked over before at adjustable opacity
 *
 * Each layer sits on an opaque canvas-sized backdrop (like the raster
 * images a code-forge viewer would compare), so onion-skin at opacity 0
 * renders exactly the before figure and at opacity 1 exactly the after.
 * Elements named by diff refs get a data-changed attribute that page
 * styles can highlight in every mode.
 */
import { cloneNode, nodeAtPath, parseSvg, rootSize, serializeSvg, SvgNode } from "./svg.js";
import type { DiffDocument } from "./schema.js";

export type CompareMode = "two-up" | "swipe" | "onion-skin";

export const COMPARE_MODES: readonly CompareMode[] = ["two-up", "swipe", "onion-skin"];

export interface HighlightRefs {
  before: string[];
  after: string[];
}

export function highlightRefs(diff: DiffDocument): HighlightRefs {
  const before: string[] = [];
  const after: string[] = [];
  for (const change of diff.changes) {
    if (change.old_ref !== null) before.push(change.old_ref);
    if (change.new_ref !== null) after.push(change.new_ref);
  }
  return { before, after };
}

const BACKDROP_FILL = "#ffffff";

interface LayerOptions {
  name: "before" | "after";
  translate?: { x: number; y: number };
  opacity?: number;
  clipId?: string;
  highlights?: string[];
}

function buildLayer(source: string, options: LayerOptions): { node: SvgNode; width: number; height: number } {
  const figure = parseSvg(source);
  const { width, height } = rootSize(figure);
  const content = cloneNode(figure);
  for (const ref of options.highlights ?? []) {
    const target = nodeAtPath(content, ref);
    if (target !== null) target.attrs.set("data-changed", "true");
  }
  const backdrop: SvgNode = {
    tag: "rect",
    attrs: new Map([
      ["width", String(width)],
      ["height", String(height)],
      ["fill", BACKDROP_FILL],
    ]),
    children: [],
    text: "",
  };
  const attrs = new Map<string, string>([["data-layer", options.name]]);
  if (options.translate && (options.translate.x !== 0 || options.translate.y !== 0)) {
    attrs.set("transform", `translate(${options.translate.x},${options.translate.y})`);
  }
  if (options.opacity !== undefined) attrs.set("opacity", String(options.opacity));
  if (options.clipId !== undefined) attrs.set("clip-path", `url(#${options.clipId})`);
  const node: SvgNode = {
    tag: "g",
    attrs,
    children: [backdrop, ...content.children],
    text: content.text,
  };
  return { node, width, height };
}

function compositeRoot(width: number, height: number, children: SvgNode[]): string {
  const root: SvgNode = {
    tag: "svg",
    attrs: new Map([
      ["xmlns", "http://www.w3.org/2000/svg"],
      ["width", String(width)],
      ["height", String(height)],
    ]),
    children,
    text: "",
  };
  return serializeSvg(root);
}

export function buildTwoUp(
  beforeSrc: string,
  afterSrc: string,
  highlights?: HighlightRefs,
  gap = 16,
): string {
  const before = buildLayer(beforeSrc, { name: "before", highlights: highlights?.before });
  const after = buildLayer(afterSrc, {
    name: "after",
    translate: { x: before.width + gap, y: 0 },
    highlights: highlights?.after,
  });
  return compositeRoot(
    before.width + gap + after.width,
    Math.max(before.height, after.height),
    [before.node, after.node],
  );
}

export function buildSwipe(
  beforeSrc: string,
  afterSrc: string,
  fraction: number,
  highlights?: HighlightRefs,
): string {
  const f = clamp01(fraction);
  const before = buildLayer(beforeSrc, {
    name: "before",
    clipId: "swipe-before",
    highlights: highlights?.before,
  });
  const after = buildLayer(afterSrc, {
    name: "after",
    clipId: "swipe-after",
    highlights: highlights?.after,
  });
  const width = Math.max(before.width, after.width);
  const height = Math.max(before.height, after.height);
  const boundary = f * width;
  const defs: SvgNode = {
    tag: "defs",
    attrs: new Map(),
    children: [
      clipRect("swipe-before", 0, boundary, height),
      clipRect("swipe-after", boundary, width - boundary, height),
    ],
    text: "",
  };
  const divider: SvgNode = {
    tag: "line",
    attrs: new Map([
      ["x1", String(boundary)],
      ["y1", "0"],
      ["x2", String(boundary)],
      ["y2", String(height)],
      ["stroke", "#e11"],
      ["stroke-width", "1"],
      ["data-layer", "divider"],
    ]),
    children: [],
    text: "",
  };
  return compositeRoot(width, height, [defs, before.node, after.node, divider]);
}

export function buildOnionSkin(
  beforeSrc: string,
  afterSrc: string,
  opacity: number,
  highlights?: HighlightRefs,
): string {
  const o = clamp01(opacity);
  const before = buildLayer(beforeSrc, { name: "before", highlights: highlights?.before });
  const after = buildLayer(afterSrc, {
    name: "after",
    opacity: o,
    highlights: highlights?.after,
  });
  return compositeRoot(
    Math.max(before.width, after.width),
    Math.max(before.height, after.height),
    [before.node, after.node],
  );
}

export function buildComparison(
  mode: CompareMode,
  beforeSrc: string,
  afterSrc: string,
  control: number,
  highlights?: HighlightRefs,
): string {
  switch (mode) {
    case "two-up":
      return buildTwoUp(beforeSrc, afterSrc, highlights);
    case "swipe":
      return buildSwipe(beforeSrc, afterSrc, control, highlights);
    case "onion-skin":
      return buildOnionSkin(beforeSrc, afterSrc, control, highlights);
  }
}

function clipRect(id: string, x: number, width: number, height: number): SvgNode {
  return {
    tag: "clipPath",
    attrs: new Map([["id", id]]),
    children: [
      {
        tag: "rect",
        attrs: new Map([
          ["x", String(x)],
          ["y", "0"],
          ["width", String(Math.max(width, 0))],
          ["height", String(height)],
        ]),
        children: [],
        text: "",
      },
    ],
    text: "",
  };
}

function clamp01(value: number): number {
  if (Number.isNaN(value)) return 0;
  return Math.min(1, Math.max(0, value));
}
