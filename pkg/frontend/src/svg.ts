/**
 * Minimal XML/SVG tree: enough to parse bundled figures, address
 * elements by document-order paths, and re-serialize composites.
 * DOM-free so it runs in tests and in the page alike.
 */

export interface SvgNode {
  tag: string;
  attrs: Map<string, string>;
  children: SvgNode[];
  text: string;
}

const NAME_RE = /^[A-Za-z_][\w.:-]*/;

export class SvgParseError extends Error {}

export function parseSvg(source: string): SvgNode {
  const parser = new Parser(source);
  const root = parser.document();
  if (root === null) throw new SvgParseError("no root element found");
  return root;
}

class Parser {
  private pos = 0;
  constructor(private readonly src: string) {}

  document(): SvgNode | null {
    this.skipMisc();
    if (this.src.startsWith("<", this.pos)) return this.element();
    return null;
  }

  private skipMisc(): void {
    for (;;) {
      while (this.pos < this.src.length && /\s/.test(this.src[this.pos]!)) this.pos++;
      if (this.src.startsWith("<?", this.pos)) {
        const end = this.src.indexOf("?>", this.pos);
        if (end < 0) throw new SvgParseError("unterminated processing instruction");
        this.pos = end + 2;
      } else if (this.src.startsWith("<!--", this.pos)) {
        const end = this.src.indexOf("-->", this.pos);
        if (end < 0) throw new SvgParseError("unterminated comment");
        this.pos = end + 3;
      } else if (this.src.startsWith("<!", this.pos)) {
        const end = this.src.indexOf(">", this.pos);
        if (end < 0) throw new SvgParseError("unterminated declaration");
        this.pos = end + 1;
      } else {
        return;
      }
    }
  }

  private element(): SvgNode {
    if (this.src[this.pos] !== "<") throw new SvgParseError(`expected '<' at ${this.pos}`);
    this.pos++;
    const name = this.name();
    const attrs = new Map<string, string>();
    for (;;) {
      this.ws();
      if (this.src.startsWith("/>", this.pos)) {
        this.pos += 2;
        return { tag: name, attrs, children: [], text: "" };
      }
      if (this.src[this.pos] === ">") {
        this.pos++;
        break;
      }
      const attrName = this.name();
      this.ws();
      if (this.src[this.pos] !== "=") throw new SvgParseError(`expected '=' after ${attrName}`);
      this.pos++;
      this.ws();
      attrs.set(attrName, this.quoted());
    }
    const children: SvgNode[] = [];
    let text = "";
    for (;;) {
      if (this.pos >= this.src.length) throw new SvgParseError(`unterminated <${name}>`);
      if (this.src.startsWith("</", this.pos)) {
        this.pos += 2;
        const closing = this.name();
        this.ws();
        if (this.src[this.pos] !== ">") throw new SvgParseError("malformed closing tag");
        this.pos++;
        if (closing !== name) throw new SvgParseError(`mismatched </${closing}> for <${name}>`);
        return { tag: name, attrs, children, text: text.trim() };
      }
      if (this.src.startsWith("<!--", this.pos)) {
        const end = this.src.indexOf("-->", this.pos);
        if (end < 0) throw new SvgParseError("unterminated comment");
        this.pos = end + 3;
        continue;
      }
      if (this.src[this.pos] === "<") {
        children.push(this.element());
        continue;
      }
      const next = this.src.indexOf("<", this.pos);
      if (next < 0) throw new SvgParseError(`unterminated <${name}>`);
      text += unescapeXml(this.src.slice(this.pos, next));
      this.pos = next;
    }
  }

  private name(): string {
    const m = NAME_RE.exec(this.src.slice(this.pos));
    if (!m) throw new SvgParseError(`expected a name at offset ${this.pos}`);
    this.pos += m[0].length;
    return m[0];
  }

  private ws(): void {
    while (this.pos < this.src.length && /\s/.test(this.src[this.pos]!)) this.pos++;
  }

  private quoted(): string {
    const quote = this.src[this.pos];
    if (quote !== '"' && quote !== "'") throw new SvgParseError("expected quoted attribute value");
    const end = this.src.indexOf(quote, this.pos + 1);
    if (end < 0) throw new SvgParseError("unterminated attribute value");
    const raw = this.src.slice(this.pos + 1, end);
    this.pos = end + 1;
    return unescapeXml(raw);
  }
}

export function unescapeXml(raw: string): string {
  return raw
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&quot;/g, '"')
    .replace(/&apos;/g, "'")
    .replace(/&amp;/g, "&");
}

export function escapeXml(raw: string): string {
  return raw
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function serializeSvg(node: SvgNode): string {
  const attrs = [...node.attrs.entries()]
    .map(([name, value]) => ` ${name}="${escapeXml(value)}"`)
    .join("");
  if (node.children.length === 0 && node.text === "") {
    return `<${node.tag}${attrs}/>`;
  }
  const inner =
    escapeXml(node.text) + node.children.map((child) => serializeSvg(child)).join("");
  return `<${node.tag}${attrs}>${inner}</${node.tag}>`;
}

export function cloneNode(node: SvgNode): SvgNode {
  return {
    tag: node.tag,
    attrs: new Map(node.attrs),
    children: node.children.map(cloneNode),
    text: node.text,
  };
}

/** Element at a document-order path like "/0/2"; "/" is the root. */
export function nodeAtPath(root: SvgNode, path: string): SvgNode | null {
  if (path === "/") return root;
  let node: SvgNode = root;
  for (const part of path.split("/").filter((p) => p.length)) {
    const idx = Number(part);
    const child = node.children[idx];
    if (child === undefined) return null;
    node = child;
  }
  return node;
}

export function rootSize(root: SvgNode): { width: number; height: number } {
  const width = Number(root.attrs.get("width") ?? NaN);
  const height = Number(root.attrs.get("height") ?? NaN);
  if (!Number.isFinite(width) || !Number.isFinite(height)) {
    throw new SvgParseError("figure root must declare numeric width and height");
  }
  return { width, height };
}
