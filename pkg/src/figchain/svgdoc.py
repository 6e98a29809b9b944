"""Normalized SVG element tree for code-generated figures.

The supported subset is what chart generators emit: basic shapes, paths,
text, groups, presentation attributes, and internal use/defs references.
Anything outside it raises UnsupportedFeature with the element path so
nothing is silently dropped. Every element gets a stable document-order
path ("/", "/0", "/0/2", ...) usable as a diff and figure-map address
even when it has no id.
"""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from xml.sax.saxutils import escape, quoteattr

from .errors import MalformedXml, UnsupportedFeature
from .geometry import Affine, BBox, IDENTITY, bbox_of_points, parse_transform, union_all
from .pathdata import parse_path, path_bbox

SVG_NS = "http://www.w3.org/2000/svg"
XLINK_NS = "http://www.w3.org/1999/xlink"

SUPPORTED_TAGS = frozenset(
    {
        "svg", "g", "defs", "use", "title", "desc", "metadata", "clipPath",
        "rect", "circle", "ellipse", "line", "path", "polyline", "polygon",
        "text", "tspan",
    }
)

# Tags whose geometry comes straight from attributes.
SHAPE_PARAM_ATTRS = {
    "rect": ("x", "y", "width", "height"),
    "circle": ("cx", "cy", "r"),
    "ellipse": ("cx", "cy", "rx", "ry"),
    "line": ("x1", "y1", "x2", "y2"),
    "text": ("x", "y"),
    "tspan": ("x", "y"),
    "use": ("x", "y"),
}

_LENGTH_RE = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(px|pt)?\s*$")


@dataclass(frozen=True)
class Geometry:
    """Resolved bbox in root user units plus local shape parameters."""

    bbox: BBox | None
    shape: dict[str, float] = field(default_factory=dict)


@dataclass
class Element:
    tag: str
    path: str
    id: str | None
    classes: frozenset[str]
    attributes: dict[str, str]
    text_content: str | None
    children: tuple["Element", ...]
    geometry: Geometry | None = None

    def iter(self):
        yield self
        for child in self.children:
            yield from child.iter()

    def content_equal(self, other: "Element") -> bool:
        """Source-level equality: tag, attributes, text, and children, ignoring paths."""
        return (
            self.tag == other.tag
            and self.attributes == other.attributes
            and self.text_content == other.text_content
            and len(self.children) == len(other.children)
            and all(a.content_equal(b) for a, b in zip(self.children, other.children))
        )


@dataclass
class FigureDocument:
    width: float
    height: float
    root: Element
    source_path: str = "<memory>"

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise MalformedXml(
                f"figure must have positive width and height, got {self.width} x {self.height}"
            )

    def iter_elements(self):
        yield from self.root.iter()

    def by_path(self) -> dict[str, Element]:
        return {el.path: el for el in self.iter_elements()}


def parse_figure(svg_bytes: bytes | str, source_path: str = "<memory>") -> FigureDocument:
    """Parse SVG bytes into a FigureDocument with resolved geometry."""
    if isinstance(svg_bytes, str):
        svg_bytes = svg_bytes.encode("utf-8")
    try:
        et_root = ET.fromstring(svg_bytes)
    except ET.ParseError as exc:
        raise MalformedXml(f"not well-formed XML: {exc}") from exc
    try:
        root_tag = _local_tag(et_root.tag)
    except UnsupportedFeature as exc:
        raise MalformedXml(str(exc)) from None
    if root_tag != "svg":
        raise MalformedXml(f"root element is {root_tag!r}, expected svg")

    root = _convert(et_root, path="/")
    width = _parse_length(root.attributes.get("width"), root.attributes.get("viewBox"), 2)
    height = _parse_length(root.attributes.get("height"), root.attributes.get("viewBox"), 3)
    if width is None or height is None:
        raise MalformedXml("svg root must declare width and height (or a viewBox)")

    doc = FigureDocument(width=width, height=height, root=root, source_path=source_path)
    _resolve_geometry(doc)
    return doc


def load_figure(path) -> FigureDocument:
    with open(path, "rb") as fh:
        return parse_figure(fh.read(), source_path=str(path))


def serialize_figure(doc: FigureDocument) -> bytes:
    """Re-serialize preserving attribute order; parse(serialize(d)) == d's tree."""
    lines: list[str] = ['<?xml version="1.0" encoding="utf-8"?>']
    _write(doc.root, lines, indent=0, is_root=True)
    return ("\n".join(lines) + "\n").encode("utf-8")


# --- parsing internals ---

def _local_tag(tag: str) -> str:
    if tag.startswith("{"):
        ns, _, local = tag[1:].partition("}")
        if ns != SVG_NS:
            raise UnsupportedFeature(f"element in foreign namespace {ns!r}")
        return local
    return tag


def _attr_name(name: str, path: str) -> str:
    if name.startswith("{"):
        ns, _, local = name[1:].partition("}")
        if ns == XLINK_NS:
            return f"xlink:{local}"
        if ns == SVG_NS:
            return local
        raise UnsupportedFeature(f"attribute in foreign namespace {ns!r}", path)
    return name


def _convert(node: ET.Element, path: str) -> Element:
    try:
        tag = _local_tag(node.tag)
    except UnsupportedFeature as exc:
        raise UnsupportedFeature(str(exc), path) from None
    if tag not in SUPPORTED_TAGS:
        raise UnsupportedFeature(f"unsupported element <{tag}>", path)

    attributes: dict[str, str] = {}
    for name, value in node.attrib.items():
        attributes[_attr_name(name, path)] = value

    href = attributes.get("xlink:href", attributes.get("href"))
    if href is not None and not href.startswith("#"):
        raise UnsupportedFeature(f"external reference {href!r}", path)

    if tag == "metadata":
        # Opaque non-visual content (e.g. RDF): kept verbatim, not modeled.
        inner = (node.text or "") + "".join(
            ET.tostring(child, encoding="unicode") for child in node
        )
        return Element(
            tag=tag,
            path=path,
            id=attributes.get("id"),
            classes=frozenset(),
            attributes=attributes,
            text_content=inner.strip() or None,
            children=(),
        )

    children = []
    for idx, child in enumerate(node):
        child_path = f"{path.rstrip('/')}/{idx}"
        children.append(_convert(child, child_path))
        if child.tail is not None and child.tail.strip():
            raise UnsupportedFeature("text between sibling elements", child_path)

    text = node.text
    if text is not None and not text.strip():
        text = None

    classes = frozenset((attributes.get("class") or "").split())
    return Element(
        tag=tag,
        path=path,
        id=attributes.get("id"),
        classes=classes,
        attributes=attributes,
        text_content=text,
        children=tuple(children),
    )


def _parse_length(value: str | None, viewbox: str | None, viewbox_index: int) -> float | None:
    if value is None:
        if viewbox is None:
            return None
        parts = viewbox.replace(",", " ").split()
        if len(parts) != 4:
            raise MalformedXml(f"bad viewBox {viewbox!r}")
        return float(parts[viewbox_index])
    m = _LENGTH_RE.match(value)
    if m is None:
        raise UnsupportedFeature(f"unsupported length {value!r} (use user units, px, or pt)")
    return float(m.group(1))


def _float_attr(el: Element, name: str, default: float = 0.0) -> float:
    raw = el.attributes.get(name)
    if raw is None:
        return default
    m = _LENGTH_RE.match(raw)
    if m is None:
        # x/y on text may be a list; take the first number.
        first = raw.replace(",", " ").split()
        if first:
            m2 = _LENGTH_RE.match(first[0])
            if m2 is not None:
                return float(m2.group(1))
        raise UnsupportedFeature(f"unsupported length {raw!r} for {name}", el.path)
    return float(m.group(1))


def _parse_points(raw: str, path: str) -> list[tuple[float, float]]:
    nums = [float(v) for v in re.findall(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?", raw)]
    if len(nums) % 2 != 0:
        raise MalformedXml(f"odd point count in points list at {path}")
    return list(zip(nums[0::2], nums[1::2]))


def _resolve_geometry(doc: FigureDocument) -> None:
    by_id: dict[str, Element] = {}
    for el in doc.iter_elements():
        if el.id is not None and el.id not in by_id:
            by_id[el.id] = el

    def resolve(el: Element, ctm: Affine, active: frozenset[str]) -> BBox | None:
        local = ctm
        transform = el.attributes.get("transform")
        if transform:
            local = ctm @ parse_transform(transform, el.path)

        shape = {
            name: _float_attr(el, name)
            for name in SHAPE_PARAM_ATTRS.get(el.tag, ())
            if el.tag not in ("text", "tspan", "use") or name in el.attributes
        }

        bbox: BBox | None
        if el.tag == "rect":
            x, y = shape.get("x", 0.0), shape.get("y", 0.0)
            w, h = shape.get("width", 0.0), shape.get("height", 0.0)
            corners = [(x, y), (x + w, y), (x, y + h), (x + w, y + h)]
            bbox = bbox_of_points([local.apply(*p) for p in corners])
            _resolve_children(el, local, active, resolve)
        elif el.tag in ("circle", "ellipse"):
            cx, cy = shape.get("cx", 0.0), shape.get("cy", 0.0)
            rx = shape.get("r", shape.get("rx", 0.0))
            ry = shape.get("r", shape.get("ry", 0.0))
            bbox = _ellipse_bbox(local, cx, cy, rx, ry)
            _resolve_children(el, local, active, resolve)
        elif el.tag == "line":
            p0 = local.apply(shape.get("x1", 0.0), shape.get("y1", 0.0))
            p1 = local.apply(shape.get("x2", 0.0), shape.get("y2", 0.0))
            bbox = bbox_of_points([p0, p1])
            _resolve_children(el, local, active, resolve)
        elif el.tag in ("polyline", "polygon"):
            pts = _parse_points(el.attributes.get("points", ""), el.path)
            bbox = bbox_of_points([local.apply(*p) for p in pts]) if pts else None
            _resolve_children(el, local, active, resolve)
        elif el.tag == "path":
            segments = parse_path(el.attributes.get("d", ""))
            bbox = path_bbox(segments, local)
            _resolve_children(el, local, active, resolve)
        elif el.tag in ("text", "tspan"):
            anchors = []
            if "x" in el.attributes or "y" in el.attributes or el.tag == "text":
                anchors.append(local.apply(_float_attr(el, "x"), _float_attr(el, "y")))
            child_boxes = [resolve(c, local, active) for c in el.children]
            bbox = union_all([bbox_of_points(anchors)] + child_boxes)
        elif el.tag == "use":
            bbox = _resolve_use(el, local, by_id, active, resolve)
            _resolve_children(el, local, active, resolve)
        elif el.tag in ("defs", "clipPath", "title", "desc", "metadata"):
            # non-rendered containers: children resolve but contribute nothing
            for c in el.children:
                resolve(c, local, active)
            bbox = None
        else:  # svg, g
            child_boxes = [
                resolve(c, local, active) for c in el.children
            ]
            bbox = union_all(
                b
                for c, b in zip(el.children, child_boxes)
                if c.tag not in ("defs", "clipPath")
            )

        el.geometry = Geometry(bbox=bbox, shape=shape)
        return bbox

    resolve(doc.root, IDENTITY, frozenset())


def _resolve_children(el: Element, local: Affine, active, resolve) -> None:
    for c in el.children:
        resolve(c, local, active)


def _resolve_use(el: Element, local: Affine, by_id, active, resolve) -> BBox | None:
    href = el.attributes.get("xlink:href", el.attributes.get("href"))
    if href is None:
        return None
    ref = href[1:]
    if ref in active:
        raise UnsupportedFeature(f"circular use reference #{ref}", el.path)
    target = by_id.get(ref)
    if target is None:
        raise UnsupportedFeature(f"unresolved internal reference #{ref}", el.path)
    shift = Affine(e=_float_attr(el, "x"), f=_float_attr(el, "y"))
    # Recompute the target subtree at the use site without overwriting the
    # geometry stored at its defining location.
    saved = [(e, e.geometry) for e in target.iter()]
    bbox = resolve(target, local @ shift, active | {ref})
    for e, geom in saved:
        e.geometry = geom
    return bbox


def _ellipse_bbox(t: Affine, cx: float, cy: float, rx: float, ry: float) -> BBox:
    # Exact bbox of an affinely transformed ellipse.
    ox, oy = t.apply(cx, cy)
    ex = (abs(t.a * rx) ** 2 + abs(t.c * ry) ** 2) ** 0.5
    ey = (abs(t.b * rx) ** 2 + abs(t.d * ry) ** 2) ** 0.5
    return BBox(ox - ex, oy - ey, ox + ex, oy + ey)


# --- serialization internals ---

def _write(el: Element, lines: list[str], indent: int, is_root: bool = False) -> None:
    pad = "  " * indent
    attrs = dict(el.attributes)
    if is_root and "xmlns" not in attrs:
        attrs = {"xmlns": SVG_NS, **attrs}
    if any(name.startswith("xlink:") for name in attrs) and "xmlns:xlink" not in attrs:
        attrs["xmlns:xlink"] = XLINK_NS
    rendered = "".join(f" {name}={quoteattr(value)}" for name, value in attrs.items())
    if not el.children and el.text_content is None:
        lines.append(f"{pad}<{el.tag}{rendered}/>")
        return
    if not el.children:
        # metadata content is opaque markup kept verbatim
        inner = el.text_content if el.tag == "metadata" else escape(el.text_content)
        lines.append(f"{pad}<{el.tag}{rendered}>{inner}</{el.tag}>")
        return
    head = f"{pad}<{el.tag}{rendered}>"
    if el.text_content is not None:
        head += escape(el.text_content)
    lines.append(head)
    for child in el.children:
        _write(child, lines, indent + 1)
    lines.append(f"{pad}</{el.tag}>")
