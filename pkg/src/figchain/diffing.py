"""Role-aware structural diff between two figure versions.

Matching is by identical id first, then greedy nearest-geometry within
(tag, role) buckets, with ties broken by document order. The resulting
change list is a faithful edit script: apply_changes(old, changes)
reconstructs the new element tree exactly.

Matched elements that merely shift index because siblings were inserted
or removed produce no change entry; apply_changes realigns them by
order. Genuine moves (reparenting or reordering, detected per parent
via a longest-increasing-subsequence pass) are emitted as structure
modifications pinned to an explicit new path.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from enum import Enum

from .errors import FigchainError, MixedAspect
from .figmap import FigureMap
from .svgdoc import Element, FigureDocument
from .taxonomy import Role

# Attributes that change rendered geometry; anything else (minus text) is style.
GEOMETRY_ATTRS = frozenset(
    {
        "x", "y", "width", "height", "cx", "cy", "r", "rx", "ry",
        "x1", "y1", "x2", "y2", "points", "d", "dx", "dy",
        "transform", "viewBox",
    }
)

TAG_KEY = "#tag"
TEXT_KEY = "#text"
PATH_KEY = "#path"


class ChangeKind(Enum):
    ADD = "add"
    REMOVE = "remove"
    MODIFY = "modify"


@dataclass
class ElementChange:
    kind: ChangeKind
    role: Role
    old_ref: str | None
    new_ref: str | None
    facets: frozenset[str] = frozenset()
    detail: dict[str, tuple[str | None, str | None]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "role": self.role.token,
            "old_ref": self.old_ref,
            "new_ref": self.new_ref,
            "facets": sorted(self.facets),
            "detail": {k: [v[0], v[1]] for k, v in self.detail.items()},
        }


def diff(old: FigureDocument, new: FigureDocument, figure_map: FigureMap) -> list[ElementChange]:
    old_els = list(old.iter_elements())
    new_els = list(new.iter_elements())
    old_roles = {el.path: figure_map.resolve(el) for el in old_els}
    new_roles = {el.path: figure_map.resolve(el) for el in new_els}

    pairs = _match(old_els, new_els, old_roles, new_roles)
    pinned = _detect_moves(pairs)

    matched_old = {o.path for o, _ in pairs}
    matched_new = {n.path for _, n in pairs}

    changes: list[ElementChange] = []
    for el in old_els:
        if el.path not in matched_old:
            changes.append(_whole_element_change(ChangeKind.REMOVE, el, old_roles[el.path]))
    for el in new_els:
        if el.path not in matched_new:
            changes.append(_whole_element_change(ChangeKind.ADD, el, new_roles[el.path]))
    for o, n in pairs:
        change = _modify_change(o, n, new_roles[n.path], pinned=(o.path, n.path) in pinned)
        if change is not None:
            changes.append(change)

    changes.sort(key=lambda c: _doc_order_key(c.old_ref if c.old_ref is not None else c.new_ref))
    return changes


def _doc_order_key(path: str) -> tuple:
    if path == "/":
        return ()
    return tuple(int(p) for p in path.strip("/").split("/"))


def _match(old_els, new_els, old_roles, new_roles):
    pairs: list[tuple[Element, Element]] = []
    used_old: set[str] = set()
    used_new: set[str] = set()

    # Roots always correspond.
    pairs.append((old_els[0], new_els[0]))
    used_old.add(old_els[0].path)
    used_new.add(new_els[0].path)

    new_by_id: dict[str, Element] = {}
    for el in new_els:
        if el.id is not None and el.id not in new_by_id:
            new_by_id[el.id] = el
    seen_ids: set[str] = set()
    for el in old_els:
        if el.path in used_old or el.id is None or el.id in seen_ids:
            continue
        seen_ids.add(el.id)
        cand = new_by_id.get(el.id)
        if cand is not None and cand.path not in used_new and cand.tag == el.tag:
            pairs.append((el, cand))
            used_old.add(el.path)
            used_new.add(cand.path)

    # Greedy nearest-geometry within (tag, role) buckets for the rest.
    buckets: dict[tuple[str, str], tuple[list, list]] = {}
    for idx, el in enumerate(old_els):
        if el.path not in used_old:
            buckets.setdefault((el.tag, old_roles[el.path].token), ([], []))[0].append((idx, el))
    for idx, el in enumerate(new_els):
        if el.path not in used_new:
            buckets.setdefault((el.tag, new_roles[el.path].token), ([], []))[1].append((idx, el))

    for (tag, _token), (olds, news) in sorted(buckets.items()):
        with_geom_old = [(i, e) for i, e in olds if _centroid(e) is not None]
        with_geom_new = [(i, e) for i, e in news if _centroid(e) is not None]
        candidates = []
        for oi, oe in with_geom_old:
            ox, oy = _centroid(oe)
            for ni, ne in with_geom_new:
                nx, ny = _centroid(ne)
                dist = ((ox - nx) ** 2 + (oy - ny) ** 2) ** 0.5
                candidates.append((dist, oi, ni, oe, ne))
        candidates.sort(key=lambda c: (c[0], c[1], c[2]))
        for _dist, _oi, _ni, oe, ne in candidates:
            if oe.path in used_old or ne.path in used_new:
                continue
            pairs.append((oe, ne))
            used_old.add(oe.path)
            used_new.add(ne.path)
        # Geometry-less leftovers pair up in document order.
        rest_old = [e for _, e in olds if e.path not in used_old]
        rest_new = [e for _, e in news if e.path not in used_new]
        for oe, ne in zip(rest_old, rest_new):
            pairs.append((oe, ne))
            used_old.add(oe.path)
            used_new.add(ne.path)

    return pairs


def _centroid(el: Element):
    if el.geometry is None or el.geometry.bbox is None:
        return None
    return el.geometry.bbox.center


def _parent_path(path: str) -> str | None:
    if path == "/":
        return None
    head, _, _ = path.rpartition("/")
    return head or "/"


def _sibling_index(path: str) -> int:
    return int(path.rpartition("/")[2])


def _detect_moves(pairs) -> set[tuple[str, str]]:
    """Pairs needing explicit placement: reparented or reordered ones."""
    new_of_old = {o.path: n.path for o, n in pairs}
    pinned: set[tuple[str, str]] = set()
    groups: dict[tuple[str, str], list[tuple[Element, Element]]] = {}
    for o, n in pairs:
        po, pn = _parent_path(o.path), _parent_path(n.path)
        if po is None and pn is None:
            continue  # roots
        if po is None or pn is None or new_of_old.get(po) != pn:
            pinned.add((o.path, n.path))
            continue
        groups.setdefault((po, pn), []).append((o, n))
    for group in groups.values():
        group.sort(key=lambda p: _sibling_index(p[0].path))
        keep = _lis_indices([_sibling_index(n.path) for _, n in group])
        for idx, (o, n) in enumerate(group):
            if idx not in keep:
                pinned.add((o.path, n.path))
    return pinned


def _lis_indices(values: list[int]) -> set[int]:
    # Longest strictly increasing subsequence; returns kept positions.
    if not values:
        return set()
    tails: list[int] = []  # position of the smallest tail of each length
    prev = [-1] * len(values)
    tail_vals: list[int] = []
    for i, v in enumerate(values):
        j = bisect.bisect_left(tail_vals, v)
        if j == len(tail_vals):
            tail_vals.append(v)
            tails.append(i)
        else:
            tail_vals[j] = v
            tails[j] = i
        prev[i] = tails[j - 1] if j > 0 else -1
    keep = set()
    i = tails[-1]
    while i != -1:
        keep.add(i)
        i = prev[i]
    return keep


def _whole_element_change(kind: ChangeKind, el: Element, role: Role) -> ElementChange:
    detail: dict[str, tuple[str | None, str | None]] = {TAG_KEY: (None, el.tag)}
    for name, value in el.attributes.items():
        detail[name] = (None, value)
    if el.text_content is not None:
        detail[TEXT_KEY] = (None, el.text_content)
    if kind is ChangeKind.REMOVE:
        detail = {k: (v[1], None) for k, v in detail.items()}
    return ElementChange(
        kind=kind,
        role=role,
        old_ref=el.path if kind is ChangeKind.REMOVE else None,
        new_ref=el.path if kind is ChangeKind.ADD else None,
        facets=frozenset(),
        detail=detail,
    )


def _modify_change(o: Element, n: Element, role: Role, pinned: bool) -> ElementChange | None:
    facets: set[str] = set()
    detail: dict[str, tuple[str | None, str | None]] = {}
    changed_attrs: list[str] = []
    for name in list(o.attributes) + [a for a in n.attributes if a not in o.attributes]:
        ov, nv = o.attributes.get(name), n.attributes.get(name)
        if ov != nv:
            detail[name] = (ov, nv)
            changed_attrs.append(name)
            facets.add("geometry" if name in GEOMETRY_ATTRS else "style")
    if o.text_content != n.text_content:
        detail[TEXT_KEY] = (o.text_content, n.text_content)
        facets.add("text")
    if pinned:
        detail[PATH_KEY] = (o.path, n.path)
        facets.add("structure")
    if not facets:
        return None
    return ElementChange(
        kind=ChangeKind.MODIFY,
        role=_refine_size_role(role, changed_attrs),
        old_ref=o.path,
        new_ref=n.path,
        facets=frozenset(facets),
        detail=detail,
    )


def _refine_size_role(role: Role, changed_attrs: list[str]) -> Role:
    # A bare "size" role refines to width/height when only one dimension moved.
    if role.first_level != "size" or role.second_level is not None:
        return role
    dims = {a for a in changed_attrs if a in ("width", "height")}
    if dims == {"width"}:
        return Role("size", "width")
    if dims == {"height"}:
        return Role("size", "height")
    return role


def classify_operation(changes: list[ElementChange]) -> str:
    """The single class token covering all changes, or MixedAspect."""
    if not changes:
        raise ValueError("classify_operation requires a nonempty change list")
    tokens = {c.role.token for c in changes}
    if len(tokens) > 1:
        raise MixedAspect(tokens)
    return tokens.pop()


# --- edit-script application ---

def apply_changes(old: FigureDocument, changes: list[ElementChange]) -> FigureDocument:
    """Rebuild the new document from the old one plus the change list."""
    from .svgdoc import parse_figure, serialize_figure

    removed: set[str] = set()
    mods: dict[str, ElementChange] = {}
    pinned_out: set[str] = set()
    inserts: dict[str, list[tuple[int, str, object]]] = {}

    for ch in changes:
        if ch.kind is ChangeKind.REMOVE:
            removed.add(ch.old_ref)
        elif ch.kind is ChangeKind.ADD:
            parent = _parent_path(ch.new_ref)
            inserts.setdefault(parent, []).append((_sibling_index(ch.new_ref), "add", ch))
        else:
            mods[ch.old_ref] = ch
            if PATH_KEY in ch.detail:
                pinned_out.add(ch.old_ref)
                target = ch.detail[PATH_KEY][1]
                parent = _parent_path(target)
                inserts.setdefault(parent, []).append((_sibling_index(target), "move", ch.old_ref))

    old_by_path = old.by_path()

    def build_from_old(el: Element, new_path: str) -> Element:
        ch = mods.get(el.path)
        attrs = dict(el.attributes)
        text = el.text_content
        if ch is not None:
            for name, (_, new_value) in ch.detail.items():
                if name == TEXT_KEY:
                    text = new_value
                elif not name.startswith("#"):
                    if new_value is None:
                        attrs.pop(name, None)
                    else:
                        attrs[name] = new_value
        survivors = [
            c for c in el.children if c.path not in removed and c.path not in pinned_out
        ]
        children = _build_children(survivors, new_path)
        return _mk(el.tag, new_path, attrs, text, children)

    def build_added(ch: ElementChange, new_path: str) -> Element:
        tag = ch.detail[TAG_KEY][1]
        attrs = {
            name: value
            for name, (_, value) in ch.detail.items()
            if not name.startswith("#") and value is not None
        }
        text = ch.detail.get(TEXT_KEY, (None, None))[1]
        children = _build_children([], new_path)
        return _mk(tag, new_path, attrs, text, children)

    def _build_children(survivors: list[Element], parent_path: str) -> tuple[Element, ...]:
        explicit = sorted(inserts.get(parent_path, []), key=lambda t: t[0])
        out: list[Element] = []
        si, ei = 0, 0
        while si < len(survivors) or ei < len(explicit):
            slot = len(out)
            child_path = f"{parent_path.rstrip('/')}/{slot}"
            if ei < len(explicit) and explicit[ei][0] == slot:
                _, action, payload = explicit[ei]
                ei += 1
                if action == "add":
                    out.append(build_added(payload, child_path))
                else:
                    out.append(build_from_old(old_by_path[payload], child_path))
            elif si < len(survivors):
                out.append(build_from_old(survivors[si], child_path))
                si += 1
            else:
                rest = ", ".join(str(e[0]) for e in explicit[ei:])
                raise FigchainError(
                    f"inconsistent edit script: insert index(es) {rest} beyond end of {parent_path}"
                )
        return tuple(out)

    def _mk(tag, path, attrs, text, children) -> Element:
        return Element(
            tag=tag,
            path=path,
            id=attrs.get("id"),
            classes=frozenset((attrs.get("class") or "").split()),
            attributes=attrs,
            text_content=text,
            children=children,
        )

    new_root = build_from_old(old.root, "/")
    # Round-trip through the serializer so geometry and invariants are
    # recomputed by the one canonical code path.
    tmp_doc = FigureDocument(
        width=old.width, height=old.height, root=new_root, source_path=old.source_path
    )
    return parse_figure(serialize_figure(tmp_doc), source_path=old.source_path)


def swap_change(ch: ElementChange) -> ElementChange:
    """The change as it would appear with the documents exchanged."""
    kind = {
        ChangeKind.ADD: ChangeKind.REMOVE,
        ChangeKind.REMOVE: ChangeKind.ADD,
        ChangeKind.MODIFY: ChangeKind.MODIFY,
    }[ch.kind]
    return ElementChange(
        kind=kind,
        role=ch.role,
        old_ref=ch.new_ref,
        new_ref=ch.old_ref,
        facets=ch.facets,
        detail={k: (v[1], v[0]) for k, v in ch.detail.items()},
    )
