"""Sidecar figure map: selector rules assigning taxonomy roles to elements.

File grammar, one rule per line::

    # comment
    id-prefix legend-title => legend-title
    class gridline => axes-grid
    path /0/3 => marks-bar
    default => other

Rules are ordered and the first match wins. A match conflict is only an
error when two matching rules are equally specific (same selector kind,
and for id-prefix the same prefix length) yet name different roles; that
would make the outcome arbitrary, so it is surfaced as AmbiguousRule
instead of tie-broken. The trailing default line is required so every
element resolves to a role.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import AmbiguousRule, DuplicateSelector, FigureMapSyntaxError, UnknownRole
from .svgdoc import Element, FigureDocument
from .taxonomy import Role, parse_role_token

SELECTOR_KINDS = ("id-prefix", "class", "path")


@dataclass(frozen=True)
class MapRule:
    kind: str
    pattern: str
    role: Role

    def matches(self, element: Element) -> bool:
        if self.kind == "id-prefix":
            return element.id is not None and element.id.startswith(self.pattern)
        if self.kind == "class":
            return self.pattern in element.classes
        return element.path == self.pattern

    def specificity(self) -> tuple:
        if self.kind == "id-prefix":
            return ("id-prefix", len(self.pattern))
        return (self.kind,)


@dataclass(frozen=True)
class FigureMap:
    rules: tuple[MapRule, ...]
    default_role: Role

    def resolve(self, element: Element) -> Role:
        matches = [r for r in self.rules if r.matches(element)]
        if not matches:
            return self.default_role
        winner = matches[0]
        for other in matches[1:]:
            if other.role != winner.role and other.specificity() == winner.specificity():
                raise AmbiguousRule(
                    f"element {element.path} ({element.id or element.tag}) matches "
                    f"{winner.kind} {winner.pattern!r} -> {winner.role.token} and "
                    f"{other.kind} {other.pattern!r} -> {other.role.token}"
                )
        return winner.role


def parse_figure_map(text: str | bytes) -> FigureMap:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    rules: list[MapRule] = []
    seen: set[tuple[str, str]] = set()
    default_role: Role | None = None
    line_no = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if default_role is not None:
            raise FigureMapSyntaxError("rules after the default line", line_no)
        left, sep, right = line.partition("=>")
        if not sep:
            raise FigureMapSyntaxError("missing '=>'", line_no)
        token = right.strip()
        try:
            role = parse_role_token(token)
        except UnknownRole as exc:
            raise UnknownRole(f"line {line_no}: {exc}") from None
        parts = left.split()
        if parts == ["default"]:
            default_role = role
            continue
        if len(parts) != 2:
            raise FigureMapSyntaxError(
                f"expected '<selector-kind> <pattern> => <role>', got {line!r}", line_no
            )
        kind, pattern = parts
        if kind not in SELECTOR_KINDS:
            raise FigureMapSyntaxError(f"unknown selector kind {kind!r}", line_no)
        if (kind, pattern) in seen:
            raise DuplicateSelector(f"line {line_no}: duplicate selector {kind} {pattern!r}")
        seen.add((kind, pattern))
        rules.append(MapRule(kind=kind, pattern=pattern, role=role))
    if default_role is None:
        raise FigureMapSyntaxError("figure map must end with a 'default => <role>' line", line_no)
    return FigureMap(rules=tuple(rules), default_role=default_role)


def serialize_figure_map(figure_map: FigureMap) -> str:
    lines = [f"{r.kind} {r.pattern} => {r.role.token}" for r in figure_map.rules]
    lines.append(f"default => {figure_map.default_role.token}")
    return "\n".join(lines) + "\n"


def classify_elements(doc: FigureDocument, figure_map: FigureMap) -> list[tuple[str, Role]]:
    """Total, deterministic role assignment: one (path, role) per element."""
    return [(el.path, figure_map.resolve(el)) for el in doc.iter_elements()]
