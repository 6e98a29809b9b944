"""Two-level classification of figure components.

The first level names the chart component (size, axes, legend, title,
marks, annotation, other); the second refines it where a refinement
exists. A (first, second) pair serializes to the class token used in
commit messages and lint output, e.g. ``legend-title`` or ``size-height``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import UnknownRole

FIRST_LEVELS = ("size", "axes", "legend", "title", "marks", "annotation", "other")

# First levels that admit a refinement, and their allowed refinements.
SECOND_LEVELS: dict[str, tuple[str, ...]] = {
    "size": ("width", "height"),
    "axes": ("label", "tick", "axis-line", "title", "grid"),
    "legend": ("general", "gradient", "labels", "symbols", "symbol-layout", "title"),
    "marks": ("bar", "line", "arc", "area", "point", "text"),
}


@dataclass(frozen=True)
class Role:
    first_level: str
    second_level: str | None = None

    def __post_init__(self):
        if self.first_level not in FIRST_LEVELS:
            raise UnknownRole(f"unknown first-level role {self.first_level!r}")
        if self.second_level is not None:
            allowed = SECOND_LEVELS.get(self.first_level)
            if allowed is None:
                raise UnknownRole(
                    f"{self.first_level!r} does not take a second level"
                )
            if self.second_level not in allowed:
                raise UnknownRole(
                    f"unknown second-level role {self.second_level!r} for {self.first_level!r}"
                )

    @property
    def token(self) -> str:
        if self.second_level is None:
            return self.first_level
        return f"{self.first_level}-{self.second_level}"

    def __str__(self) -> str:
        return self.token


def _build_token_table() -> dict[str, Role]:
    table = {}
    for first in FIRST_LEVELS:
        table[first] = Role(first)
        for second in SECOND_LEVELS.get(first, ()):
            role = Role(first, second)
            table[role.token] = role
    return table


ROLE_TOKENS: dict[str, Role] = _build_token_table()


def parse_role_token(token: str) -> Role:
    """Inverse of Role.token; raises UnknownRole for anything else."""
    try:
        return ROLE_TOKENS[token]
    except KeyError:
        raise UnknownRole(f"unknown role token {token!r}") from None


def all_role_tokens() -> list[str]:
    return list(ROLE_TOKENS)
