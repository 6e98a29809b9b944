"""Commit-message and branch-name grammars for documented operations."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import BranchFormat, MsgFormat, UnknownClass, UnknownRole
from .taxonomy import Role, parse_role_token

_MESSAGE_RE = re.compile(r"^\[([^:\[\]]+):\s*(.+)\]$", re.DOTALL)
_BRANCH_RE = re.compile(r"^iteration([1-9]\d*)-improvement([1-9]\d*)$")


@dataclass(frozen=True)
class CommitMessage:
    class_token: str
    description: str

    def __post_init__(self):
        if not self.description.strip():
            raise MsgFormat("commit description must be nonempty")
        parse_role_token(self.class_token)  # validates against the taxonomy

    @property
    def role(self) -> Role:
        return parse_role_token(self.class_token)

    def serialize(self) -> str:
        return f"[{self.class_token}: {self.description}]"


def parse_commit_message(text: str) -> CommitMessage:
    m = _MESSAGE_RE.match(text.strip())
    if m is None:
        raise MsgFormat(
            f"commit message must look like '[<class>: <description>]', got {text!r}"
        )
    token = m.group(1).strip()
    description = m.group(2).strip()
    if not description:
        raise MsgFormat("commit message description is empty")
    try:
        parse_role_token(token)
    except UnknownRole as exc:
        raise UnknownClass(str(exc)) from None
    return CommitMessage(class_token=token, description=description)


def parse_branch_name(text: str) -> tuple[int, int]:
    m = _BRANCH_RE.match(text)
    if m is None:
        raise BranchFormat(
            f"branch name must look like 'iteration<K>-improvement<M>', got {text!r}"
        )
    return int(m.group(1)), int(m.group(2))


def format_branch_name(iteration: int, improvement: int) -> str:
    if iteration < 1 or improvement < 1:
        raise BranchFormat("iteration and improvement numbers start at 1")
    return f"iteration{iteration}-improvement{improvement}"
