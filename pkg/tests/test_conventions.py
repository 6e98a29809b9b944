import pytest

from figchain.conventions import (
    CommitMessage,
    format_branch_name,
    parse_branch_name,
    parse_commit_message,
)
from figchain.errors import BranchFormat, MsgFormat, UnknownClass

DOCUMENTED_MESSAGES = [
    ("[title: update title text]", "title"),
    ("[axes-title: add y-axis title, remove brackets in x-axis title]", "axes-title"),
    ("[legend-general: remove black stroke]", "legend-general"),
    ('[legend-title: add title "Climate effect through"]', "legend-title"),
    ("[size-height: increase height]", "size-height"),
]

MALFORMED_MESSAGES = [
    ("fix legend", MsgFormat),
    ("changed stuff", MsgFormat),
    ("[title update title]", MsgFormat),
    ("title: update title]", MsgFormat),
    ("[title: ]", MsgFormat),
    ("[: no class]", MsgFormat),
    ("[]", MsgFormat),
    ("[legend-color: recolor]", UnknownClass),
    ("[sizes: embiggen]", UnknownClass),
    ("[marks-title: rename]", UnknownClass),
]

MALFORMED_BRANCHES = [
    "main",
    "iteration-improvement",
    "iteration0-improvement1",
    "iteration1-improvement0",
    "iteration1improvement1",
    "Iteration1-improvement1",
    "iteration1-improvement1-extra",
    "improvement1-iteration1",
    "iteration01-improvement1",
    "iteration1-improvement",
]


@pytest.mark.parametrize("text,token", DOCUMENTED_MESSAGES)
def test_documented_messages_parse(text, token):
    msg = parse_commit_message(text)
    assert msg.class_token == token
    assert msg.serialize() == text.replace(": ", ": ", 1)


def test_serialize_parse_round_trip():
    for text, _ in DOCUMENTED_MESSAGES:
        msg = parse_commit_message(text)
        assert parse_commit_message(msg.serialize()) == msg


@pytest.mark.parametrize("text,exc", MALFORMED_MESSAGES)
def test_malformed_messages_rejected(text, exc):
    with pytest.raises(exc):
        parse_commit_message(text)


def test_commit_message_requires_description():
    with pytest.raises(MsgFormat):
        CommitMessage(class_token="title", description="   ")


def test_branch_names_parse():
    assert parse_branch_name("iteration1-improvement1") == (1, 1)
    assert parse_branch_name("iteration1-improvement2") == (1, 2)
    assert parse_branch_name("iteration3-improvement1") == (3, 1)
    assert parse_branch_name("iteration12-improvement34") == (12, 34)


@pytest.mark.parametrize("text", MALFORMED_BRANCHES)
def test_malformed_branches_rejected(text):
    with pytest.raises(BranchFormat):
        parse_branch_name(text)


def test_format_branch_round_trip():
    assert parse_branch_name(format_branch_name(2, 5)) == (2, 5)
    with pytest.raises(BranchFormat):
        format_branch_name(0, 1)
