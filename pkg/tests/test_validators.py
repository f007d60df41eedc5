"""Tests for command line value parsers."""
import pytest

from chp_power.core.exceptions import UsageError
from chp_power.core.types import DispatchTarget, parse_dispatch_target
from chp_power.utils.validators import parse_index_list, parse_load_spec


@pytest.mark.parametrize(
    "text, loads, is_range",
    [
        ("15", [15.0], False),
        ("0", [0.0], False),
        ("10:20:5", [10.0, 15.0, 20.0], True),
        ("10:22:5", [10.0, 15.0, 20.0], True),
        ("5:5:1", [5.0], True),
        ("0:0.3:0.1", [0.0, 0.1, 0.2, 0.3], True),
    ],
)
def test_parse_load_spec(text, loads, is_range):
    parsed, ranged = parse_load_spec(text)
    assert parsed == pytest.approx(loads)
    assert ranged is is_range


@pytest.mark.parametrize("text", ["abc", "-1", "inf", "1:2", "20:10:5", "1:5:0", "1:5:-1", "1:x:1"])
def test_parse_load_spec_rejects(text):
    with pytest.raises(UsageError):
        parse_load_spec(text)


def test_parse_index_list():
    assert parse_index_list("3, 1,3", 4) == [0, 2]
    assert parse_index_list(None, 4) == []
    assert parse_index_list(" ", 4) == []


@pytest.mark.parametrize("text", ["0", "5", "a", "1,,2"])
def test_parse_index_list_rejects(text):
    with pytest.raises(UsageError):
        parse_index_list(text, 4)


@pytest.mark.parametrize(
    "text, target",
    [("0", DispatchTarget.ZERO), ("x", DispatchTarget.PARTIAL), ("G", DispatchTarget.FULL), ("g", DispatchTarget.FULL)],
)
def test_parse_dispatch_target(text, target):
    assert parse_dispatch_target(text) is target


def test_parse_dispatch_target_rejects():
    with pytest.raises(ValueError):
        parse_dispatch_target("half")
