from pathlib import Path

import pytest

from chcspec.parser import parse_constrained_facts, parse_program
from chcspec.properties import PropertySet

DATA = Path(__file__).parent / "data"


def load_program(name: str):
    return parse_program((DATA / name).read_text())


def load_props(name: str) -> PropertySet:
    return PropertySet(parse_constrained_facts((DATA / name).read_text()))


@pytest.fixture
def nested_loop():
    return load_program("nested_loop.chc")


@pytest.fixture
def nested_props():
    return load_props("nested_loop.props")


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
