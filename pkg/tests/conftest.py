import sys
from pathlib import Path

import pytest

from tmkit.behavior import build_chronology
from tmkit.syntax import SourceFile, parse

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"


def fixture_path(name: str) -> str:
    return str(FIXTURES / name)


def load(name: str):
    result = parse(SourceFile.read(fixture_path(name)))
    assert result.document is not None, result.diagnostics
    return result.document


@pytest.fixture(scope="session")
def airport():
    return load("airport.tm")


@pytest.fixture(scope="session")
def airport_chronology(airport):
    return build_chronology(airport.events, airport.chronologies[0])
