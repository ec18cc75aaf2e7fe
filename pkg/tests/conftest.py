from pathlib import Path

import pytest

from codequery.minilang import parse_program

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load_corpus(dirname="corpus"):
    sources = []
    for path in sorted((FIXTURES / dirname).glob("*.mini")):
        sources.append((path.name, path.read_text()))
    return parse_program(sources)


@pytest.fixture
def corpus():
    return load_corpus()


@pytest.fixture
def packages():
    return load_corpus("packages")


@pytest.fixture
def fixtures_dir():
    return FIXTURES
