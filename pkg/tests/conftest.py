import pathlib

import pytest

from toscaflow import builtin_catalog, parse_service_template

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def defs():
    return builtin_catalog().definitions


@pytest.fixture
def fixture_path():
    def _path(name):
        return str(FIXTURES / name)
    return _path


@pytest.fixture
def load_fixture():
    def _load(name):
        text = (FIXTURES / name).read_text(encoding="utf-8")
        return parse_service_template(text, filename=name)
    return _load
