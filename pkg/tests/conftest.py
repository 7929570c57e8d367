import os

import pytest

from cpdsv import textfmt

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name):
    return os.path.join(FIXTURE_DIR, name + ".cpds")


def _load(name):
    return textfmt.parse_file(fixture_path(name))


@pytest.fixture(scope="session")
def carousel():
    return _load("carousel")


@pytest.fixture(scope="session")
def carousel_deadpop():
    return _load("carousel_deadpop")


@pytest.fixture(scope="session")
def flagrace():
    return _load("flagrace")


@pytest.fixture(scope="session")
def flagrace_safe():
    return _load("flagrace_safe")


@pytest.fixture(scope="session")
def adders():
    return _load("adders")


@pytest.fixture(scope="session")
def adders_safe_prop(adders):
    """The adders system with a property that never fires (counters stay zero)."""
    cpds, _ = adders
    with open(fixture_path("adders")) as handle:
        text = handle.read()
    text = text.replace("bad: (done | c, c, eps) ;", "bad: (done | z, z, *) ;")
    return textfmt.parse_cpds(text)[1]


@pytest.fixture(scope="session")
def inert():
    return _load("inert")
