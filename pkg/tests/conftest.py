from __future__ import annotations

import os
from pathlib import Path

import pytest

from propnr.constructions import hamming16, nordstrom_robinson, nr_z4_structure

REPO = Path(__file__).resolve().parents[1]


def results_dir() -> Path:
    """Where the long-tier caches live: ``$PROPNR_CACHE`` or ``<repo>/results``."""
    env = os.environ.get("PROPNR_CACHE")
    return Path(env) if env else REPO / "results"


@pytest.fixture(scope="session")
def nr():
    return nordstrom_robinson()


@pytest.fixture(scope="session")
def h16():
    return hamming16()


@pytest.fixture(scope="session")
def z4s():
    return nr_z4_structure()


@pytest.fixture(scope="session")
def z4_extensions(z4s):
    from propnr.extension import extend_structure

    return extend_structure(z4s)


@pytest.fixture(scope="session")
def cache_dir() -> Path:
    return results_dir()


ACCEPTANCE_LINES: list = []


def record_criterion(number: int, status: str, detail: str) -> str:
    line = f"criterion {number:>2}: {status} {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
