"""Shared fixtures: bundled domain objects and a small replay corpus.

The expensive full-scale pipeline lives in test_acceptance's own
session fixtures; everything else trains on the small corpus so the
unit suite stays quick.
"""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from etadm import (
    ContextEncoderConfig,
    bundled_db_path,
    bundled_rulebook,
    collect_records,
    generate_synthetic_corpus,
    get_encoder,
    load_db,
)

_acceptance_lines: list[str] = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    """Collect a one-line verdict shown in the terminal summary."""
    tail = f"  ({detail})" if detail else ""
    _acceptance_lines.append(f"[{'PASS' if passed else 'FAIL'}] {name}{tail}")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in _acceptance_lines:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rulebook():
    return bundled_rulebook()


@pytest.fixture(scope="session")
def db():
    return load_db(bundled_db_path())


@pytest.fixture(scope="session")
def encoder_config():
    return ContextEncoderConfig()


@pytest.fixture(scope="session")
def encoder(encoder_config):
    return get_encoder(encoder_config)


@pytest.fixture(scope="session")
def small_corpus(rulebook, db):
    return generate_synthetic_corpus(7, 24, rulebook, db)


@pytest.fixture(scope="session")
def small_records(small_corpus, rulebook, db, encoder):
    return collect_records(small_corpus, rulebook, db, encoder)
