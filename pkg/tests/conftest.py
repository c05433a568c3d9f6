"""Shared test fixtures: committed reliability profiles and paths."""

from pathlib import Path

import pytest

from polarlab.construction import load_profile

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def profiles():
    """Committed Monte Carlo profiles (100k trials each), keyed by name."""
    return {
        path.stem: load_profile(path)
        for path in sorted(FIXTURES.glob("*.json"))
    }


@pytest.fixture(scope="session")
def fixture_dir():
    return FIXTURES
