from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"
MOCKS = Path(__file__).parent / "mock_extractors"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def mocks_dir() -> Path:
    return MOCKS
