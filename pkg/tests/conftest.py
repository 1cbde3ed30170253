from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def nft_raw() -> str:
    return (FIXTURES / "nft-basics.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def semiotics_raw() -> str:
    return (FIXTURES / "semiotics-intro.txt").read_text(encoding="utf-8")
