import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS_DIR))

import corpus  # noqa: E402

GAMES_DIR = TESTS_DIR.parent / "games"


@pytest.fixture
def alphabet():
    return corpus.two_channel_alphabet()


@pytest.fixture
def ev_game():
    return corpus.ev_game()


@pytest.fixture
def mp_game():
    return corpus.mp_game()


@pytest.fixture
def games_dir():
    return GAMES_DIR
