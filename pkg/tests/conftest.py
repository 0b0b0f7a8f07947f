import json
from pathlib import Path

import pytest

from vass_asym.model import parse_vass

MODELS = Path(__file__).resolve().parent.parent / "models"


def load_model(name):
    return parse_vass((MODELS / name).read_text())


def load_doc(name):
    return json.loads((MODELS / name).read_text())


@pytest.fixture
def walk():
    """Single probabilistic state, one counter, fair +-1 steps."""
    return load_model("random_walk_1d.json")


@pytest.fixture
def pump():
    """Three counters, four end-component classes, one router state."""
    return load_model("pump_transfer_3d.json")


@pytest.fixture
def dec_loop():
    return load_model("decreasing_loop.json")


@pytest.fixture
def inc_loop():
    return load_model("increasing_loop.json")


@pytest.fixture
def zero_cycle():
    return load_model("zero_cycle_2state.json")
