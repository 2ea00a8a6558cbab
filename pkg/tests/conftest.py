import numpy as np
import pytest
from hypothesis import settings

from App.models.chain import Decomposition
from App.models.transition import TransitionMatrix


# shared by the property suites; no per-example deadline
settings.register_profile("causabound", max_examples=200, deadline=None)
settings.load_profile("causabound")


def random_matrix(rng: np.random.Generator, positive: bool = False, margin: float = 0.0) -> TransitionMatrix:
    """A valid law; margin keeps it that far inside |tau| + |rho| <= 1."""
    tau = rng.uniform(0.02, 0.98) if positive else rng.uniform(-0.98, 0.98)
    room = max(0.0, 1.0 - abs(tau) - margin)
    return TransitionMatrix(tau, rng.uniform(-room, room))


def random_chain(rng: np.random.Generator, n: int, positive: bool = False, margin: float = 0.0) -> Decomposition:
    return Decomposition(tuple(random_matrix(rng, positive, margin) for _ in range(n)))


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def settings_file(tmp_path):
    """An application config.ini whose log and outputs live under tmp_path."""
    path = tmp_path / "config.ini"
    path.write_text(
        "[SETTING]\n"
        "LOG_SIZE = 10485760\n"
        f"NAME_LOG = {tmp_path / 'causabound.log'}\n"
        "LOG_LEVEL = INFO\n"
        "SEED = 20240601\n"
        "SIGNIFICANT_DIGITS = 9\n"
        f"OUTPUT_DIR = {tmp_path / 'output'}\n"
        "\n"
        "[TOLERANCE]\n"
        "SHARPNESS = 1e-10\n"
        "\n"
        "[FIGURES]\n"
        "TAU = 0.2\n"
        "RHO_VALUES = -0.4,-0.2,0,0.2,0.4,0.6\n"
        "N_MAX = 30\n"
        "WIDTH = 640\n"
        "HEIGHT = 400\n"
        "\n"
        "[ORACLE]\n"
        "INTERIOR_SAMPLES = 200\n"
        "SAMPLES = 20000\n"
        "EXPOSURE_PROB = 0.5\n"
        "SIGNIFICANCE = 0.01\n"
        "BLOCK_SIZE = 4096\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture
def logger(settings_file):
    from utils.configHandler import ConfigHandler
    from utils.logger import LoggerHandler

    return LoggerHandler(name="causabound-test", config_data=ConfigHandler(str(settings_file))).get_logger()
