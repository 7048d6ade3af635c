import pytest

from qvacuum.core.config import settings
from qvacuum.schemas.mode import ModeId
from qvacuum.schemas.squeeze import SqueezeSet
from qvacuum.services.bogoliubov import pair_space
from qvacuum.services.fock_space import build_space
from qvacuum.services.report_service import default_config_path

@pytest.fixture
def mode():
    return ModeId(momentum_label=0)

@pytest.fixture
def single_mode_space(mode):
    return build_space([mode], 16)

@pytest.fixture
def single_pair():
    return SqueezeSet.single(0.3)

@pytest.fixture
def single_pair_space(single_pair):
    return pair_space(single_pair, 12)

@pytest.fixture
def one_momentum():
    """Both sector pairs of one momentum: four modes"""
    return SqueezeSet.for_momenta([(0, 0.2)])

@pytest.fixture
def default_config_text():
    with open(default_config_path(), "r", encoding="utf-8") as f:
        return f.read()

@pytest.fixture
def output_dir(tmp_path):
    return str(tmp_path / "reports")

@pytest.fixture(scope="function")
def test_settings():
    return settings
