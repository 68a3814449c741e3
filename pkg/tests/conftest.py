import numpy as np
import pytest

from aescatter.forward import IncidentWave, MaterialParams


@pytest.fixture(scope="session")
def params() -> MaterialParams:
    return MaterialParams.default()


@pytest.fixture(scope="session")
def wave() -> IncidentWave:
    return IncidentWave(np.pi / 8)
