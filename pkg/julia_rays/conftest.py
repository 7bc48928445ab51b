import sys
from pathlib import Path

import pytest

# Add the julia_rays directory to sys.path to resolve internal imports
app_dir = Path(__file__).parent.absolute()
if str(app_dir) not in sys.path:
    sys.path.insert(0, str(app_dir))

from services.quadmap import from_c  # noqa: E402
from services.wakes import TrailCache  # noqa: E402


@pytest.fixture(scope="session")
def identity_map():
    return from_c(0)


@pytest.fixture(scope="session")
def chebyshev_map():
    return from_c(-2)


@pytest.fixture(scope="session")
def golden_map():
    from services.experiments import golden_siegel_map

    return golden_siegel_map()


@pytest.fixture(scope="session")
def chebyshev_cache(chebyshev_map):
    return TrailCache(chebyshev_map, depth=30, m=4)
