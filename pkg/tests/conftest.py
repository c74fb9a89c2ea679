import os
import sys
from pathlib import Path

import hypothesis
import numpy as np
import pytest

# Add repository root to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from linksim.core.grid import GridConfig, build_grid  # noqa: E402

np.seterr(all="warn")

hypothesis.settings.register_profile("ci", max_examples=100, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture
def grid():
    """Default 10 MHz grid at 30 dB SNR."""
    return build_grid(GridConfig(), noise_power=1e-3)
