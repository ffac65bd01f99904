from __future__ import annotations

import numpy as np
import pytest

from poissonkit import kermack_mckendrick, toda


@pytest.fixture
def kmk_spec():
    return kermack_mckendrick(1.0, 1.0, 1.0)


@pytest.fixture
def toda3_spec():
    return toda(3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
