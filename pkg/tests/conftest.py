import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from semiresp import DgpSpec, discrete, from_arrays, gen_discrete


def small_discrete(seed=0, n=200, model="M1"):
    rng = np.random.default_rng(seed)
    return gen_discrete(DgpSpec("discrete", model, n), rng)


@pytest.fixture
def six_rows():
    """Two x1 levels x one x2 level each; y observed on four rows."""
    x1 = [0, 0, 0, 1, 1, 1]
    x2 = [0, 1, 0, 1, 0, 1]
    y = [1.0, 2.0, 0.0, 3.0, 5.0, 0.0]
    delta = [1, 1, 0, 1, 1, 0]
    return from_arrays(x1, x2, y, delta, [discrete(0, 1)], [discrete(0, 1)])


@pytest.fixture
def tiny_profile_rows():
    """Four rows in one x1 cell: two respondents (y=0,1), two nonrespondents."""
    x1 = [0, 0, 0, 0]
    x2 = [0, 1, 0, 1]
    y = [0.0, 1.0, 0.0, 0.0]
    delta = [1, 1, 0, 0]
    return from_arrays(x1, x2, y, delta, [discrete(0)], [discrete(0, 1)])
