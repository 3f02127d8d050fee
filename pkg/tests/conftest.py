import sys
from pathlib import Path

import numpy as np
import pytest

from zbias import BinaryScenario

sys.path.insert(0, str(Path(__file__).parent))

# Hand-checked worked examples: ten probabilities each, with the
# whole-population effects rounding to (true, unadj, adj, verdict) =
# (0.0550, 0.0574, 0.0584, YES), (0.0050, 0.0076, 0.0077, YES) and
# (0.0150, 0.0173, 0.0172, NO) at four decimals.
WORKED_CASES = {
    "case1": dict(pZ=0.5, pU=0.5, p11=0.8, p10=0.6, p01=0.2, p00=0.1,
                  r11=0.08, r10=0.06, r01=0.02, r00=0.01),
    "case2": dict(pZ=0.5, pU=0.5, p11=0.3, p10=0.2, p01=0.3, p00=0.1,
                  r11=0.03, r10=0.02, r01=0.03, r00=0.01),
    "case3": dict(pZ=0.5, pU=0.5, p11=0.5, p10=0.4, p01=0.4, p00=0.1,
                  r11=0.04, r10=0.04, r01=0.04, r00=0.01),
}

WORKED_ROUNDED = {
    "case1": (0.0550, 0.0574, 0.0584, "YES"),
    "case2": (0.0050, 0.0076, 0.0077, "YES"),
    "case3": (0.0150, 0.0173, 0.0172, "NO"),
}


def binary_from_params(pZ, pU, p11, p10, p01, p00, r11, r10, r01, r00,
                       binary_outcome=True):
    return BinaryScenario(
        z_prob=pZ,
        u_prob=pU,
        treat=((p00, p01), (p10, p11)),
        outcome_mean=((r00, r01), (r10, r11)),
        binary_outcome=binary_outcome,
    )


def worked_case(name):
    return binary_from_params(**WORKED_CASES[name])


def random_binary(rng: np.random.Generator) -> BinaryScenario:
    vals = rng.uniform(size=10)
    return binary_from_params(*vals)


@pytest.fixture
def case1():
    return worked_case("case1")


@pytest.fixture
def case2():
    return worked_case("case2")


@pytest.fixture
def case3():
    return worked_case("case3")
