"""Session-wide sweeps shared by the acceptance tests and the cross-sweep invariants.

Each sweep runs at most once per session, on first use.
"""

import time

import numpy as np
import pytest

from oscidecay.decayfit import SweepConfig, sweep, witness_sweep
from oscidecay.phase import case_c, hyperbolic

WITNESS_LAMBDAS = np.geomspace(1e2, 1e5, 10)
NORM_LAMBDAS = np.geomspace(1e2, 1e4, 8)


@pytest.fixture(scope="session")
def witness_records():
    start = time.perf_counter()
    records = witness_sweep(WITNESS_LAMBDAS, SweepConfig())
    return records, time.perf_counter() - start


@pytest.fixture(scope="session")
def opnorm_case_c():
    start = time.perf_counter()
    rows = sweep(case_c(), NORM_LAMBDAS, "opnorm", SweepConfig())
    return rows, time.perf_counter() - start


@pytest.fixture(scope="session")
def opnorm_hyperbolic():
    start = time.perf_counter()
    rows = sweep(hyperbolic(), NORM_LAMBDAS, "opnorm", SweepConfig())
    return rows, time.perf_counter() - start
