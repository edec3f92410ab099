import math
import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from quickassort.instance import (
    OfflineConstraint,
    generate_synthetic,
    random_order,
    with_offline_constraint,
    with_orders,
)
from quickassort.toys import heuristic_gap_instance, ro_failure_instance

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def small_instance(seed: int, n: int, m: int, u_on0: float = 2.0, luce: bool = False,
                   K: int | None = None, alpha0: float = 0.5):
    """Generated instance, optionally with random dominance orders and a cardinality cap."""
    inst = generate_synthetic(n, m, alpha0, u_on0, seed)
    if luce:
        inst = with_orders(inst, [random_order(n, seed * 31 + i) for i in range(m)])
    if K is not None and K < n:
        inst = with_offline_constraint(inst, OfflineConstraint.cardinality(K))
    return inst


def oracle_suite(count: int, seed: int = 0):
    """The randomized grid shared by exactness tests: n 4..8, m 1..3, mixed orders and caps."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(4, 9))
        m = int(rng.integers(1, 4))
        u = float((2, 5, 10)[k % 3])
        luce = bool(k % 2)
        K = math.ceil(n / 3) if (k // 2) % 2 else n
        out.append(small_instance(1000 + k, n, m, u, luce, K))
    return out


@pytest.fixture
def toy():
    return ro_failure_instance()


@pytest.fixture
def gap_toy():
    return heuristic_gap_instance()


@pytest.fixture(scope="session")
def desk_instance():
    """Generated (100, 50) instance with online no-purchase weight 2."""
    return generate_synthetic(100, 50, 0.5, 2.0, seed=1)


@pytest.fixture(scope="session")
def desk_solution(desk_instance):
    from quickassort.solver import solve_qap

    return solve_qap(desk_instance)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
