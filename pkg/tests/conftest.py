import numpy as np
import pytest

import hardywitness as hw

SUITE_SEED = 20260808
SUITE_SIZE = 100


def random_state(rng, dims):
    n = int(np.prod(dims))
    return hw.make_state(dims, rng.standard_normal(n) + 1j * rng.standard_normal(n))


def random_unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def apply_side1_unitary(v, split, u):
    """Rotate the side-1 factor of a state by a unitary (test helper)."""
    m = hw.reshape_bipartite(v, split)
    return hw.matrix_to_state(u @ m, split, v.dims)


def build_suite(n_states=SUITE_SIZE, seed=SUITE_SEED):
    """Random applicable two-subsystem states over all dims in {2,3,4}^2.

    Returns (state, report) pairs; bipartition side order is randomized.
    """
    rng = np.random.default_rng(seed)
    combos = [(d1, d2) for d1 in (2, 3, 4) for d2 in (2, 3, 4)]
    suite = []
    k = 0
    while len(suite) < n_states:
        dims = combos[k % len(combos)]
        k += 1
        v = random_state(rng, dims)
        if rng.integers(2):
            split = hw.Bipartition((0,), (1,))
        else:
            split = hw.Bipartition((1,), (0,))
        report = hw.make_witness_report(v, split)
        if report.applicable:
            suite.append((v, report))
    return suite


@pytest.fixture(scope="session")
def witness_suite():
    return build_suite()


@pytest.fixture()
def state_08_02():
    return hw.make_state([2, 2], [0.8**0.5, 0, 0, 0.2**0.5])


@pytest.fixture()
def report_08_02(state_08_02):
    return hw.make_witness_report(state_08_02, hw.Bipartition((0,), (1,)))


@pytest.fixture()
def tripartite_example():
    """q1^2 = 0.5 over sqrt(.8)|00>+sqrt(.2)|11>, orthogonal branch |221>."""
    amps = np.zeros(18, dtype=complex)
    amps[0] = (0.5 * 0.8) ** 0.5  # |000>
    amps[8] = (0.5 * 0.2) ** 0.5  # |110>
    amps[17] = 0.5**0.5  # |221>
    return hw.make_state([3, 3, 2], amps)
