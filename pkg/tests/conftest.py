import numpy as np
import pytest

from jointdoa.signal_model import ArrayGeometry, PathSet, SubcarrierGrid

ACCEPTANCE_LINES = []


@pytest.fixture
def uca16():
    return ArrayGeometry.uca(16, 1.5)


@pytest.fixture
def wifi():
    return SubcarrierGrid.wifi_ht40()


@pytest.fixture
def two_paths():
    return PathSet(np.deg2rad([30.0, 40.0]), [50e-9, 100e-9], [1.0, 0.9 * np.exp(0.7j)])


def random_uca(rng, sizes=(4, 8, 16)):
    return ArrayGeometry.uca(int(rng.choice(sizes)), rng.uniform(0.5, 2.0))


def random_grid(rng, K):
    if K == 114:
        return SubcarrierGrid.wifi_ht40()
    bins = np.sort(rng.choice(128, size=K, replace=False))
    return SubcarrierGrid(5.32e9, 312.5e3, 128, bins)


def random_angles(rng, L, min_sep_deg=5.0):
    while True:
        theta = rng.uniform(0, 2 * np.pi, L)
        d = np.abs(np.angle(np.exp(1j * (theta[:, None] - theta[None, :]))))
        if L == 1 or d[~np.eye(L, dtype=bool)].min() > np.deg2rad(min_sep_deg):
            return theta


def random_beta(rng, L):
    return rng.uniform(0.3, 1.5, L) * np.exp(1j * rng.uniform(0, 2 * np.pi, L))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
